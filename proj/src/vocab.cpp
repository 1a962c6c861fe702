#include "xalma/vocab.hpp"

#include <algorithm>
#include <set>

namespace xalma {

std::vector<std::string> utf8_codepoints(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    unsigned char b = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if (b < 0x80) {
      len = 1;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
    } else {
      throw VocabError("malformed UTF-8 byte at offset " + std::to_string(i));
    }
    if (i + len > text.size()) {
      throw VocabError("truncated UTF-8 sequence at offset " +
                       std::to_string(i));
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Vocab Vocab::from_charset(std::string_view charset) {
  std::set<std::string> uniq;
  for (auto& cp : utf8_codepoints(charset)) {
    if (cp != kSepGlyph) uniq.insert(cp);
  }
  std::vector<std::string> tokens = {"<pad>", "<bos>", "<eos>", kSepGlyph};
  tokens.insert(tokens.end(), uniq.begin(), uniq.end());
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 4 || tokens.size() > 256) {
    throw ConfigError("vocab must have 4..256 tokens, got " +
                      std::to_string(tokens.size()));
  }
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (size_t i = 0; i < v.tokens_.size(); ++i) {
    auto [it, inserted] = v.index_.emplace(v.tokens_[i], static_cast<int>(i));
    if (!inserted) {
      throw ConfigError("duplicate vocab token at id " + std::to_string(i));
    }
  }
  return v;
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) {
    throw VocabError("unknown token '" + std::string(token) + "'");
  }
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) {
    throw VocabError("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<size_t>(id)];
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<int> Vocab::encode(std::string_view text) const {
  std::vector<int> ids;
  for (auto& cp : utf8_codepoints(text)) ids.push_back(id(cp));
  return ids;
}

std::string Vocab::decode(std::span<const int> ids) const {
  std::string out;
  for (int i : ids) {
    if (i == kPad || i == kBos || i == kEos) continue;
    out += token(i);
  }
  return out;
}

}  // namespace xalma
