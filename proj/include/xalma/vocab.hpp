#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xalma/errors.hpp"

namespace xalma {

// Splits UTF-8 text into codepoint-sized chunks (each returned string is one
// codepoint). Malformed bytes surface as VocabError.
std::vector<std::string> utf8_codepoints(std::string_view text);

// Character-level vocabulary. Ids 0..3 are reserved:
//   0 <pad>, 1 <bos>, 2 <eos>, 3 the separator glyph (U+001F).
// The separator is textual: encoding a string containing the glyph yields the
// SEP id, and decode emits the glyph back, so pseudo-monolingual text
// round-trips through the tokenizer.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kSep = 3;
  static constexpr const char* kSepGlyph = "\x1f";

  // Builds a vocab whose non-reserved entries are the distinct codepoints of
  // `charset`, sorted, capped at 256 total ids.
  static Vocab from_charset(std::string_view charset);

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(std::string_view token) const;  // VocabError when unknown
  const std::string& token(int id) const;
  bool contains(std::string_view token) const;

  std::vector<int> encode(std::string_view text) const;
  // Decodes ids to text; pad/bos/eos are skipped, the separator glyph is kept.
  std::string decode(std::span<const int> ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  // Rebuild from an explicit token list (checkpoint restore path).
  static Vocab from_tokens(std::vector<std::string> tokens);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace xalma
