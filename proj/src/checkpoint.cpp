#include "xalma/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace xalma {

namespace {

constexpr char kMagic[4] = {'X', 'A', 'L', 'B'};

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_u64(std::vector<unsigned char>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_f64(std::vector<unsigned char>& out, double d) {
  put_u64(out, std::bit_cast<uint64_t>(d));
}

struct Reader {
  const std::vector<unsigned char>& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) {
      throw IntegrityError("checkpoint truncated at byte " +
                           std::to_string(pos));
    }
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(buf[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(&buf[pos]), n);
    pos += n;
    return s;
  }
};

}  // namespace

const Tensor& Container::tensor(const std::string& name) const {
  for (auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw IntegrityError("checkpoint is missing tensor '" + name + "'");
}

bool Container::has_tensor(const std::string& name) const {
  for (auto& [n, t] : tensors) {
    if (n == name) return true;
  }
  return false;
}

std::vector<unsigned char> serialize_container(const Container& c) {
  std::vector<unsigned char> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, Container::kVersion);

  nlohmann::json hdr = c.header;
  hdr["kind"] = c.kind;
  std::string hs = hdr.dump();
  put_u32(out, static_cast<uint32_t>(hs.size()));
  out.insert(out.end(), hs.begin(), hs.end());

  put_u32(out, static_cast<uint32_t>(c.tensors.size()));
  for (auto& [name, t] : c.tensors) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) put_u32(out, static_cast<uint32_t>(d));
    for (double v : t.data) put_f64(out, v);
  }
  return out;
}

Container deserialize_container(const std::vector<unsigned char>& bytes) {
  Reader r{bytes};
  std::string magic = r.str(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw IntegrityError("not a checkpoint file (bad magic)");
  }
  uint32_t version = r.u32();
  if (version != Container::kVersion) {
    throw ConfigError("checkpoint version " + std::to_string(version) +
                      " not supported (expected " +
                      std::to_string(Container::kVersion) + ")");
  }
  uint32_t hlen = r.u32();
  std::string hs = r.str(hlen);
  Container c;
  try {
    c.header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("checkpoint header unreadable: ") +
                         e.what());
  }
  c.kind = c.header.value("kind", "");

  uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t nlen = r.u32();
    std::string name = r.str(nlen);
    uint32_t rank = r.u32();
    std::vector<int> shape(rank);
    for (uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<int>(r.u32());
    int64_t n = shape_numel(shape);
    std::vector<double> data(static_cast<size_t>(n));
    for (int64_t j = 0; j < n; ++j) data[static_cast<size_t>(j)] = r.f64();
    c.tensors.emplace_back(std::move(name),
                           Tensor::from(std::move(shape), std::move(data)));
  }
  if (r.pos != bytes.size()) {
    throw IntegrityError("checkpoint has " +
                         std::to_string(bytes.size() - r.pos) +
                         " trailing bytes");
  }
  return c;
}

void write_container(const std::string& path, const Container& c) {
  auto bytes = serialize_container(c);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return deserialize_container(bytes);
}

uint64_t tensors_checksum(const std::vector<const Tensor*>& tensors) {
  uint64_t h = 0xCBF29CE484222325ull;
  auto mix = [&h](const unsigned char* p, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001B3ull;
    }
  };
  for (const Tensor* t : tensors) {
    for (int d : t->shape) {
      uint32_t u = static_cast<uint32_t>(d);
      mix(reinterpret_cast<const unsigned char*>(&u), 4);
    }
    mix(reinterpret_cast<const unsigned char*>(t->data.data()),
        t->data.size() * sizeof(double));
  }
  return h;
}

}  // namespace xalma
