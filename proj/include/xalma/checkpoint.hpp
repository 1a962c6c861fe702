#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xalma/tensor.hpp"

namespace xalma {

// On-disk container shared by model, adapter, and training-state
// checkpoints: a versioned header (JSON, carries the hyperparameters) plus
// flat named tensor records with 64-bit little-endian floats. Writing the
// same container twice produces byte-identical files, and a save/load
// round trip is bit-exact.
struct Container {
  static constexpr uint32_t kVersion = 1;

  std::string kind;       // "model" | "adapter" | "train"
  nlohmann::json header;  // kind-specific metadata
  std::vector<std::pair<std::string, Tensor>> tensors;  // insertion order

  const Tensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

std::vector<unsigned char> serialize_container(const Container& c);
Container deserialize_container(const std::vector<unsigned char>& bytes);

void write_container(const std::string& path, const Container& c);
// Throws IntegrityError on truncation/corruption and ConfigError on a
// version mismatch.
Container read_container(const std::string& path);

// FNV-1a over the raw bytes of a tensor list; used for freeze-contract
// checks.
uint64_t tensors_checksum(const std::vector<const Tensor*>& tensors);

}  // namespace xalma
