#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xalma/tensor.hpp"

namespace xalma {

class PolicyModel;

// Language-specific low-rank module, hard-gated to one group. For a target
// weight W [out,in] the effective delta is (alpha / rank) * B . A with
// A [rank,in] and B [out,rank]. A fresh adapter has B = 0 everywhere, so
// attaching it leaves the model's behavior unchanged.
struct Adapter {
  int group_id = 0;
  int rank = 1;
  double alpha = 2.0;
  std::vector<std::string> targets;      // injection-point names, fixed order
  std::map<std::string, Tensor> a_mats;  // [rank, in]
  std::map<std::string, Tensor> b_mats;  // [out, rank]

  int64_t param_count() const;
  std::vector<std::pair<std::string, Tensor*>> parameters();
  std::vector<std::pair<std::string, const Tensor*>> parameters() const;

  void set_requires_grad(bool on);
};

// A filled from a seeded N(0, 0.02), B zeroed. Targets must all be
// registered injection points of the model (ConfigError otherwise).
// alpha defaults to 2*rank when passed as <= 0.
Adapter init_adapter(const PolicyModel& model, int group_id,
                     std::vector<std::string> targets, int rank, double alpha,
                     uint64_t seed);

// New model with W' = W + (alpha/rank) * B . A folded into every target and
// no attached adapters; parameter count matches the base model.
PolicyModel merge(const PolicyModel& base, const Adapter& adapter);

// How adapters are presented to scoring (mirrors the three loading
// strategies): exactly one module resident, a merged plain model, or all
// modules resident with per-input group selection.
struct LoadingStrategy {
  enum class Kind { SingleModule, MergedModel, AllModules };
  Kind kind = Kind::SingleModule;
  int group_id = 0;  // ignored for AllModules
};

void save_adapter(const std::string& path, const Adapter& a);
Adapter load_adapter(const std::string& path);

}  // namespace xalma
