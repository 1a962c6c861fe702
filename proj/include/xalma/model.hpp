#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xalma/adapter.hpp"
#include "xalma/graph.hpp"
#include "xalma/rng.hpp"
#include "xalma/vocab.hpp"

namespace xalma {

struct ModelConfig {
  int d = 32;        // model width
  int h = 64;        // MLP hidden width
  int blocks = 1;    // decoder blocks
  int max_seq = 64;  // position capacity P
  // Fixed scalar on each residual branch; stands in for normalization at
  // this scale (no trainable norm parameters).
  double residual_scale = 0.5;
};

// Translation instruction wrapper. The default format is byte-stable across
// the repo; scoring and generation always see prompt = render(...).
struct PromptTemplate {
  std::string format =
      "Translate this from {src_lang} to {tgt_lang}:\n"
      "{src_lang}: {source}\n"
      "{tgt_lang}:";

  std::string render(const std::string& src_lang, const std::string& tgt_lang,
                     const std::string& source) const;
};

struct SequenceScore {
  double total = 0.0;
  std::vector<double> per_token;
  double avg = 0.0;  // total / |target|, EOS included in the count
};

// Graph-valued score used by the losses: total log-likelihood of the target
// continuation plus its token count.
struct ScoredSeq {
  Value total;
  int len = 0;
};

struct GenMode {
  enum class Kind { greedy, temperature };
  Kind kind = Kind::greedy;
  double temp = 1.0;
  uint64_t seed = 0;

  static GenMode greedy_mode() { return GenMode{}; }
  static GenMode temperature_mode(double t, uint64_t seed) {
    return GenMode{Kind::temperature, t, seed};
  }
};

// Tiny decoder-only LM: token + position embeddings, single-head causal
// attention blocks with SiLU MLPs, zero-initialized unembedding head (a
// fresh model therefore scores every token uniformly). Every block linear
// (wq, wk, wv, wo, w1, w2) is a registered adapter injection point.
class PolicyModel {
 public:
  PolicyModel(Vocab vocab, ModelConfig cfg, uint64_t seed);

  const Vocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return cfg_; }

  // Base parameters in canonical (checkpoint) order.
  std::vector<std::pair<std::string, Tensor*>> parameters();
  std::vector<std::pair<std::string, const Tensor*>> parameters() const;
  const std::vector<std::string>& injection_points() const {
    return injection_points_;
  }
  Tensor& weight(const std::string& name);  // ConfigError when unknown
  const Tensor& weight(const std::string& name) const;

  void set_requires_grad(bool on);  // base tensors only
  uint64_t base_checksum() const;

  bool frozen = false;  // honored by the trainer: no base updates when set

  // --- adapters -----------------------------------------------------------
  void attach(Adapter adapter);            // StateError on duplicate group
  Adapter detach(int group_id);            // StateError when not attached
  const std::map<int, Adapter>& adapters() const { return adapters_; }
  std::map<int, Adapter>& adapters() { return adapters_; }
  bool has_adapter(int group_id) const { return adapters_.count(group_id); }

  // --- scoring ------------------------------------------------------------
  // Log-probability of `target` (must be non-empty and EOS-terminated)
  // after the rendered prompt. `group` selects which attached adapter is
  // active for this input: required when several are attached, defaulted to
  // the single attached one otherwise.
  SequenceScore sequence_logprob(const std::string& prompt,
                                 std::span<const int> target,
                                 std::optional<int> group = std::nullopt) const;

  // Same computation expressed on a caller-owned graph so losses can
  // differentiate through it. When `trainable` is set, parameter leaves
  // accumulate gradients per their requires_grad flags.
  ScoredSeq score_on_graph(Graph& g, const std::string& prompt,
                           std::span<const int> target,
                           std::optional<int> group = std::nullopt,
                           bool trainable = false) const;

  // Greedy or seeded-temperature decoding. Stops at EOS or max_len; the
  // returned ids exclude the prompt and the terminating EOS.
  std::vector<int> generate(const std::string& prompt, const GenMode& mode,
                            int max_len,
                            std::optional<int> group = std::nullopt) const;

  int64_t param_count(bool include_adapters) const;

  // Encode text and append EOS: the canonical target form for scoring.
  std::vector<int> target_ids(const std::string& text) const;

  void save(const std::string& path) const;
  static PolicyModel load(const std::string& path);

 private:
  friend PolicyModel merge(const PolicyModel&, const Adapter&);
  friend Adapter init_adapter(const PolicyModel&, int, std::vector<std::string>,
                              int, double, uint64_t);

  struct Block {
    Tensor wq, wk, wv, wo;  // [d, d], stored [out, in]
    Tensor w1;              // [h, d]
    Tensor w2;              // [d, h]
  };

  const Adapter* select_adapter(std::optional<int> group) const;
  // Full forward over ids (BOS-prefixed sequence); returns log-softmaxed
  // next-token distributions, shape [T, V].
  Value logprobs_on_graph(Graph& g, std::span<const int> ids,
                          const Adapter* adapter, bool trainable) const;
  Value param_leaf(Graph& g, const Tensor& t, bool trainable) const;
  std::vector<int> full_sequence(const std::string& prompt,
                                 std::span<const int> target) const;

  Vocab vocab_;
  ModelConfig cfg_;
  Tensor embed_;  // [V, d]
  Tensor pos_;    // [P, d]
  std::vector<Block> blocks_;
  Tensor head_;   // [V, d]
  std::vector<std::string> injection_points_;
  std::map<int, Adapter> adapters_;
};

}  // namespace xalma
