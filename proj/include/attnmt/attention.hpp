#pragma once

#include <string>
#include <vector>

#include "attnmt/rng.hpp"
#include "attnmt/tensor.hpp"

namespace nmt {

// Which source positions a decoding step may look at.
enum class Mechanism { global, local_m, local_p };
// How a target hidden state is compared with a source hidden state. The
// location kind scores positions from the target state alone.
enum class ScoreKind { dot, general, concat, location };

std::string mechanism_name(Mechanism m);
std::string score_name(ScoreKind k);
Mechanism parse_mechanism(const std::string& name);
ScoreKind parse_score(const std::string& name);

struct AttentionConfig {
  Mechanism mechanism = Mechanism::global;
  ScoreKind score = ScoreKind::dot;
  int window = 10;          // D: radius of the local window
  int max_source_len = 50;  // fixed logit length for the location score

  // Throws std::invalid_argument for contradictory settings: local
  // mechanisms take content scores only and need window >= 1; the location
  // score needs max_source_len >= 1.
  void validate() const;
};

// Only the tensors the config demands are defined; the rest stay empty.
struct AttentionParams {
  Tensor w_a;  // general: [n x n]; concat: [n x 2n]; location: [S_max x n]
  Tensor v_a;  // concat: [n]
  Tensor w_c;  // [n x 2n], always present
  Tensor w_p;  // local_p: [n x n]
  Tensor v_p;  // local_p: [n]
};

AttentionParams init_attention(const AttentionConfig& config, int n, Rng& rng);

struct AttentionOutput {
  // One weight per source position; exactly 0 outside the window/mask.
  std::vector<double> weights;
  // For local mechanisms, the window-softmax weights before any Gaussian
  // reweighting, indexed like `weights` (empty for global).
  std::vector<double> window_softmax;
  Tensor context;      // [n]
  Tensor attn_hidden;  // [n]
  double aligned_pos = -1.0;        // p_t, set for local_p
  int window_lo = 0, window_hi = 0;  // active range [lo, hi)
};

// Score for one (target, source) state pair; content kinds only.
Tensor score_one(Tape& tape, const Tensor& h_t, const Tensor& hbar_s,
                 const AttentionParams& params, ScoreKind kind);

// Attention over all S source states (rows of hbar). source_mask, when
// non-null, lists the positions allowed to receive weight.
AttentionOutput global_attend(Tape& tape, const Tensor& h_t,
                              const Tensor& hbar,
                              const AttentionParams& params,
                              const AttentionConfig& config,
                              const std::vector<int>* source_mask = nullptr);

// Windowed attention. For local_m the window centers on target step t; for
// local_p the model predicts the center from h_t and the window softmax is
// multiplied by an (unnormalized) Gaussian around that predicted position.
AttentionOutput local_attend(Tape& tape, const Tensor& h_t, const Tensor& hbar,
                             const AttentionParams& params,
                             const AttentionConfig& config, int t);

// Dispatch on config.mechanism.
AttentionOutput attend(Tape& tape, const Tensor& h_t, const Tensor& hbar,
                       const AttentionParams& params,
                       const AttentionConfig& config, int t);

}  // namespace nmt
