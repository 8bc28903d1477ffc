#include "attnmt/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "attnmt/ops.hpp"

namespace nmt {

namespace {

Tensor uniform_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t.ref(i) = rng.uniform(-0.1, 0.1);
  return t;
}

// Content scores of h_t against every row of hbar, as one [rows] tensor.
Tensor content_scores(Tape& tape, const Tensor& h_t, const Tensor& hbar,
                      const AttentionParams& params, ScoreKind kind) {
  switch (kind) {
    case ScoreKind::dot:
      return ops::matvec(tape, hbar, h_t);
    case ScoreKind::general:
      // score(s) = h_t^T W_a hbar_s = row_s(hbar W_a^T) . h_t
      return ops::matvec(tape, ops::matmul_nt(tape, hbar, params.w_a), h_t);
    case ScoreKind::concat: {
      // score(s) = v_a . tanh(W_a [h_t; hbar_s])
      Tensor joined = ops::concat(
          tape, ops::broadcast_rows(tape, h_t, hbar.dim(0)), hbar, 1);
      Tensor hidden = ops::tanh(tape, ops::matmul_nt(tape, joined, params.w_a));
      return ops::matvec(tape, hidden, params.v_a);
    }
    case ScoreKind::location:
      break;
  }
  throw std::invalid_argument(
      "location scores are not defined for a single source state");
}

Tensor combine(Tape& tape, const Tensor& context, const Tensor& h_t,
               const AttentionParams& params) {
  return ops::tanh(
      tape, ops::matvec(tape, params.w_c, ops::concat(tape, context, h_t)));
}

}  // namespace

std::string mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::global: return "global";
    case Mechanism::local_m: return "local-m";
    case Mechanism::local_p: return "local-p";
  }
  return "?";
}

std::string score_name(ScoreKind k) {
  switch (k) {
    case ScoreKind::dot: return "dot";
    case ScoreKind::general: return "general";
    case ScoreKind::concat: return "concat";
    case ScoreKind::location: return "location";
  }
  return "?";
}

Mechanism parse_mechanism(const std::string& name) {
  if (name == "global") return Mechanism::global;
  if (name == "local-m" || name == "local_m") return Mechanism::local_m;
  if (name == "local-p" || name == "local_p") return Mechanism::local_p;
  throw std::invalid_argument("unknown attention mechanism: " + name);
}

ScoreKind parse_score(const std::string& name) {
  if (name == "dot") return ScoreKind::dot;
  if (name == "general") return ScoreKind::general;
  if (name == "concat") return ScoreKind::concat;
  if (name == "location") return ScoreKind::location;
  throw std::invalid_argument("unknown score function: " + name);
}

void AttentionConfig::validate() const {
  const bool local =
      mechanism == Mechanism::local_m || mechanism == Mechanism::local_p;
  if (local && score == ScoreKind::location) {
    throw std::invalid_argument(
        "local attention uses content scores only; the location score is "
        "restricted to the global mechanism");
  }
  if (local && window < 1) {
    throw std::invalid_argument("local attention needs a window radius >= 1");
  }
  if (score == ScoreKind::location && max_source_len < 1) {
    throw std::invalid_argument(
        "the location score needs max_source_len >= 1");
  }
}

AttentionParams init_attention(const AttentionConfig& config, int n,
                               Rng& rng) {
  config.validate();
  AttentionParams params;
  switch (config.score) {
    case ScoreKind::dot:
      break;
    case ScoreKind::general:
      params.w_a = uniform_tensor({n, n}, rng);
      break;
    case ScoreKind::concat:
      params.w_a = uniform_tensor({n, 2 * n}, rng);
      params.v_a = uniform_tensor({n}, rng);
      break;
    case ScoreKind::location:
      params.w_a = uniform_tensor({config.max_source_len, n}, rng);
      break;
  }
  params.w_c = uniform_tensor({n, 2 * n}, rng);
  if (config.mechanism == Mechanism::local_p) {
    params.w_p = uniform_tensor({n, n}, rng);
    params.v_p = uniform_tensor({n}, rng);
  }
  return params;
}

Tensor score_one(Tape& tape, const Tensor& h_t, const Tensor& hbar_s,
                 const AttentionParams& params, ScoreKind kind) {
  switch (kind) {
    case ScoreKind::dot:
      return ops::dot(tape, h_t, hbar_s);
    case ScoreKind::general:
      return ops::dot(tape, h_t, ops::matvec(tape, params.w_a, hbar_s));
    case ScoreKind::concat:
      return ops::dot(
          tape, params.v_a,
          ops::tanh(tape, ops::matvec(tape, params.w_a,
                                      ops::concat(tape, h_t, hbar_s))));
    case ScoreKind::location:
      break;
  }
  throw std::invalid_argument(
      "score_one handles content score kinds only (dot, general, concat)");
}

AttentionOutput global_attend(Tape& tape, const Tensor& h_t,
                              const Tensor& hbar,
                              const AttentionParams& params,
                              const AttentionConfig& config,
                              const std::vector<int>* source_mask) {
  const int s_count = hbar.dim(0);
  AttentionOutput out;
  out.window_lo = 0;
  out.window_hi = s_count;

  if (config.score == ScoreKind::location) {
    // Position logits come from the target state alone, at a fixed length;
    // positions past the sentence (or past the fixed length) get no weight.
    const int active = std::min(s_count, config.max_source_len);
    Tensor logits = ops::matvec(tape, params.w_a, h_t);
    std::vector<int> valid;
    if (source_mask != nullptr) {
      for (int i : *source_mask) {
        if (i < active) valid.push_back(i);
      }
      if (valid.empty()) {
        throw std::invalid_argument(
            "location score: no maskable source position falls inside the "
            "fixed logit range");
      }
    } else {
      valid.resize(static_cast<size_t>(active));
      for (int i = 0; i < active; ++i) valid[static_cast<size_t>(i)] = i;
    }
    Tensor a_fixed = ops::softmax(tape, logits, &valid);
    Tensor a_active =
        active < a_fixed.dim(0) ? ops::slice(tape, a_fixed, 0, active)
                                : a_fixed;
    Tensor hbar_active =
        active < s_count ? ops::row_block(tape, hbar, 0, active) : hbar;
    out.context = ops::matvec_t(tape, hbar_active, a_active);
    out.attn_hidden = combine(tape, out.context, h_t, params);
    out.weights.assign(static_cast<size_t>(s_count), 0.0);
    for (int i = 0; i < active; ++i) {
      out.weights[static_cast<size_t>(i)] = a_active.at(i);
    }
    return out;
  }

  Tensor scores = content_scores(tape, h_t, hbar, params, config.score);
  Tensor a = ops::softmax(tape, scores, source_mask);
  out.context = ops::matvec_t(tape, hbar, a);
  out.attn_hidden = combine(tape, out.context, h_t, params);
  out.weights.assign(a.data(), a.data() + s_count);
  return out;
}

AttentionOutput local_attend(Tape& tape, const Tensor& h_t, const Tensor& hbar,
                             const AttentionParams& params,
                             const AttentionConfig& config, int t) {
  const int s_count = hbar.dim(0);
  const int radius = config.window;

  int center = 0;
  Tensor aligned;  // single-element tensor, local_p only
  double aligned_value = -1.0;
  if (config.mechanism == Mechanism::local_m) {
    center = std::clamp(t, 0, s_count - 1);
  } else {
    // p_t = S * sigmoid(v_p . tanh(W_p h_t)), a real position in [0, S].
    aligned = ops::scale(
        tape,
        ops::sigmoid(tape,
                     ops::dot(tape, params.v_p,
                              ops::tanh(tape, ops::matvec(tape, params.w_p,
                                                          h_t)))),
        static_cast<double>(s_count));
    aligned_value = aligned.value();
    // Window centered on the rounded position; rounding is not part of the
    // differentiable path (the Gaussian below is).
    center = std::clamp(static_cast<int>(std::floor(aligned_value + 0.5)), 0,
                        s_count - 1);
  }

  const int lo = std::max(0, center - radius);
  const int hi = std::min(s_count - 1, center + radius);  // inclusive
  Tensor hbar_window =
      (lo == 0 && hi == s_count - 1) ? hbar
                                     : ops::row_block(tape, hbar, lo, hi + 1);
  Tensor scores = content_scores(tape, h_t, hbar_window, params, config.score);
  Tensor a_window = ops::softmax(tape, scores);

  AttentionOutput out;
  out.window_lo = lo;
  out.window_hi = hi + 1;
  out.weights.assign(static_cast<size_t>(s_count), 0.0);
  out.window_softmax.assign(static_cast<size_t>(s_count), 0.0);
  for (int i = 0; i < a_window.dim(0); ++i) {
    out.window_softmax[static_cast<size_t>(lo + i)] = a_window.at(i);
  }

  Tensor a_final = a_window;
  if (config.mechanism == Mechanism::local_p) {
    const double sigma = static_cast<double>(radius) / 2.0;
    a_final = ops::gaussian_window(tape, a_window, aligned, lo, sigma);
    out.aligned_pos = aligned_value;
  }
  for (int i = 0; i < a_final.dim(0); ++i) {
    out.weights[static_cast<size_t>(lo + i)] = a_final.at(i);
  }
  out.context = ops::matvec_t(tape, hbar_window, a_final);
  out.attn_hidden = combine(tape, out.context, h_t, params);
  return out;
}

AttentionOutput attend(Tape& tape, const Tensor& h_t, const Tensor& hbar,
                       const AttentionParams& params,
                       const AttentionConfig& config, int t) {
  if (config.mechanism == Mechanism::global) {
    return global_attend(tape, h_t, hbar, params, config, nullptr);
  }
  return local_attend(tape, h_t, hbar, params, config, t);
}

}  // namespace nmt
