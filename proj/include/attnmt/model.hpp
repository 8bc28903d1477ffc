#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "attnmt/attention.hpp"
#include "attnmt/corpus.hpp"
#include "attnmt/lstm.hpp"
#include "attnmt/rng.hpp"
#include "attnmt/tensor.hpp"

namespace nmt {

// Hyperparameters that fix every tensor shape in the model. Embedding width
// equals the cell count n throughout.
struct ModelConfig {
  int source_vocab = 0;
  int target_vocab = 0;
  int layers = 2;
  int cells = 64;  // n
  bool use_attention = true;
  AttentionConfig attention;  // ignored when use_attention is false
  bool input_feeding = false;
  bool reverse_source = true;

  // Throws std::invalid_argument on nonsensical sizes or an invalid
  // attention configuration.
  void validate() const;

  // Decoder layer-0 input width: 2n with input feeding, else n.
  int decoder_input_dim() const {
    return input_feeding ? 2 * cells : cells;
  }
};

// Encoder-decoder translation model. All learnable state lives in the
// tensors reachable from parameters(); everything else is configuration.
struct NmtModel {
  ModelConfig config;
  Tensor src_embedding;       // [V_src x n]
  Tensor tgt_embedding;       // [V_tgt x n]
  StackedLstmParams encoder;  // layer-0 input width n
  StackedLstmParams decoder;  // layer-0 input width n or 2n
  AttentionParams attention;  // all tensors undefined for the base model
  Tensor w_s;                 // output projection [V_tgt x n]

  int cell_count() const { return config.cells; }
  int layer_count() const { return config.layers; }
  bool attentional() const { return config.use_attention; }

  // Name -> tensor registry in a fixed order (also the container order and
  // the parameter-draw order of init_model). Undefined attention tensors
  // are skipped. The Tensors share storage with the model.
  std::vector<std::pair<std::string, Tensor>> parameters() const;
};

// Every parameter uniform in [-0.1, 0.1], drawn in parameters() order, so a
// seed fully determines the model.
NmtModel init_model(const ModelConfig& config, Rng& rng);

struct EncodeResult {
  Tensor states;  // [S x n]: top-layer hidden per source position
  LstmState final_state;
};

// Runs the encoder over the source ids (terminator included). Training-time
// dropout is requested by passing the keep-probability complement p > 0 and
// an rng; masks are drawn per step per layer. Throws std::invalid_argument
// on an empty source.
EncodeResult encode(Tape& tape, const NmtModel& model,
                    const std::vector<int>& source_ids, double dropout_p = 0.0,
                    Rng* rng = nullptr);

struct StepOutput {
  Tensor log_probs;  // [V_tgt], normalized (logsumexp == 0)
  std::optional<AttentionOutput> attention;  // absent for the base model
  LstmState state;
  Tensor feed;  // h~_t, the next step's feed vector
};

// One decoder step. prev_feed must be a zero vector at t=0; with input
// feeding it is concatenated to the embedded previous token as layer-0
// input. Attention (if configured) runs on the top hidden state; otherwise
// h~_t is the top hidden itself. encoder_states is ignored by the base
// model apart from not being consulted.
StepOutput decode_step(Tape& tape, const NmtModel& model,
                       const LstmState& state, int prev_id,
                       const Tensor& prev_feed, const Tensor& encoder_states,
                       int t, double dropout_p = 0.0, Rng* rng = nullptr);

struct PairLoss {
  Tensor loss;      // scalar: summed negative log-likelihood over the pair
  long tokens = 0;  // predicted positions, terminator included
  std::vector<AttentionOutput> records;  // per step, when requested
};

// Teacher-forced loss for one sentence pair on the caller's tape: step t
// consumes the gold previous token (the terminator id at t=0) and the loss
// sums -log p(y_t) over every target position including the terminator.
PairLoss pair_loss(Tape& tape, const NmtModel& model, const SentencePair& pair,
                   double dropout_p = 0.0, Rng* rng = nullptr,
                   bool want_records = false);

struct SequenceLossResult {
  double loss = 0.0;  // summed over all pairs and positions
  long tokens = 0;
  // Per pair, per step; filled only when requested on an attentional model.
  std::vector<std::vector<AttentionOutput>> records;
};

// Loss over a whole batch, evaluated pair by pair (gradients are not kept;
// use pair_loss for training). Perplexity = exp(loss / tokens).
SequenceLossResult sequence_loss(const NmtModel& model, const Batch& batch,
                                 double dropout_p = 0.0, Rng* rng = nullptr,
                                 bool want_records = false);

// Serialize to a single file: text manifest (hyperparameters, gate order,
// parameter table with byte offsets) followed by the raw little-endian
// IEEE-754 doubles. Throws DataError on I/O failure.
void save_model(const NmtModel& model, const std::string& path);

// Rebuilds a model from a container file. Throws DataError on unreadable,
// corrupt, or dimensionally inconsistent input.
NmtModel load_model(const std::string& path);

}  // namespace nmt
