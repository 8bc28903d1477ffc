#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "attnmt/corpus.hpp"
#include "attnmt/model.hpp"
#include "attnmt/tensor.hpp"

namespace nmt {

// Plain-SGD recipe: fixed learning rate that starts halving every epoch
// after a warm phase, with joint global-norm gradient clipping.
struct TrainerConfig {
  int epochs = 10;
  double lr0 = 1.0;
  int halve_after = 5;  // last epoch that still uses lr0
  double clip_norm = 5.0;
  int batch_size = 128;
  double dropout = 0.0;  // 0 disables dropout entirely
  std::uint64_t seed = 1;
  int max_len = 50;  // drop training pairs longer than this on either side
  std::string checkpoint_dir;  // empty: no checkpoints written

  // Throws std::invalid_argument when a field is out of range or the
  // halving point is not strictly inside the epoch budget.
  void validate() const;
};

// The stock settings: 10 epochs halving after 5; the dropout variant runs
// 12 epochs, halves after 8, and drops at p = 0.2.
TrainerConfig default_recipe(bool with_dropout);

// Learning rate for a 1-based epoch: lr0 through halve_after, then halved
// every epoch. Throws std::invalid_argument outside [1, epochs].
double lr_at(const TrainerConfig& config, int epoch);

// Scales every gradient by clip_norm/norm when the joint global L2 norm
// exceeds clip_norm, then applies theta -= lr * grad to every parameter.
// Parameters without an allocated gradient buffer count as zero gradient.
// Returns the pre-clip norm. Throws NumericError on a non-finite gradient.
double clip_and_step(const std::vector<std::pair<std::string, Tensor>>& params,
                     double lr, double clip_norm);

struct EpochRecord {
  int epoch = 0;       // 1-based
  double loss = 0.0;   // mean per-token training loss over the epoch
  double ppl = 0.0;    // held-out perplexity, dropout off
  double ln_ppl = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

// Summed negative log-likelihood and token count over a corpus, dropout
// off. Perplexity = exp(loss / tokens).
std::pair<double, long> corpus_loss(const NmtModel& model,
                                    const std::vector<SentencePair>& pairs);

// The full loop: per epoch, re-batch and shuffle, run teacher-forced
// forward/backward per pair (gradients averaged over the batch), clip and
// step per batch, then evaluate held-out perplexity. Writes one container
// per epoch plus "latest.bin" when checkpoint_dir is set. Deterministic
// given the seed. Throws DataError when no pair survives the length filter
// and NumericError (with epoch/batch context) on non-finite loss.
TrainLog train(NmtModel& model, const std::vector<SentencePair>& train_pairs,
               const std::vector<SentencePair>& eval_pairs,
               const TrainerConfig& config);

// Tab-separated table, one row per epoch: epoch, loss, ppl, ln_ppl, lr,
// seconds. Numbers carry full precision; all columns except seconds are
// reproducible bit for bit from the same seed.
void write_train_log(const TrainLog& log, const std::string& path);

}  // namespace nmt
