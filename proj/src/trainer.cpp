#include "attnmt/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "attnmt/errors.hpp"

namespace nmt {

void TrainerConfig::validate() const {
  if (epochs < 1) {
    throw std::invalid_argument("trainer config: need at least one epoch");
  }
  if (lr0 <= 0.0) {
    throw std::invalid_argument("trainer config: learning rate must be positive");
  }
  if (halve_after < 1 || halve_after >= epochs) {
    throw std::invalid_argument(
        "trainer config: halving must start strictly inside the epoch budget");
  }
  if (clip_norm <= 0.0) {
    throw std::invalid_argument("trainer config: clip norm must be positive");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("trainer config: batch size must be positive");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("trainer config: dropout must lie in [0, 1)");
  }
  if (max_len < 1) {
    throw std::invalid_argument("trainer config: length limit must be positive");
  }
}

TrainerConfig default_recipe(bool with_dropout) {
  TrainerConfig config;
  if (with_dropout) {
    config.epochs = 12;
    config.halve_after = 8;
    config.dropout = 0.2;
  }
  return config;
}

double lr_at(const TrainerConfig& config, int epoch) {
  if (epoch < 1 || epoch > config.epochs) {
    throw std::invalid_argument("lr_at: epoch outside the training schedule");
  }
  if (epoch <= config.halve_after) return config.lr0;
  return config.lr0 * std::pow(2.0, -(epoch - config.halve_after));
}

double clip_and_step(const std::vector<std::pair<std::string, Tensor>>& params,
                     double lr, double clip_norm) {
  if (clip_norm <= 0.0) {
    throw std::invalid_argument("clip_and_step: clip norm must be positive");
  }
  double sum_sq = 0.0;
  for (const auto& [name, p] : params) {
    if (!p.has_grad()) continue;
    const double* g = p.grad();
    for (int i = 0; i < p.size(); ++i) sum_sq += g[i] * g[i];
  }
  if (!std::isfinite(sum_sq)) {
    throw NumericError("gradient norm is not finite");
  }
  const double norm = std::sqrt(sum_sq);
  const double scale = norm > clip_norm ? clip_norm / norm : 1.0;
  for (const auto& [name, p] : params) {
    if (!p.has_grad()) continue;
    Tensor t = p;  // shares storage
    const double* g = t.grad();
    double* x = t.data();
    for (int i = 0; i < t.size(); ++i) x[i] -= lr * scale * g[i];
  }
  return norm;
}

std::pair<double, long> corpus_loss(const NmtModel& model,
                                    const std::vector<SentencePair>& pairs) {
  double loss = 0.0;
  long tokens = 0;
  for (const auto& pair : pairs) {
    Tape tape;  // forward only
    PairLoss pl = pair_loss(tape, model, pair);
    loss += pl.loss.value();
    tokens += pl.tokens;
  }
  return {loss, tokens};
}

TrainLog train(NmtModel& model, const std::vector<SentencePair>& train_pairs,
               const std::vector<SentencePair>& eval_pairs,
               const TrainerConfig& config) {
  config.validate();
  if (train_pairs.empty()) {
    throw std::invalid_argument("train: empty training corpus");
  }
  if (eval_pairs.empty()) {
    throw std::invalid_argument("train: empty held-out corpus");
  }

  Rng rng(config.seed);
  auto params = model.parameters();
  TrainLog log;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = lr_at(config, epoch);
    auto batches =
        make_batches(train_pairs, config.batch_size, config.max_len, rng);
    if (batches.empty()) {
      throw DataError("train: no pair survives the length limit of " +
                      std::to_string(config.max_len));
    }

    double epoch_loss = 0.0;
    long epoch_tokens = 0;
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& batch = batches[bi];
      for (const auto& [name, p] : params) p.zero_grad();
      const double grad_scale = 1.0 / static_cast<double>(batch.pairs.size());
      for (const auto& pair : batch.pairs) {
        Tape tape;
        PairLoss pl = pair_loss(tape, model, pair, config.dropout,
                                config.dropout > 0.0 ? &rng : nullptr);
        if (!std::isfinite(pl.loss.value())) {
          throw NumericError("train: non-finite loss in epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(bi));
        }
        tape.backward(pl.loss, grad_scale);
        epoch_loss += pl.loss.value();
        epoch_tokens += pl.tokens;
      }
      try {
        clip_and_step(params, lr, config.clip_norm);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(bi) + ")");
      }
    }

    const auto [eval_loss, eval_tokens] = corpus_loss(model, eval_pairs);
    EpochRecord record;
    record.epoch = epoch;
    record.loss = epoch_loss / static_cast<double>(epoch_tokens);
    record.ln_ppl = eval_loss / static_cast<double>(eval_tokens);
    record.ppl = std::exp(record.ln_ppl);
    record.lr = lr;
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    log.epochs.push_back(record);

    if (!config.checkpoint_dir.empty()) {
      const std::string base = config.checkpoint_dir + "/";
      save_model(model, base + "epoch_" + std::to_string(epoch) + ".bin");
      save_model(model, base + "latest.bin");
    }
  }
  return log;
}

void write_train_log(const TrainLog& log, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write training log: " + path);
  os << "epoch\tloss\tppl\tln_ppl\tlr\tseconds\n";
  char buf[160];
  for (const auto& r : log.epochs) {
    std::snprintf(buf, sizeof buf, "%d\t%.17g\t%.17g\t%.17g\t%.17g\t%.3f\n",
                  r.epoch, r.loss, r.ppl, r.ln_ppl, r.lr, r.seconds);
    os << buf;
  }
  os.flush();
  if (!os) throw DataError("failed writing training log: " + path);
}

}  // namespace nmt
