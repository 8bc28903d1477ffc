#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnmt/errors.hpp"
#include "attnmt/model.hpp"
#include "attnmt/trainer.hpp"

using nmt::Batch;
using nmt::DataError;
using nmt::kEosId;
using nmt::Mechanism;
using nmt::ModelConfig;
using nmt::NmtModel;
using nmt::NumericError;
using nmt::Rng;
using nmt::ScoreKind;
using nmt::SentencePair;
using nmt::Tape;
using nmt::Tensor;
using nmt::TrainerConfig;
using nmt::TrainLog;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::path("/tmp") /
           ("attnmt_trainer_" + std::to_string(getpid()) + "_" + tag + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

SentencePair make_pair(std::vector<int> source, std::vector<int> target) {
  SentencePair pair;
  pair.source_ids = std::move(source);
  pair.target_ids = std::move(target);
  return pair;
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.source_vocab = 7;
  cfg.target_vocab = 7;
  cfg.layers = 1;
  cfg.cells = 12;
  cfg.use_attention = true;
  cfg.attention.mechanism = Mechanism::global;
  cfg.attention.score = ScoreKind::dot;
  return cfg;
}

// Identity-copy corpus over ids 2..6: the model must learn to echo.
std::vector<SentencePair> copy_corpus(int count, Rng& rng) {
  std::vector<SentencePair> pairs;
  for (int i = 0; i < count; ++i) {
    const int len = 2 + static_cast<int>(rng.below(3));
    std::vector<int> words;
    for (int k = 0; k < len; ++k) {
      words.push_back(2 + static_cast<int>(rng.below(5)));
    }
    std::vector<int> source = words;
    source.push_back(kEosId);
    std::vector<int> target = words;
    target.push_back(kEosId);
    pairs.push_back(make_pair(std::move(source), std::move(target)));
  }
  return pairs;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("trainer configuration rejects nonsense") {
  TrainerConfig c;
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainerConfig{};
  c.halve_after = 10;  // not strictly inside 10 epochs
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainerConfig{};
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainerConfig{};
  c.clip_norm = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_NOTHROW(TrainerConfig{}.validate());
  CHECK_NOTHROW(nmt::default_recipe(true).validate());
}

TEST_CASE("learning-rate schedule halves after the warm phase") {
  const TrainerConfig plain = nmt::default_recipe(false);
  for (int epoch = 1; epoch <= 5; ++epoch) {
    CHECK(nmt::lr_at(plain, epoch) == 1.0);
  }
  CHECK(nmt::lr_at(plain, 6) == 0.5);
  CHECK(nmt::lr_at(plain, 7) == 0.25);
  CHECK(nmt::lr_at(plain, 8) == 0.125);
  CHECK(nmt::lr_at(plain, 10) == 1.0 / 32.0);
  CHECK_THROWS_AS(nmt::lr_at(plain, 0), std::invalid_argument);
  CHECK_THROWS_AS(nmt::lr_at(plain, 11), std::invalid_argument);

  const TrainerConfig dropped = nmt::default_recipe(true);
  CHECK(dropped.epochs == 12);
  CHECK(dropped.dropout == 0.2);
  CHECK(nmt::lr_at(dropped, 8) == 1.0);
  CHECK(nmt::lr_at(dropped, 9) == 0.5);
  CHECK(nmt::lr_at(dropped, 12) == 1.0 / 16.0);
}

TEST_CASE("clipping rescales to the threshold and steps against the gradient") {
  Tensor a(std::vector<int>{2});
  a.ref(0) = 1.0;
  a.ref(1) = 2.0;
  Tensor b(std::vector<int>{1});
  b.ref(0) = 3.0;
  std::vector<std::pair<std::string, Tensor>> params = {{"a", a}, {"b", b}};

  SUBCASE("norm over the threshold lands exactly on it") {
    a.grad()[0] = 6.0;
    a.grad()[1] = 0.0;
    b.grad()[0] = 8.0;  // joint norm 10
    const double norm = nmt::clip_and_step(params, 1.0, 5.0);
    CHECK(norm == 10.0);
    // Effective step is clip_norm/norm * grad = [3, 0, 4]; post-clip norm 5.
    CHECK(a.at(0) == 1.0 - 3.0);
    CHECK(a.at(1) == 2.0);
    CHECK(b.at(0) == 3.0 - 4.0);
  }

  SUBCASE("norm under the threshold is untouched") {
    a.grad()[0] = 0.3;
    a.grad()[1] = 0.4;  // norm 0.5
    const double norm = nmt::clip_and_step(params, 2.0, 5.0);
    CHECK(norm == 0.5);
    CHECK(a.at(0) == 1.0 - 2.0 * 0.3);
    CHECK(a.at(1) == 2.0 - 2.0 * 0.4);
    CHECK(b.at(0) == 3.0);
  }

  SUBCASE("zero gradient leaves parameters alone") {
    nmt::clip_and_step(params, 1.0, 5.0);
    CHECK(a.at(0) == 1.0);
    CHECK(a.at(1) == 2.0);
    CHECK(b.at(0) == 3.0);
  }

  SUBCASE("non-finite gradients are refused") {
    a.grad()[0] = std::nan("");
    CHECK_THROWS_AS(nmt::clip_and_step(params, 1.0, 5.0), NumericError);
  }

  SUBCASE("post-clip norm never exceeds the threshold") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      a.zero_grad();
      b.zero_grad();
      const double span = std::exp(rng.uniform(-3.0, 6.0));
      for (int i = 0; i < 2; ++i) a.grad()[i] = rng.uniform(-span, span);
      b.grad()[0] = rng.uniform(-span, span);
      const double before[3] = {a.at(0), a.at(1), b.at(0)};
      nmt::clip_and_step(params, 1.0, 5.0);
      const double dx0 = before[0] - a.at(0);
      const double dx1 = before[1] - a.at(1);
      const double dx2 = before[2] - b.at(0);
      const double post = std::sqrt(dx0 * dx0 + dx1 * dx1 + dx2 * dx2);
      CHECK(post <= 5.0 + 1e-9);
    }
  }
}

TEST_CASE("one small step decreases a single example's loss") {
  ModelConfig cfg = tiny_config();
  Rng rng(5);
  NmtModel model = nmt::init_model(cfg, rng);
  SentencePair pair = make_pair({3, 5, 2, kEosId}, {4, 6, kEosId});
  auto params = model.parameters();
  for (int step = 0; step < 3; ++step) {
    Tape tape;
    const double before = [&] {
      Tape t;
      return nmt::pair_loss(t, model, pair).loss.value();
    }();
    for (const auto& [name, p] : params) p.zero_grad();
    auto pl = nmt::pair_loss(tape, model, pair);
    tape.backward(pl.loss, 1.0);
    nmt::clip_and_step(params, 1e-3, 5.0);
    Tape t2;
    const double after = nmt::pair_loss(t2, model, pair).loss.value();
    CHECK(after < before);
  }
}

TEST_CASE("the loop trains, logs, checkpoints, and repeats bit for bit") {
  Rng corpus_rng(7);
  auto train_pairs = copy_corpus(24, corpus_rng);
  auto eval_pairs = copy_corpus(8, corpus_rng);

  TrainerConfig tc;
  tc.epochs = 4;
  tc.halve_after = 2;
  tc.batch_size = 6;
  tc.seed = 11;
  tc.max_len = 10;

  TempDir dir("loop");
  tc.checkpoint_dir = dir.str();

  Rng ma(21);
  NmtModel model = nmt::init_model(tiny_config(), ma);
  TrainLog log = nmt::train(model, train_pairs, eval_pairs, tc);

  REQUIRE(log.epochs.size() == 4);
  for (int e = 0; e < 4; ++e) {
    const auto& r = log.epochs[static_cast<size_t>(e)];
    CHECK(r.epoch == e + 1);
    CHECK(r.lr == nmt::lr_at(tc, e + 1));
    CHECK(std::isfinite(r.loss));
    CHECK(r.ppl > 1.0);
    CHECK(r.ln_ppl == doctest::Approx(std::log(r.ppl)).epsilon(1e-12));
    CHECK(r.seconds >= 0.0);
    CHECK(std::filesystem::exists(dir.path /
                                  ("epoch_" + std::to_string(e + 1) + ".bin")));
  }
  // The latest checkpoint is the final epoch, byte for byte.
  CHECK(read_file(dir.str() + "/latest.bin") ==
        read_file(dir.str() + "/epoch_4.bin"));
  // Learning happened on the copy task.
  CHECK(log.epochs.back().ppl < log.epochs.front().ppl);

  // Identical seeds reproduce the run exactly; a different seed does not.
  Rng mb(21), mc(21);
  NmtModel twin = nmt::init_model(tiny_config(), mb);
  TrainerConfig tc2 = tc;
  tc2.checkpoint_dir.clear();
  TrainLog replay = nmt::train(twin, train_pairs, eval_pairs, tc2);
  REQUIRE(replay.epochs.size() == log.epochs.size());
  for (size_t e = 0; e < log.epochs.size(); ++e) {
    CHECK(replay.epochs[e].loss == log.epochs[e].loss);
    CHECK(replay.epochs[e].ppl == log.epochs[e].ppl);
    CHECK(replay.epochs[e].lr == log.epochs[e].lr);
  }
  TempDir twin_dir("twin");
  nmt::save_model(twin, twin_dir.str() + "/final.bin");
  CHECK(read_file(twin_dir.str() + "/final.bin") ==
        read_file(dir.str() + "/latest.bin"));

  NmtModel other = nmt::init_model(tiny_config(), mc);
  TrainerConfig tc3 = tc2;
  tc3.seed = 12;
  TrainLog different = nmt::train(other, train_pairs, eval_pairs, tc3);
  CHECK(different.epochs.back().loss != log.epochs.back().loss);
}

TEST_CASE("dropout training stays deterministic under the same seed") {
  Rng corpus_rng(17);
  auto train_pairs = copy_corpus(12, corpus_rng);
  auto eval_pairs = copy_corpus(4, corpus_rng);
  TrainerConfig tc;
  tc.epochs = 2;
  tc.halve_after = 1;
  tc.batch_size = 4;
  tc.dropout = 0.2;
  tc.seed = 31;

  Rng ma(41), mb(41);
  NmtModel a = nmt::init_model(tiny_config(), ma);
  NmtModel b = nmt::init_model(tiny_config(), mb);
  TrainLog la = nmt::train(a, train_pairs, eval_pairs, tc);
  TrainLog lb = nmt::train(b, train_pairs, eval_pairs, tc);
  REQUIRE(la.epochs.size() == lb.epochs.size());
  for (size_t e = 0; e < la.epochs.size(); ++e) {
    CHECK(la.epochs[e].loss == lb.epochs[e].loss);
    CHECK(la.epochs[e].ppl == lb.epochs[e].ppl);
  }
}

TEST_CASE("training aborts with context when the loss turns non-finite") {
  Rng corpus_rng(19);
  auto train_pairs = copy_corpus(6, corpus_rng);
  auto eval_pairs = copy_corpus(2, corpus_rng);
  Rng mr(43);
  NmtModel model = nmt::init_model(tiny_config(), mr);
  model.encoder.layers[0].w_x.ref(0) = std::nan("");

  TrainerConfig tc;
  tc.epochs = 2;
  tc.halve_after = 1;
  tc.batch_size = 3;
  try {
    nmt::train(model, train_pairs, eval_pairs, tc);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string what = e.what();
    CHECK(what.find("epoch") != std::string::npos);
    CHECK(what.find("batch") != std::string::npos);
  }
}

TEST_CASE("training requires data on both sides") {
  Rng corpus_rng(23);
  auto pairs = copy_corpus(4, corpus_rng);
  Rng mr(47);
  NmtModel model = nmt::init_model(tiny_config(), mr);
  TrainerConfig tc;
  tc.epochs = 2;
  tc.halve_after = 1;
  CHECK_THROWS_AS(nmt::train(model, {}, pairs, tc), std::invalid_argument);
  CHECK_THROWS_AS(nmt::train(model, pairs, {}, tc), std::invalid_argument);

  // A length limit nobody survives is a data error, not a silent no-op.
  TrainerConfig strict = tc;
  strict.max_len = 1;
  CHECK_THROWS_AS(nmt::train(model, pairs, pairs, strict), DataError);
}

TEST_CASE("the training log lands on disk as a six-column table") {
  TrainLog log;
  for (int e = 1; e <= 2; ++e) {
    nmt::EpochRecord r;
    r.epoch = e;
    r.loss = 1.5 / e;
    r.ppl = std::exp(1.0 / e);
    r.ln_ppl = 1.0 / e;
    r.lr = e == 1 ? 1.0 : 0.5;
    r.seconds = 0.25 * e;
    log.epochs.push_back(r);
  }
  TempDir dir("log");
  const std::string path = dir.str() + "/train_log.tsv";
  nmt::write_train_log(log, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch\tloss\tppl\tln_ppl\tlr\tseconds");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    int epoch;
    double loss, ppl, ln_ppl, lr, seconds;
    REQUIRE((ss >> epoch >> loss >> ppl >> ln_ppl >> lr >> seconds));
    ++rows;
    CHECK(epoch == rows);
    CHECK(loss == log.epochs[static_cast<size_t>(rows - 1)].loss);
    CHECK(lr == log.epochs[static_cast<size_t>(rows - 1)].lr);
  }
  CHECK(rows == 2);
  CHECK_THROWS_AS(nmt::write_train_log(log, "/nonexistent/dir/x.tsv"),
                  DataError);
}
