// Command-line front end: vocabulary building, training, translation,
// alignment extraction, scoring, and heatmap rendering. One subcommand per
// process; exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnmt/attention.hpp"
#include "attnmt/corpus.hpp"
#include "attnmt/decoding.hpp"
#include "attnmt/errors.hpp"
#include "attnmt/heatmap.hpp"
#include "attnmt/metrics.hpp"
#include "attnmt/model.hpp"
#include "attnmt/trainer.hpp"
#include "attnmt/vocab.hpp"

namespace {

using nmt::AlignmentDumpEntry;
using nmt::AlignmentMatrix;
using nmt::DataError;
using nmt::ModelConfig;
using nmt::NmtModel;
using nmt::NumericError;
using nmt::Vocabulary;

// Everything a run can be told, across all subcommands; each subcommand
// binds the subset it uses. Defaults follow the stock large-scale recipe
// (4 layers of 1000 cells, batch 128, lr 1.0 halving after epoch 5, clip
// 5.0, length filter 50, reversed source); toy runs override on the
// command line or in the config file.
struct RunConfig {
  std::string out_dir;

  // data
  std::string corpus;
  std::string train_src, train_tgt, eval_src, eval_tgt;
  std::string src_vocab_path, tgt_vocab_path;
  std::string model_path, input_path;
  std::string src_path, tgt_path;
  std::string candidates_path, references_path, sources_path;
  std::string predicted_path, gold_path;
  std::string weights_path;
  int max_size = 50000;

  // model
  int layers = 4;
  int cells = 1000;
  std::string mechanism = "global";  // or local-m, local-p, none
  std::string score = "dot";
  int window = 10;
  bool input_feeding = false;
  bool reverse_source = true;

  // training
  int epochs = 10;
  double lr0 = 1.0;
  int halve_after = 5;
  double clip_norm = 5.0;
  int batch_size = 128;
  double dropout = 0.0;
  std::uint64_t seed = 1;
  int max_len = 50;

  // decoding
  int max_words = 50;
  bool replace_unk = false;
  bool dump_alignments = false;

  // reporting / plotting
  std::string edges = "10,20,30,40,50";
  int cell_size = 16;
  bool svg = false;

  std::string config_file;  // handled before parsing; never echoed
};

std::string trim(const std::string& s) {
  std::size_t first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  std::size_t last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

// Flat key=value config file -> "--key=value" tokens. Blank lines and
// #-comments are skipped; surrounding quotes on values are stripped. The
// caller injects the tokens ahead of the explicit command-line flags, so
// flags win through the take-last option policy.
std::vector<std::string> load_config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file: " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
    std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected key=value");
    }
    std::string key = trim(entry.substr(0, eq));
    std::string value = trim(entry.substr(eq + 1));
    if (key == "config") {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": config files cannot chain other config files");
    }
    if (value.size() >= 2 &&
        ((value.front() == '"' && value.back() == '"') ||
         (value.front() == '\'' && value.back() == '\''))) {
      value = value.substr(1, value.size() - 2);
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::vector<int> parse_edges(const std::string& spec) {
  std::vector<int> edges;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    std::string piece =
        trim(spec.substr(start, comma == std::string::npos
                                    ? std::string::npos
                                    : comma - start));
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(piece, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad --edges entry: '" + piece + "'");
    }
    if (used != piece.size()) {
      throw std::invalid_argument("bad --edges entry: '" + piece + "'");
    }
    edges.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return edges;
}

std::filesystem::path out_path(const RunConfig& rc, const std::string& name) {
  return std::filesystem::path(rc.out_dir) / name;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string line;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) line += ' ';
    line += tokens[i];
  }
  return line;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

Vocabulary load_vocab_for_model(const std::string& path, int expected,
                                const char* side) {
  Vocabulary vocab = Vocabulary::load(path);
  if (vocab.size() != expected) {
    throw DataError(std::string(side) + " vocabulary " + path + " has " +
                    std::to_string(vocab.size()) +
                    " tokens but the model expects " +
                    std::to_string(expected));
  }
  return vocab;
}

ModelConfig model_config_from(const RunConfig& rc, int source_vocab,
                              int target_vocab) {
  ModelConfig config;
  config.source_vocab = source_vocab;
  config.target_vocab = target_vocab;
  config.layers = rc.layers;
  config.cells = rc.cells;
  config.input_feeding = rc.input_feeding;
  config.reverse_source = rc.reverse_source;
  if (rc.mechanism == "none") {
    config.use_attention = false;
  } else {
    config.use_attention = true;
    config.attention.mechanism = nmt::parse_mechanism(rc.mechanism);
    config.attention.score = nmt::parse_score(rc.score);
    config.attention.window = rc.window;
    // The location score needs room for the longest surviving source plus
    // its terminator.
    config.attention.max_source_len = rc.max_len + 1;
  }
  config.validate();
  return config;
}

std::string format_train_log(const nmt::TrainLog& log) {
  std::string table = "epoch\tloss\tppl\tln_ppl\tlr\tseconds\n";
  char buf[256];
  for (const auto& r : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6f\t%.17g\t%.3f\n",
                  r.epoch, r.loss, r.ppl, r.ln_ppl, r.lr, r.seconds);
    table += buf;
  }
  return table;
}

void run_build_vocab(const RunConfig& rc) {
  Vocabulary vocab = Vocabulary::build(rc.corpus, rc.max_size);
  std::filesystem::path path = out_path(rc, "vocab.txt");
  vocab.save(path.string());
  std::cout << "wrote vocabulary (" << vocab.size() << " tokens) to " << path
            << "\n";
}

void run_train(const RunConfig& rc) {
  Vocabulary src_vocab = Vocabulary::load(rc.src_vocab_path);
  Vocabulary tgt_vocab = Vocabulary::load(rc.tgt_vocab_path);
  auto train_pairs = nmt::read_parallel_corpus(
      rc.train_src, rc.train_tgt, src_vocab, tgt_vocab, rc.reverse_source);
  auto eval_pairs = nmt::read_parallel_corpus(rc.eval_src, rc.eval_tgt,
                                              src_vocab, tgt_vocab,
                                              rc.reverse_source);
  if (train_pairs.empty()) throw DataError("training corpus is empty");
  if (eval_pairs.empty()) throw DataError("evaluation corpus is empty");

  ModelConfig config =
      model_config_from(rc, src_vocab.size(), tgt_vocab.size());
  nmt::TrainerConfig trainer;
  trainer.epochs = rc.epochs;
  trainer.lr0 = rc.lr0;
  trainer.halve_after = rc.halve_after;
  trainer.clip_norm = rc.clip_norm;
  trainer.batch_size = rc.batch_size;
  trainer.dropout = rc.dropout;
  trainer.seed = rc.seed;
  trainer.max_len = rc.max_len;
  trainer.checkpoint_dir = rc.out_dir;
  trainer.validate();

  nmt::Rng init_rng(rc.seed);
  NmtModel model = nmt::init_model(config, init_rng);
  nmt::TrainLog log = nmt::train(model, train_pairs, eval_pairs, trainer);
  nmt::write_train_log(log, out_path(rc, "train_log.tsv").string());
  std::cout << format_train_log(log);
  std::cout << "checkpoints and train_log.tsv in " << rc.out_dir << "\n";
}

void run_translate(const RunConfig& rc) {
  NmtModel model = nmt::load_model(rc.model_path);
  Vocabulary src_vocab = load_vocab_for_model(
      rc.src_vocab_path, model.config.source_vocab, "source");
  Vocabulary tgt_vocab = load_vocab_for_model(
      rc.tgt_vocab_path, model.config.target_vocab, "target");
  if (rc.replace_unk && !model.attentional()) {
    throw std::invalid_argument(
        "--replace-unk needs an attentional model to pick source words");
  }
  if (rc.dump_alignments && !model.attentional()) {
    throw std::invalid_argument(
        "--dump-alignments needs an attentional model");
  }

  auto sentences = nmt::read_corpus(rc.input_path);
  if (sentences.empty()) throw DataError("no input sentences");

  std::ofstream translations = open_output(out_path(rc, "translations.txt"));
  std::ofstream links;
  std::vector<AlignmentDumpEntry> dump;
  if (rc.dump_alignments) {
    links = open_output(out_path(rc, "alignments.txt"));
  }

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& source_tokens = sentences[i];
    if (source_tokens.empty()) {
      throw DataError("empty source on line " + std::to_string(i + 1) +
                      " of " + rc.input_path);
    }
    auto source_ids = nmt::encode_tokens(source_tokens, src_vocab,
                                         model.config.reverse_source);
    nmt::TranslationResult result =
        nmt::greedy_translate(model, source_ids, rc.max_words);
    auto target_tokens = nmt::decode_ids(result.target_ids, tgt_vocab);

    if (model.attentional()) {
      AlignmentMatrix matrix = nmt::attribute_alignments(
          result.records, model.config.attention.score,
          model.config.reverse_source,
          /*has_terminator_record=*/!result.truncated);
      if (rc.replace_unk) {
        target_tokens = nmt::unk_replace(target_tokens, matrix, source_tokens);
      }
      if (rc.dump_alignments) {
        links << nmt::pharaoh_line(matrix) << '\n';
        dump.push_back({source_tokens, target_tokens, std::move(matrix)});
      }
    }
    translations << join_tokens(target_tokens) << '\n';
  }
  if (!translations) throw DataError("failed writing translations.txt");
  if (rc.dump_alignments) {
    if (!links) throw DataError("failed writing alignments.txt");
    nmt::write_alignment_dump(dump, out_path(rc, "weights.tsv").string());
  }
  std::cout << "translated " << sentences.size() << " sentences into "
            << rc.out_dir << "\n";
}

void run_force_align(const RunConfig& rc) {
  NmtModel model = nmt::load_model(rc.model_path);
  if (!model.attentional()) {
    throw std::invalid_argument(
        "force-align needs an attentional model; this container has no "
        "attention parameters");
  }
  Vocabulary src_vocab = load_vocab_for_model(
      rc.src_vocab_path, model.config.source_vocab, "source");
  Vocabulary tgt_vocab = load_vocab_for_model(
      rc.tgt_vocab_path, model.config.target_vocab, "target");

  auto sources = nmt::read_corpus(rc.src_path);
  auto targets = nmt::read_corpus(rc.tgt_path);
  if (sources.size() != targets.size()) {
    throw DataError("line count mismatch: " + rc.src_path + " has " +
                    std::to_string(sources.size()) + " sentences, " +
                    rc.tgt_path + " has " + std::to_string(targets.size()));
  }
  if (sources.empty()) throw DataError("alignment corpus is empty");

  std::ofstream links = open_output(out_path(rc, "alignments.txt"));
  std::vector<AlignmentDumpEntry> dump;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].empty() || targets[i].empty()) {
      throw DataError("empty sentence on line " + std::to_string(i + 1));
    }
    auto source_ids = nmt::encode_tokens(sources[i], src_vocab,
                                         model.config.reverse_source);
    auto reference_ids =
        nmt::encode_tokens(targets[i], tgt_vocab, /*reverse=*/false);
    auto records = nmt::force_decode(model, source_ids, reference_ids);
    AlignmentMatrix matrix = nmt::attribute_alignments(
        records, model.config.attention.score, model.config.reverse_source,
        /*has_terminator_record=*/true);
    links << nmt::pharaoh_line(matrix) << '\n';
    dump.push_back({sources[i], targets[i], std::move(matrix)});
  }
  if (!links) throw DataError("failed writing alignments.txt");
  nmt::write_alignment_dump(dump, out_path(rc, "weights.tsv").string());
  std::cout << "aligned " << sources.size() << " sentences into " << rc.out_dir
            << "\n";
}

std::pair<std::vector<std::vector<std::string>>,
          std::vector<std::vector<std::string>>>
read_scoring_pair(const std::string& candidates_path,
                  const std::string& references_path) {
  auto candidates = nmt::read_corpus(candidates_path);
  auto references = nmt::read_corpus(references_path);
  if (candidates.size() != references.size()) {
    throw DataError("line count mismatch: " + candidates_path + " has " +
                    std::to_string(candidates.size()) + " sentences, " +
                    references_path + " has " +
                    std::to_string(references.size()));
  }
  if (candidates.empty()) throw DataError("scoring corpus is empty");
  return {std::move(candidates), std::move(references)};
}

std::string format_bleu(const nmt::BleuReport& report) {
  char buf[256];
  std::string text;
  std::snprintf(buf, sizeof(buf), "BLEU = %.4f\n", report.score);
  text += buf;
  for (int n = 0; n < 4; ++n) {
    std::snprintf(buf, sizeof(buf), "p%d = %.6f\n", n + 1,
                  report.precisions[n]);
    text += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "brevity_penalty = %.6f (candidate_len = %ld, reference_len "
                "= %ld)\n",
                report.brevity_penalty, report.candidate_length,
                report.reference_length);
  text += buf;
  return text;
}

void run_score_bleu(const RunConfig& rc) {
  auto [candidates, references] =
      read_scoring_pair(rc.candidates_path, rc.references_path);
  std::string text = format_bleu(nmt::bleu(candidates, references));
  std::cout << text;
  open_output(out_path(rc, "bleu.txt")) << text;
}

void run_score_aer(const RunConfig& rc) {
  auto predicted_file = nmt::read_alignment_file(rc.predicted_path);
  auto gold = nmt::read_alignment_file(rc.gold_path);
  if (predicted_file.size() != gold.size()) {
    throw DataError("line count mismatch: " + rc.predicted_path + " has " +
                    std::to_string(predicted_file.size()) + " sentences, " +
                    rc.gold_path + " has " + std::to_string(gold.size()));
  }
  std::vector<std::vector<std::pair<int, int>>> predicted;
  predicted.reserve(predicted_file.size());
  long total = 0;
  for (const auto& sentence : predicted_file) {
    std::vector<std::pair<int, int>> links(sentence.sure.begin(),
                                           sentence.sure.end());
    links.insert(links.end(), sentence.possible.begin(),
                 sentence.possible.end());
    total += static_cast<long>(links.size());
    predicted.push_back(std::move(links));
  }
  for (const auto& sentence : gold) {
    total += static_cast<long>(sentence.sure.size());
  }
  if (predicted.empty() || total == 0) {
    throw DataError("no links to score");
  }

  char buf[64];
  std::snprintf(buf, sizeof(buf), "AER = %.6f\n", nmt::aer(predicted, gold));
  std::cout << buf;
  open_output(out_path(rc, "aer.txt")) << buf;
}

void run_length_report(const RunConfig& rc) {
  auto sources = nmt::read_corpus(rc.sources_path);
  auto [candidates, references] =
      read_scoring_pair(rc.candidates_path, rc.references_path);
  if (sources.size() != candidates.size()) {
    throw DataError("line count mismatch: " + rc.sources_path + " has " +
                    std::to_string(sources.size()) + " sentences, " +
                    rc.candidates_path + " has " +
                    std::to_string(candidates.size()));
  }
  auto buckets = nmt::length_buckets(sources, candidates, references,
                                     parse_edges(rc.edges));
  std::string table = "lo\thi\tsentences\tbleu\n";
  char buf[128];
  for (const auto& bucket : buckets) {
    if (bucket.hi < 0) {
      std::snprintf(buf, sizeof(buf), "%d\t-\t%d\t%.4f\n", bucket.lo,
                    bucket.sentences, bucket.report.score);
    } else {
      std::snprintf(buf, sizeof(buf), "%d\t%d\t%d\t%.4f\n", bucket.lo,
                    bucket.hi, bucket.sentences, bucket.report.score);
    }
    table += buf;
  }
  std::cout << table;
  open_output(out_path(rc, "length_report.tsv")) << table;
}

void run_plot_attn(const RunConfig& rc) {
  auto entries = nmt::read_alignment_dump(rc.weights_path);
  if (entries.empty()) throw DataError("no sentences in " + rc.weights_path);
  std::size_t written = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const AlignmentDumpEntry& entry = entries[i];
    auto target_tokens = entry.target_tokens;
    // A truncated content-score attribution leaves the tail words without
    // rows; label only the rows that exist.
    if (entry.alignment.weights.size() < target_tokens.size()) {
      target_tokens.resize(entry.alignment.weights.size());
    }
    if (target_tokens.empty()) {
      std::cerr << "warning: sentence " << i
                << " has no attributed rows, skipped\n";
      continue;
    }
    std::filesystem::path path =
        out_path(rc, "sent_" + std::to_string(i) + ".pgm");
    nmt::plot_attn(entry.alignment, entry.source_tokens, target_tokens,
                   path.string(), rc.cell_size, rc.svg);
    ++written;
  }
  std::cout << "wrote " << written << " heatmaps to " << rc.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-based neural machine translation toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default(true);
  // Lets a config-file value and an explicit flag coexist; the flag comes
  // later on the assembled command line and wins.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  RunConfig rc;

  auto add_common = [&rc](CLI::App* sub) {
    sub->add_option("--config", rc.config_file,
                    "flat key=value config file; command-line flags win")
        ->configurable(false);
    sub->add_option("--out", rc.out_dir,
                    "output directory (created if missing); receives the "
                    "resolved config echo and all artifacts")
        ->required();
  };

  CLI::App* build_vocab =
      app.add_subcommand("build-vocab", "count tokens and write a vocabulary");
  add_common(build_vocab);
  build_vocab->add_option("--corpus", rc.corpus, "tokenized text file")
      ->required();
  build_vocab->add_option("--max-size", rc.max_size,
                          "vocabulary budget including the two reserved ids");

  CLI::App* train = app.add_subcommand("train", "fit a translation model");
  add_common(train);
  train->add_option("--train-src", rc.train_src, "source training text")
      ->required();
  train->add_option("--train-tgt", rc.train_tgt, "target training text")
      ->required();
  train->add_option("--eval-src", rc.eval_src, "source held-out text")
      ->required();
  train->add_option("--eval-tgt", rc.eval_tgt, "target held-out text")
      ->required();
  train->add_option("--src-vocab", rc.src_vocab_path, "source vocabulary file")
      ->required();
  train->add_option("--tgt-vocab", rc.tgt_vocab_path, "target vocabulary file")
      ->required();
  train->add_option("--layers", rc.layers, "stacked LSTM depth");
  train->add_option("--cells", rc.cells, "hidden/embedding width n");
  train
      ->add_option("--attention", rc.mechanism,
                   "attention mechanism: global, local-m, local-p, or none")
      ->check(CLI::IsMember(
          {"global", "local-m", "local_m", "local-p", "local_p", "none"}));
  train
      ->add_option("--score", rc.score,
                   "score function: dot, general, concat, location")
      ->check(CLI::IsMember({"dot", "general", "concat", "location"}));
  train->add_option("--window", rc.window, "local attention radius D");
  train->add_flag("--input-feeding", rc.input_feeding,
                  "feed the previous attentional hidden state down");
  // A bool option (not a flag) so the resolved-config echo round-trips the
  // default-true state faithfully.
  train->add_option("--reverse-source", rc.reverse_source,
                    "reverse source word order (true/false)");
  train->add_option("--epochs", rc.epochs, "training epochs");
  train->add_option("--lr", rc.lr0, "initial learning rate");
  train->add_option("--halve-after", rc.halve_after,
                    "last epoch that still uses the full learning rate");
  train->add_option("--clip-norm", rc.clip_norm, "global gradient norm cap");
  train->add_option("--batch-size", rc.batch_size, "sentence pairs per step");
  train->add_option("--dropout", rc.dropout, "dropout probability");
  train->add_option("--seed", rc.seed, "seed for init, shuffling and dropout");
  train->add_option("--max-len", rc.max_len,
                    "drop training pairs longer than this on either side");

  CLI::App* translate =
      app.add_subcommand("translate", "greedy-decode a source text");
  add_common(translate);
  translate->add_option("--model", rc.model_path, "model container")
      ->required();
  translate
      ->add_option("--src-vocab", rc.src_vocab_path, "source vocabulary file")
      ->required();
  translate
      ->add_option("--tgt-vocab", rc.tgt_vocab_path, "target vocabulary file")
      ->required();
  translate->add_option("--input", rc.input_path, "source text to translate")
      ->required();
  translate->add_option("--max-words", rc.max_words,
                        "translation length budget per sentence");
  translate->add_flag("--replace-unk", rc.replace_unk,
                      "copy the aligned source word over each unknown token");
  translate->add_flag("--dump-alignments", rc.dump_alignments,
                      "also write alignments.txt and weights.tsv");

  CLI::App* force_align = app.add_subcommand(
      "force-align", "extract alignments for given sentence pairs");
  add_common(force_align);
  force_align->add_option("--model", rc.model_path, "model container")
      ->required();
  force_align
      ->add_option("--src-vocab", rc.src_vocab_path, "source vocabulary file")
      ->required();
  force_align
      ->add_option("--tgt-vocab", rc.tgt_vocab_path, "target vocabulary file")
      ->required();
  force_align->add_option("--src", rc.src_path, "source sentences")
      ->required();
  force_align->add_option("--tgt", rc.tgt_path, "target sentences")
      ->required();

  CLI::App* score_bleu =
      app.add_subcommand("score-bleu", "corpus-level 4-gram BLEU");
  add_common(score_bleu);
  score_bleu
      ->add_option("--candidates", rc.candidates_path, "system translations")
      ->required();
  score_bleu
      ->add_option("--references", rc.references_path,
                   "reference translations, one per candidate")
      ->required();

  CLI::App* score_aer =
      app.add_subcommand("score-aer", "alignment error rate");
  add_common(score_aer);
  score_aer
      ->add_option("--predicted", rc.predicted_path,
                   "predicted alignments (one line per sentence)")
      ->required();
  score_aer
      ->add_option("--gold", rc.gold_path,
                   "gold alignments with sure t-s and possible t?s links")
      ->required();

  CLI::App* length_report = app.add_subcommand(
      "length-report", "BLEU bucketed by source sentence length");
  add_common(length_report);
  length_report->add_option("--sources", rc.sources_path, "source sentences")
      ->required();
  length_report
      ->add_option("--candidates", rc.candidates_path, "system translations")
      ->required();
  length_report
      ->add_option("--references", rc.references_path,
                   "reference translations")
      ->required();
  length_report->add_option(
      "--edges", rc.edges,
      "comma-separated bucket cut points, strictly increasing");

  CLI::App* plot_attn = app.add_subcommand(
      "plot-attn", "render alignment dumps as grayscale heatmaps");
  add_common(plot_attn);
  plot_attn
      ->add_option("--weights", rc.weights_path,
                   "weights.tsv produced by force-align or translate")
      ->required();
  plot_attn->add_option("--cell-size", rc.cell_size,
                        "square cell edge length in pixels");
  plot_attn->add_flag("--svg", rc.svg, "also write a labeled vector image");

  std::vector<std::string> args(argv + 1, argv + argc);
  // Splice config-file values in right after the subcommand name, before
  // the explicit flags, so the flags override them.
  std::string config_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_file = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_file = args[i].substr(std::string("--config=").size());
    }
  }
  if (!config_file.empty() && !args.empty() && args.front()[0] != '-') {
    try {
      std::vector<std::string> injected = load_config_args(config_file);
      args.insert(args.begin() + 1, injected.begin(), injected.end());
    } catch (const DataError& e) {
      std::cerr << "data error: " << e.what() << "\n";
      return 2;
    }
  }

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    std::error_code ec;
    std::filesystem::create_directories(rc.out_dir, ec);
    if (ec) {
      throw DataError("cannot create output directory " + rc.out_dir + ": " +
                      ec.message());
    }
    {
      std::ofstream echo(out_path(rc, "config.txt"));
      if (!echo) {
        throw DataError("cannot write config echo in " + rc.out_dir);
      }
      echo << "# attnmt " << sub->get_name() << "\n"
           << sub->config_to_str(/*default_also=*/true,
                                 /*write_description=*/false);
    }

    const std::string name = sub->get_name();
    if (name == "build-vocab") {
      run_build_vocab(rc);
    } else if (name == "train") {
      run_train(rc);
    } else if (name == "translate") {
      run_translate(rc);
    } else if (name == "force-align") {
      run_force_align(rc);
    } else if (name == "score-bleu") {
      run_score_bleu(rc);
    } else if (name == "score-aer") {
      run_score_aer(rc);
    } else if (name == "length-report") {
      run_length_report(rc);
    } else {
      run_plot_attn(rc);
    }
    return 0;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
