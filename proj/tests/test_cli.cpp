// Drives the command-line binary (path in ATTNMT_BIN) as a subprocess and
// checks artifacts, stdout and exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "attnmt/heatmap.hpp"
#include "attnmt/rng.hpp"

namespace {

std::string bin() {
  const char* path = std::getenv("ATTNMT_BIN");
  REQUIRE_MESSAGE(path != nullptr,
                  "set ATTNMT_BIN to the attnmt binary under test");
  return path;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::path("/tmp") /
           ("attnmt_cli_" + std::to_string(getpid()) + "_" + tag + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

CmdResult run(const TempDir& dir, const std::string& args) {
  static int counter = 0;
  std::string out_file = dir.file("stdout_" + std::to_string(counter));
  std::string err_file = dir.file("stderr_" + std::to_string(counter));
  ++counter;
  std::string command =
      bin() + " " + args + " >" + out_file + " 2>" + err_file;
  int status = std::system(command.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path);
  REQUIRE(static_cast<bool>(out));
  for (const auto& line : lines) out << line << '\n';
}

// Deterministic copy-task corpus: target = source, small symbol set.
std::vector<std::string> copy_sentences(int count, std::uint64_t seed) {
  nmt::Rng rng(seed);
  std::vector<std::string> sentences;
  for (int i = 0; i < count; ++i) {
    int len = 2 + static_cast<int>(rng.below(4));
    std::string line;
    for (int w = 0; w < len; ++w) {
      if (w) line += ' ';
      line += "w" + std::to_string(rng.below(8));
    }
    sentences.push_back(line);
  }
  return sentences;
}

std::vector<double> column(const std::string& tsv, int index) {
  std::vector<double> values;
  auto rows = lines_of(tsv);
  for (std::size_t i = 1; i < rows.size(); ++i) {  // skip header
    std::istringstream row(rows[i]);
    std::string field;
    for (int k = 0; k <= index; ++k) std::getline(row, field, '\t');
    values.push_back(std::stod(field));
  }
  return values;
}

// Everything before the wall-clock column, for bitwise comparisons.
std::string strip_seconds(const std::string& tsv) {
  std::string kept;
  for (const auto& line : lines_of(tsv)) {
    std::size_t last_tab = line.rfind('\t');
    kept += line.substr(0, last_tab);
    kept += '\n';
  }
  return kept;
}

}  // namespace

TEST_CASE("build-vocab orders by frequency and echoes its config") {
  TempDir dir("vocab");
  write_lines(dir.file("corpus.txt"), {"b a", "a a", "c b"});

  CmdResult r = run(dir, "build-vocab --corpus " + dir.file("corpus.txt") +
                             " --out " + dir.file("v1"));
  CHECK(r.exit_code == 0);
  CHECK(slurp(dir.file("v1/vocab.txt")) == "<unk>\n<eos>\na\nb\nc\n");

  std::string echo = slurp(dir.file("v1/config.txt"));
  CHECK(echo.find("max-size=50000") != std::string::npos);
  CHECK(echo.find("corpus=") != std::string::npos);

  r = run(dir, "build-vocab --corpus " + dir.file("corpus.txt") +
                   " --max-size 3 --out " + dir.file("v2"));
  CHECK(r.exit_code == 0);
  CHECK(slurp(dir.file("v2/vocab.txt")) == "<unk>\n<eos>\na\n");
}

TEST_CASE("config file values apply and explicit flags beat them") {
  TempDir dir("config");
  write_lines(dir.file("corpus.txt"), {"b a", "a a", "c b"});
  write_lines(dir.file("run.conf"), {"# a comment", "",
                                     "corpus=" + dir.file("corpus.txt"),
                                     "max-size=3"});

  CmdResult from_config = run(dir, "build-vocab --config " +
                                       dir.file("run.conf") + " --out " +
                                       dir.file("v1"));
  CHECK(from_config.exit_code == 0);
  CHECK(lines_of(slurp(dir.file("v1/vocab.txt"))).size() == 3);

  CmdResult overridden = run(dir, "build-vocab --config " +
                                      dir.file("run.conf") +
                                      " --max-size 4 --out " + dir.file("v2"));
  CHECK(overridden.exit_code == 0);
  CHECK(lines_of(slurp(dir.file("v2/vocab.txt"))).size() == 4);
  CHECK(slurp(dir.file("v2/config.txt")).find("max-size=4") !=
        std::string::npos);

  CmdResult missing = run(dir, "build-vocab --config " + dir.file("no.conf") +
                                   " --out " + dir.file("v3"));
  CHECK(missing.exit_code == 2);
}

TEST_CASE("toy pipeline: train, translate, align, plot, score") {
  TempDir dir("pipeline");
  auto train_sentences = copy_sentences(40, 11);
  auto eval_sentences = copy_sentences(6, 22);
  write_lines(dir.file("train.txt"), train_sentences);
  write_lines(dir.file("eval.txt"), eval_sentences);

  REQUIRE(run(dir, "build-vocab --corpus " + dir.file("train.txt") +
                       " --out " + dir.file("vocab"))
              .exit_code == 0);
  std::string vocab = dir.file("vocab/vocab.txt");

  // --- train ---------------------------------------------------------
  std::string train_args =
      " --train-src " + dir.file("train.txt") + " --train-tgt " +
      dir.file("train.txt") + " --eval-src " + dir.file("eval.txt") +
      " --eval-tgt " + dir.file("eval.txt") + " --src-vocab " + vocab +
      " --tgt-vocab " + vocab +
      " --layers 1 --cells 16 --attention global --score dot"
      " --input-feeding --epochs 6 --halve-after 5 --batch-size 8 --seed 3";
  CmdResult trained = run(dir, "train" + train_args + " --out " +
                                   dir.file("run"));
  REQUIRE_MESSAGE(trained.exit_code == 0, trained.err);

  std::string log = slurp(dir.file("run/train_log.tsv"));
  auto log_lines = lines_of(log);
  REQUIRE(log_lines.size() == 7);  // header + 6 epochs
  CHECK(log_lines[0] == "epoch\tloss\tppl\tln_ppl\tlr\tseconds");
  auto lr = column(log, 4);
  REQUIRE(lr.size() == 6);
  for (int epoch = 0; epoch < 5; ++epoch) CHECK(lr[epoch] == 1.0);
  CHECK(lr[5] == 0.5);

  for (int epoch = 1; epoch <= 6; ++epoch) {
    CHECK(std::filesystem::exists(
        dir.file("run/epoch_" + std::to_string(epoch) + ".bin")));
  }
  CHECK(slurp(dir.file("run/latest.bin")) ==
        slurp(dir.file("run/epoch_6.bin")));

  std::string echo = slurp(dir.file("run/config.txt"));
  CHECK(echo.find("epochs=6") != std::string::npos);
  CHECK(echo.find("attention=\"global\"") != std::string::npos);
  CHECK(echo.find("reverse-source=1") != std::string::npos);

  // --- determinism: same seed, fresh run ------------------------------
  CmdResult again = run(dir, "train" + train_args + " --out " +
                                 dir.file("run_again"));
  REQUIRE(again.exit_code == 0);
  CHECK(strip_seconds(slurp(dir.file("run_again/train_log.tsv"))) ==
        strip_seconds(log));
  CHECK(slurp(dir.file("run_again/latest.bin")) ==
        slurp(dir.file("run/latest.bin")));

  // --- translate -------------------------------------------------------
  std::string model = dir.file("run/latest.bin");
  CmdResult translated =
      run(dir, "translate --model " + model + " --src-vocab " + vocab +
                   " --tgt-vocab " + vocab + " --input " + dir.file("eval.txt") +
                   " --dump-alignments --out " + dir.file("trans"));
  REQUIRE_MESSAGE(translated.exit_code == 0, translated.err);
  auto translations = lines_of(slurp(dir.file("trans/translations.txt")));
  CHECK(translations.size() == eval_sentences.size());
  CHECK(lines_of(slurp(dir.file("trans/alignments.txt"))).size() ==
        eval_sentences.size());
  auto translate_dump =
      nmt::read_alignment_dump(dir.file("trans/weights.tsv"));
  REQUIRE(translate_dump.size() == eval_sentences.size());

  // --- force-align on the references ---------------------------------
  CmdResult aligned =
      run(dir, "force-align --model " + model + " --src-vocab " + vocab +
                   " --tgt-vocab " + vocab + " --src " + dir.file("eval.txt") +
                   " --tgt " + dir.file("eval.txt") + " --out " +
                   dir.file("align"));
  REQUIRE_MESSAGE(aligned.exit_code == 0, aligned.err);
  auto pharaoh = lines_of(slurp(dir.file("align/alignments.txt")));
  REQUIRE(pharaoh.size() == eval_sentences.size());
  auto align_dump = nmt::read_alignment_dump(dir.file("align/weights.tsv"));
  REQUIRE(align_dump.size() == eval_sentences.size());
  for (std::size_t i = 0; i < align_dump.size(); ++i) {
    // One attributed row per target word under teacher forcing.
    CHECK(align_dump[i].alignment.weights.size() ==
          align_dump[i].target_tokens.size());
    for (const auto& row : align_dump[i].alignment.weights) {
      double sum = 0.0;
      for (double w : row) sum += w;
      CHECK(sum <= 1.0 + 1e-9);  // terminator column was dropped
    }
  }

  // Teacher-forcing the model's own output replays the same attention.
  bool all_nonempty = true;
  for (const auto& line : translations) all_nonempty &= !line.empty();
  if (all_nonempty) {
    write_lines(dir.file("self.txt"), translations);
    CmdResult self_aligned =
        run(dir, "force-align --model " + model + " --src-vocab " + vocab +
                     " --tgt-vocab " + vocab + " --src " +
                     dir.file("eval.txt") + " --tgt " + dir.file("self.txt") +
                     " --out " + dir.file("self_align"));
    REQUIRE(self_aligned.exit_code == 0);
    auto self_dump =
        nmt::read_alignment_dump(dir.file("self_align/weights.tsv"));
    REQUIRE(self_dump.size() == translate_dump.size());
    for (std::size_t i = 0; i < self_dump.size(); ++i) {
      if (translate_dump[i].alignment.weights.size() !=
          self_dump[i].alignment.weights.size()) {
        continue;  // translation hit the length budget: no terminator row
      }
      CHECK(translate_dump[i].alignment.weights ==
            self_dump[i].alignment.weights);
    }
  }

  // --- plot-attn on the force-align output ----------------------------
  CmdResult plotted = run(dir, "plot-attn --weights " +
                                   dir.file("align/weights.tsv") +
                                   " --cell-size 2 --out " + dir.file("plots"));
  REQUIRE_MESSAGE(plotted.exit_code == 0, plotted.err);
  for (std::size_t i = 0; i < eval_sentences.size(); ++i) {
    std::string stem = dir.file("plots/sent_" + std::to_string(i));
    REQUIRE(std::filesystem::exists(stem + ".pgm"));
    CHECK(std::filesystem::exists(stem + ".txt"));

    std::string pgm = slurp(stem + ".pgm");
    std::istringstream header(pgm);
    std::string magic;
    std::size_t width = 0, height = 0;
    header >> magic >> width >> height;
    CHECK(magic == "P5");
    CHECK(width == align_dump[i].source_tokens.size() * 2);
    CHECK(height == align_dump[i].target_tokens.size() * 2);
  }

  // --- scoring ---------------------------------------------------------
  CmdResult bleu = run(dir, "score-bleu --candidates " + dir.file("eval.txt") +
                                " --references " + dir.file("eval.txt") +
                                " --out " + dir.file("bleu"));
  REQUIRE(bleu.exit_code == 0);
  CHECK(bleu.out.find("BLEU = 100.0000") != std::string::npos);
  CHECK(slurp(dir.file("bleu/bleu.txt")).find("BLEU = 100.0000") !=
        std::string::npos);

  CmdResult aer = run(dir, "score-aer --predicted " +
                               dir.file("align/alignments.txt") + " --gold " +
                               dir.file("align/alignments.txt") + " --out " +
                               dir.file("aer"));
  REQUIRE(aer.exit_code == 0);
  CHECK(aer.out.find("AER = 0.000000") != std::string::npos);

  CmdResult report =
      run(dir, "length-report --sources " + dir.file("eval.txt") +
                   " --candidates " + dir.file("eval.txt") + " --references " +
                   dir.file("eval.txt") + " --edges 4 --out " +
                   dir.file("len"));
  REQUIRE(report.exit_code == 0);
  auto table = lines_of(slurp(dir.file("len/length_report.tsv")));
  REQUIRE(table.size() >= 2);
  CHECK(table[0] == "lo\thi\tsentences\tbleu");
  int counted = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    std::istringstream row(table[i]);
    std::string lo, hi, sentences;
    std::getline(row, lo, '\t');
    std::getline(row, hi, '\t');
    std::getline(row, sentences, '\t');
    counted += std::stoi(sentences);
  }
  CHECK(counted == static_cast<int>(eval_sentences.size()));

  // --- vocabulary/model mismatch is a data error ----------------------
  REQUIRE(run(dir, "build-vocab --corpus " + dir.file("train.txt") +
                       " --max-size 5 --out " + dir.file("small_vocab"))
              .exit_code == 0);
  CmdResult mismatch =
      run(dir, "translate --model " + model + " --src-vocab " +
                   dir.file("small_vocab/vocab.txt") + " --tgt-vocab " + vocab +
                   " --input " + dir.file("eval.txt") + " --out " +
                   dir.file("bad_trans"));
  CHECK(mismatch.exit_code == 2);
  CHECK(mismatch.err.find("vocabulary") != std::string::npos);
}

TEST_CASE("contradictory and missing inputs map to the documented exit codes") {
  TempDir dir("errors");
  write_lines(dir.file("c.txt"), {"a b", "b a"});
  REQUIRE(run(dir, "build-vocab --corpus " + dir.file("c.txt") + " --out " +
                       dir.file("v"))
              .exit_code == 0);

  SUBCASE("local mechanism with the location score is refused") {
    CmdResult r = run(
        dir, "train --train-src " + dir.file("c.txt") + " --train-tgt " +
                 dir.file("c.txt") + " --eval-src " + dir.file("c.txt") +
                 " --eval-tgt " + dir.file("c.txt") + " --src-vocab " +
                 dir.file("v/vocab.txt") + " --tgt-vocab " +
                 dir.file("v/vocab.txt") + " --attention local-p"
                 " --score location --epochs 2 --halve-after 1 --out " +
                 dir.file("run"));
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("content scores only") != std::string::npos);
  }
  SUBCASE("missing corpus file") {
    CmdResult r = run(dir, "build-vocab --corpus " + dir.file("nope.txt") +
                               " --out " + dir.file("v2"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("data error") != std::string::npos);
  }
  SUBCASE("unknown flag") {
    CmdResult r = run(dir, "build-vocab --corpus " + dir.file("c.txt") +
                               " --frobnicate --out " + dir.file("v3"));
    CHECK(r.exit_code == 1);
  }
  SUBCASE("missing subcommand") {
    CmdResult r = run(dir, "");
    CHECK(r.exit_code == 1);
  }
  SUBCASE("help exits zero") {
    CmdResult r = run(dir, "--help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("build-vocab") != std::string::npos);
  }
  SUBCASE("non-finite plot weights are a numeric failure") {
    write_lines(dir.file("bad.tsv"),
                {"sentence\t0", "source\ta", "target\tx", "links\t0", "nan",
                 ""});
    CmdResult r = run(dir, "plot-attn --weights " + dir.file("bad.tsv") +
                               " --out " + dir.file("plots"));
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("numeric error") != std::string::npos);
  }
  SUBCASE("alignment scoring with no links at all is a data error") {
    write_lines(dir.file("empty.txt"), {"", ""});
    CmdResult r = run(dir, "score-aer --predicted " + dir.file("empty.txt") +
                               " --gold " + dir.file("empty.txt") + " --out " +
                               dir.file("aer"));
    CHECK(r.exit_code == 2);
  }
}
