#include "attnmt/decoding.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "attnmt/vocab.hpp"

namespace nmt {

namespace {

int argmax_index(const Tensor& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v.at(i) > v.at(best)) best = i;
  }
  return best;
}

int argmax_index(const std::vector<double>& v) {
  if (v.empty()) return -1;
  return static_cast<int>(
      std::max_element(v.begin(), v.end()) - v.begin());
}

DecodeRecord make_record(int token_id, const StepOutput& step) {
  DecodeRecord rec;
  rec.token_id = token_id;
  if (step.attention.has_value()) {
    rec.weights = step.attention->weights;
    rec.aligned_pos = step.attention->aligned_pos;
    rec.argmax_source = argmax_index(rec.weights);
  }
  return rec;
}

}  // namespace

TranslationResult greedy_translate(const NmtModel& model,
                                   const std::vector<int>& source_ids,
                                   int max_len) {
  if (max_len < 1) {
    throw std::invalid_argument("greedy_translate: max_len must be positive");
  }
  Tape tape;  // inference only; gradients are never requested
  EncodeResult enc = encode(tape, model, source_ids);
  LstmState state = enc.final_state;
  Tensor feed(std::vector<int>{model.cell_count()});
  int prev = kEosId;

  TranslationResult out;
  int words = 0;
  for (int t = 0;; ++t) {
    StepOutput step =
        decode_step(tape, model, state, prev, feed, enc.states, t);
    const int best = argmax_index(step.log_probs);
    out.records.push_back(make_record(best, step));
    out.target_ids.push_back(best);
    if (best == kEosId) break;
    if (++words == max_len) {
      out.truncated = true;
      break;
    }
    state = std::move(step.state);
    feed = std::move(step.feed);
    prev = best;
  }
  return out;
}

std::vector<DecodeRecord> force_decode(const NmtModel& model,
                                       const std::vector<int>& source_ids,
                                       const std::vector<int>& reference_ids) {
  if (!model.attentional()) {
    throw std::invalid_argument(
        "force_decode: alignment extraction needs an attentional model");
  }
  if (reference_ids.empty()) {
    throw std::invalid_argument("force_decode: empty reference");
  }
  Tape tape;
  EncodeResult enc = encode(tape, model, source_ids);
  LstmState state = enc.final_state;
  Tensor feed(std::vector<int>{model.cell_count()});
  int prev = kEosId;

  std::vector<DecodeRecord> records;
  records.reserve(reference_ids.size());
  for (size_t t = 0; t < reference_ids.size(); ++t) {
    StepOutput step = decode_step(tape, model, state, prev, feed, enc.states,
                                  static_cast<int>(t));
    records.push_back(make_record(reference_ids[t], step));
    state = std::move(step.state);
    feed = std::move(step.feed);
    prev = reference_ids[t];
  }
  return records;
}

AlignmentMatrix attribute_alignments(const std::vector<DecodeRecord>& records,
                                     ScoreKind score, bool reverse_source,
                                     bool has_terminator_record) {
  const bool content = score != ScoreKind::location;
  AlignmentMatrix out;
  // Select which raw records become target-word rows. Content scores: the
  // row at step t aligns the previous input, so word j's row is record
  // j+1 and record 0 has no word. Location score: word j's row is record j
  // and the terminator's record (when present) is dropped.
  size_t first = content ? 1 : 0;
  size_t last = records.size();  // exclusive
  if (!content && has_terminator_record && last > 0) --last;

  for (size_t r = first; r < last; ++r) {
    const std::vector<double>& raw = records[r].weights;
    const int positions = static_cast<int>(raw.size());
    const int source_words = positions > 0 ? positions - 1 : 0;
    std::vector<double> row(static_cast<size_t>(source_words));
    for (int s = 0; s < source_words; ++s) {
      // Model order keeps the terminator last; only the words reverse.
      const int from = reverse_source ? source_words - 1 - s : s;
      row[static_cast<size_t>(s)] = raw[static_cast<size_t>(from)];
    }
    int link = -1;
    if (source_words > 0) {
      link = argmax_index(row);
    }
    out.weights.push_back(std::move(row));
    out.links.push_back(link);
  }
  return out;
}

std::vector<std::string> unk_replace(
    const std::vector<std::string>& target_tokens,
    const AlignmentMatrix& alignment,
    const std::vector<std::string>& source_tokens) {
  if (alignment.weights.size() > target_tokens.size()) {
    throw std::invalid_argument(
        "unk_replace: more alignment rows than target tokens");
  }
  std::vector<std::string> out = target_tokens;
  const size_t covered =
      std::min(alignment.links.size(), target_tokens.size());
  for (size_t j = 0; j < covered; ++j) {
    if (out[j] != kUnkToken) continue;
    const int s = alignment.links[j];
    if (s >= 0 && s < static_cast<int>(source_tokens.size())) {
      out[j] = source_tokens[static_cast<size_t>(s)];
    }
  }
  return out;
}

std::string pharaoh_line(const AlignmentMatrix& alignment) {
  std::ostringstream os;
  bool any = false;
  for (size_t t = 0; t < alignment.links.size(); ++t) {
    if (alignment.links[t] < 0) continue;
    if (any) os << ' ';
    os << t << '-' << alignment.links[t];
    any = true;
  }
  return os.str();
}

}  // namespace nmt
