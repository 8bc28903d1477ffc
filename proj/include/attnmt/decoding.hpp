#pragma once

#include <string>
#include <vector>

#include "attnmt/model.hpp"

namespace nmt {

// What one decoder step saw and chose: the emitted (or reference) token and
// the attention row over source positions in model order (reversed when the
// model reverses its input; terminator position included).
struct DecodeRecord {
  int token_id = -1;
  std::vector<double> weights;  // empty for a non-attentional model
  double aligned_pos = -1.0;    // predicted center, set by local-p
  int argmax_source = -1;       // argmax over `weights`, model order
};

struct TranslationResult {
  // Emitted ids; ends with the terminator unless the budget ran out first.
  std::vector<int> target_ids;
  std::vector<DecodeRecord> records;  // one per emitted token
  bool truncated = false;
};

// Argmax decoding: emit the most probable token per step until the
// terminator appears or max_len words are produced. Throws
// std::invalid_argument when max_len < 1.
TranslationResult greedy_translate(const NmtModel& model,
                                   const std::vector<int>& source_ids,
                                   int max_len);

// Teacher-forced pass over a fixed reference (terminator included): no
// token decisions, one record per reference position. Requires an
// attentional model and a nonempty reference (std::invalid_argument).
std::vector<DecodeRecord> force_decode(const NmtModel& model,
                                       const std::vector<int>& source_ids,
                                       const std::vector<int>& reference_ids);

// Attention rows attributed to target words, columns restored to original
// source word order with the terminator column dropped. links[j] is row
// j's argmax source word (-1 when the source had no words).
struct AlignmentMatrix {
  std::vector<std::vector<double>> weights;  // [target words][source words]
  std::vector<int> links;
};

// Reassigns raw per-step rows to target words. With a content score
// (dot/general/concat) the row computed at step t belongs to the input word
// y_{t-1}, so rows shift down one step and the step-0 row (attending for
// the pre-first input) is dropped. With the location score the row at step
// t belongs to y_t directly. The terminator's own row is excluded; when the
// sequence was truncated there is no terminator record, and under a content
// score the final word ends up without a row (its alignment would have
// arrived with the next step). Weight values are never altered, only
// re-indexed.
AlignmentMatrix attribute_alignments(const std::vector<DecodeRecord>& records,
                                     ScoreKind score, bool reverse_source,
                                     bool has_terminator_record = true);

// Copies the argmax-aligned source word over each "<unk>" target token.
// Positions without an alignment row (truncated content-score tails, empty
// sources) stay untouched. Throws std::invalid_argument when the matrix has
// more rows than there are target tokens.
std::vector<std::string> unk_replace(const std::vector<std::string>& target_tokens,
                                     const AlignmentMatrix& alignment,
                                     const std::vector<std::string>& source_tokens);

// "t-s" pairs, 0-based, space-separated, one sentence per line.
std::string pharaoh_line(const AlignmentMatrix& alignment);

}  // namespace nmt
