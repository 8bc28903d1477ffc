#pragma once

#include <string>
#include <vector>

#include "attnmt/rng.hpp"
#include "attnmt/vocab.hpp"

namespace nmt {

// One parallel sentence pair, already mapped to ids. Both id sequences end
// with the end-of-sentence id; the source is reversed before the terminator
// when the model is configured that way. The original source surface forms
// are kept for unknown-token replacement at decode time.
struct SentencePair {
  std::vector<int> source_ids;
  std::vector<int> target_ids;
  std::vector<std::string> source_tokens;

  // Lengths count words, not the appended terminator.
  int source_len() const { return static_cast<int>(source_ids.size()) - 1; }
  int target_len() const { return static_cast<int>(target_ids.size()) - 1; }
};

// Up to B pairs plus per-side grids padded to the batch maximum with the
// end-of-sentence id. Mask entry 1 marks a real position; padded positions
// are masked out and contribute neither loss nor attention weight.
struct Batch {
  std::vector<SentencePair> pairs;
  std::vector<std::vector<int>> source_padded;
  std::vector<std::vector<int>> target_padded;
  std::vector<std::vector<char>> source_mask;
  std::vector<std::vector<char>> target_mask;
};

std::vector<std::string> split_tokens(const std::string& line);

// Token id sequence with optional reversal and the appended terminator.
std::vector<int> encode_tokens(const std::vector<std::string>& tokens,
                               const Vocabulary& vocab, bool reverse);
// Ids back to token strings; the terminator is dropped.
std::vector<std::string> decode_ids(const std::vector<int>& ids,
                                    const Vocabulary& vocab);

SentencePair encode_pair(const std::vector<std::string>& source_tokens,
                         const std::vector<std::string>& target_tokens,
                         const Vocabulary& source_vocab,
                         const Vocabulary& target_vocab, bool reverse_source);

// Reads a tokenized text file, one sentence per line. Throws DataError when
// the file cannot be read.
std::vector<std::vector<std::string>> read_corpus(const std::string& path);

// Reads a parallel corpus from two aligned files; line counts must agree.
std::vector<SentencePair> read_parallel_corpus(const std::string& source_path,
                                               const std::string& target_path,
                                               const Vocabulary& source_vocab,
                                               const Vocabulary& target_vocab,
                                               bool reverse_source);

Batch make_batch(std::vector<SentencePair> pairs);

// Drops pairs with either side longer than max_len words (pre-terminator),
// chunks the survivors in corpus order, then shuffles the batch order.
std::vector<Batch> make_batches(const std::vector<SentencePair>& pairs,
                                int batch_size, int max_len, Rng& rng);

}  // namespace nmt
