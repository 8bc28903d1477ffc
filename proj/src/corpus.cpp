#include "attnmt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "attnmt/errors.hpp"

namespace nmt {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream words(line);
  std::string token;
  while (words >> token) tokens.push_back(std::move(token));
  return tokens;
}

std::vector<int> encode_tokens(const std::vector<std::string>& tokens,
                               const Vocabulary& vocab, bool reverse) {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  for (const std::string& t : tokens) ids.push_back(vocab.lookup(t));
  if (reverse) std::reverse(ids.begin(), ids.end());
  ids.push_back(kEosId);
  return ids;
}

std::vector<std::string> decode_ids(const std::vector<int>& ids,
                                    const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int id : ids) {
    if (id == kEosId) continue;
    tokens.push_back(vocab.token(id));
  }
  return tokens;
}

SentencePair encode_pair(const std::vector<std::string>& source_tokens,
                         const std::vector<std::string>& target_tokens,
                         const Vocabulary& source_vocab,
                         const Vocabulary& target_vocab, bool reverse_source) {
  SentencePair pair;
  pair.source_ids = encode_tokens(source_tokens, source_vocab, reverse_source);
  pair.target_ids = encode_tokens(target_tokens, target_vocab, false);
  pair.source_tokens = source_tokens;
  return pair;
}

std::vector<std::vector<std::string>> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read corpus file: " + path);
  std::vector<std::vector<std::string>> sentences;
  std::string line;
  while (std::getline(in, line)) sentences.push_back(split_tokens(line));
  if (in.bad()) throw DataError("error while reading corpus: " + path);
  return sentences;
}

std::vector<SentencePair> read_parallel_corpus(const std::string& source_path,
                                               const std::string& target_path,
                                               const Vocabulary& source_vocab,
                                               const Vocabulary& target_vocab,
                                               bool reverse_source) {
  const auto source = read_corpus(source_path);
  const auto target = read_corpus(target_path);
  if (source.size() != target.size()) {
    throw DataError("parallel corpus line counts disagree: " + source_path +
                    " has " + std::to_string(source.size()) + ", " +
                    target_path + " has " + std::to_string(target.size()));
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    pairs.push_back(encode_pair(source[i], target[i], source_vocab,
                                target_vocab, reverse_source));
  }
  return pairs;
}

Batch make_batch(std::vector<SentencePair> pairs) {
  Batch batch;
  batch.pairs = std::move(pairs);
  std::size_t src_max = 0, tgt_max = 0;
  for (const SentencePair& p : batch.pairs) {
    src_max = std::max(src_max, p.source_ids.size());
    tgt_max = std::max(tgt_max, p.target_ids.size());
  }
  for (const SentencePair& p : batch.pairs) {
    std::vector<int> src(src_max, kEosId), tgt(tgt_max, kEosId);
    std::vector<char> src_mask(src_max, 0), tgt_mask(tgt_max, 0);
    std::copy(p.source_ids.begin(), p.source_ids.end(), src.begin());
    std::copy(p.target_ids.begin(), p.target_ids.end(), tgt.begin());
    std::fill(src_mask.begin(),
              src_mask.begin() + static_cast<std::ptrdiff_t>(
                                     p.source_ids.size()),
              1);
    std::fill(tgt_mask.begin(),
              tgt_mask.begin() + static_cast<std::ptrdiff_t>(
                                     p.target_ids.size()),
              1);
    batch.source_padded.push_back(std::move(src));
    batch.target_padded.push_back(std::move(tgt));
    batch.source_mask.push_back(std::move(src_mask));
    batch.target_mask.push_back(std::move(tgt_mask));
  }
  return batch;
}

std::vector<Batch> make_batches(const std::vector<SentencePair>& pairs,
                                int batch_size, int max_len, Rng& rng) {
  if (batch_size < 1) {
    throw std::invalid_argument("batch size must be at least 1, got " +
                                std::to_string(batch_size));
  }
  if (max_len < 1) {
    throw std::invalid_argument("length filter must be at least 1, got " +
                                std::to_string(max_len));
  }
  std::vector<SentencePair> kept;
  for (const SentencePair& p : pairs) {
    if (p.source_len() > max_len || p.target_len() > max_len) continue;
    kept.push_back(p);
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < kept.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop =
        std::min(kept.size(), start + static_cast<std::size_t>(batch_size));
    batches.push_back(make_batch({kept.begin() + static_cast<std::ptrdiff_t>(
                                      start),
                                  kept.begin() + static_cast<std::ptrdiff_t>(
                                      stop)}));
  }
  rng.shuffle(batches);
  return batches;
}

}  // namespace nmt
