#pragma once

// Synthetic reverse-copy translation task shared by the heavier tests: the
// target sentence is the source sentence written backwards over a tiny
// symbol vocabulary. The task needs genuine source-position lookups to
// solve, which is what makes it a useful end-to-end probe for attention:
// the gold word alignment is exactly target word j <-> source word L-1-j
// (indices in original source order).

#include <string>
#include <utility>
#include <vector>

#include "attnmt/corpus.hpp"
#include "attnmt/rng.hpp"
#include "attnmt/vocab.hpp"

namespace toy {

inline constexpr int kSymbolCount = 20;
inline constexpr int kMinLen = 5;
inline constexpr int kMaxLen = 15;

// "s0".."s19" behind the two reserved tokens; 22 entries total.
inline nmt::Vocabulary make_vocab() {
  std::vector<std::string> tokens = {nmt::kUnkToken, nmt::kEosToken};
  for (int i = 0; i < kSymbolCount; ++i) {
    tokens.push_back("s" + std::to_string(i));
  }
  return nmt::Vocabulary(std::move(tokens));
}

struct RawPair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

// Uniform random symbols, lengths uniform in [kMinLen, kMaxLen].
inline std::vector<RawPair> make_raw_pairs(int count, nmt::Rng& rng) {
  std::vector<RawPair> pairs(static_cast<size_t>(count));
  for (RawPair& pair : pairs) {
    const int len =
        kMinLen + static_cast<int>(rng.below(kMaxLen - kMinLen + 1));
    pair.source.reserve(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) {
      pair.source.push_back(
          "s" + std::to_string(rng.below(kSymbolCount)));
    }
    pair.target.assign(pair.source.rbegin(), pair.source.rend());
  }
  return pairs;
}

inline std::vector<nmt::SentencePair> encode_pairs(
    const std::vector<RawPair>& raw, const nmt::Vocabulary& vocab,
    bool reverse_source) {
  std::vector<nmt::SentencePair> out;
  out.reserve(raw.size());
  for (const RawPair& pair : raw) {
    out.push_back(
        nmt::encode_pair(pair.source, pair.target, vocab, vocab,
                         reverse_source));
  }
  return out;
}

}  // namespace toy
