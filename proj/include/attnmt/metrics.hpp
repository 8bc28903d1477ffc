#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace nmt {

// Corpus-level 4-gram BLEU with clipped counts and brevity penalty,
// case-sensitive, no smoothing: score = 100 * BP * exp(1/4 sum ln p_n),
// and exactly 0 whenever any p_n is 0.
struct BleuReport {
  double precisions[4] = {0.0, 0.0, 0.0, 0.0};  // p1..p4
  double brevity_penalty = 0.0;  // min(1, e^{1 - r/c})
  double score = 0.0;            // in [0, 100]
  long candidate_length = 0;     // c: total candidate tokens
  long reference_length = 0;     // r: total reference tokens
};

// One reference per candidate, aligned by index. Throws
// std::invalid_argument on an empty corpus or a count mismatch.
BleuReport bleu(const std::vector<std::vector<std::string>>& candidates,
                const std::vector<std::vector<std::string>>& references);

// Gold word alignment for one sentence pair: (target, source) index pairs.
// Sure links are required; possible links are tolerated matches. The two
// sets are kept disjointly as read; scoring unions them where needed.
struct GoldAlignment {
  std::set<std::pair<int, int>> sure;
  std::set<std::pair<int, int>> possible;
};

// Alignment error rate over a corpus:
//   AER = 1 - (|A ∩ S| + |A ∩ (S ∪ P)|) / (|A| + |S|)
// with A the predicted links and S/P the gold sure/possible links, all
// counts summed over sentences. Throws std::invalid_argument when sentence
// counts differ or no links exist on either side (|A| + |S| = 0).
double aer(const std::vector<std::vector<std::pair<int, int>>>& predicted,
           const std::vector<GoldAlignment>& gold);

// Pharaoh alignment file: one sentence per line of space-separated tokens,
// "t-s" for a sure link and "t?s" for a possible one, 0-based. Blank lines
// are sentences without links. Throws DataError on unreadable files or
// malformed tokens.
std::vector<GoldAlignment> read_alignment_file(const std::string& path);

// BLEU over the sentences whose source length (terminator excluded) falls
// in [lo, hi); the last bucket of a report is open-ended.
struct LengthBucket {
  int lo = 0;
  int hi = -1;  // exclusive; -1 = unbounded
  int sentences = 0;
  BleuReport report;
};

// Groups sentences by source word count at the given cut points (strictly
// increasing; k edges make k+1 ranges) and scores each nonempty group.
// Empty ranges are omitted, not reported as zero. Throws
// std::invalid_argument on count mismatches or unsorted edges.
std::vector<LengthBucket> length_buckets(
    const std::vector<std::vector<std::string>>& sources,
    const std::vector<std::vector<std::string>>& candidates,
    const std::vector<std::vector<std::string>>& references,
    const std::vector<int>& edges);

}  // namespace nmt
