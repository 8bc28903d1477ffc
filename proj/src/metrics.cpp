#include "attnmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "attnmt/errors.hpp"

namespace nmt {

namespace {

using Ngram = std::vector<std::string>;

void count_ngrams(const std::vector<std::string>& tokens, int n,
                  std::map<Ngram, long>& counts) {
  const int total = static_cast<int>(tokens.size()) - n + 1;
  for (int i = 0; i < total; ++i) {
    counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)] += 1;
  }
}

}  // namespace

BleuReport bleu(const std::vector<std::vector<std::string>>& candidates,
                const std::vector<std::vector<std::string>>& references) {
  if (candidates.empty()) {
    throw std::invalid_argument("bleu: empty corpus");
  }
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("bleu: candidate/reference count mismatch");
  }

  BleuReport report;
  long matches[4] = {0, 0, 0, 0};
  long totals[4] = {0, 0, 0, 0};
  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    const auto& ref = references[i];
    report.candidate_length += static_cast<long>(cand.size());
    report.reference_length += static_cast<long>(ref.size());
    for (int n = 1; n <= 4; ++n) {
      std::map<Ngram, long> cand_counts, ref_counts;
      count_ngrams(cand, n, cand_counts);
      count_ngrams(ref, n, ref_counts);
      for (const auto& [gram, count] : cand_counts) {
        totals[n - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) {
          matches[n - 1] += std::min(count, it->second);  // clipped
        }
      }
    }
  }

  bool all_positive = true;
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    report.precisions[n] =
        totals[n] > 0 ? static_cast<double>(matches[n]) / totals[n] : 0.0;
    if (report.precisions[n] <= 0.0) {
      all_positive = false;
    } else {
      log_sum += std::log(report.precisions[n]);
    }
  }
  if (report.candidate_length > 0) {
    const double ratio = static_cast<double>(report.reference_length) /
                         static_cast<double>(report.candidate_length);
    report.brevity_penalty = std::min(1.0, std::exp(1.0 - ratio));
  }
  report.score = all_positive
                     ? 100.0 * report.brevity_penalty * std::exp(log_sum / 4.0)
                     : 0.0;
  return report;
}

double aer(const std::vector<std::vector<std::pair<int, int>>>& predicted,
           const std::vector<GoldAlignment>& gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("aer: sentence count mismatch");
  }
  long a_total = 0, s_total = 0, a_in_s = 0, a_in_sp = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const std::set<std::pair<int, int>> a(predicted[i].begin(),
                                          predicted[i].end());
    const auto& g = gold[i];
    a_total += static_cast<long>(a.size());
    s_total += static_cast<long>(g.sure.size());
    for (const auto& link : a) {
      const bool in_sure = g.sure.count(link) > 0;
      if (in_sure) ++a_in_s;
      if (in_sure || g.possible.count(link) > 0) ++a_in_sp;
    }
  }
  if (a_total + s_total == 0) {
    throw std::invalid_argument("aer: no links on either side");
  }
  return 1.0 - static_cast<double>(a_in_s + a_in_sp) /
                   static_cast<double>(a_total + s_total);
}

std::vector<GoldAlignment> read_alignment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read alignment file: " + path);
  std::vector<GoldAlignment> out;
  std::string line;
  while (std::getline(in, line)) {
    GoldAlignment sentence;
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) {
      const size_t sep = token.find_first_of("-?");
      if (sep == std::string::npos || sep == 0 || sep + 1 >= token.size()) {
        throw DataError("malformed alignment token '" + token + "' in " +
                        path);
      }
      int t = 0, s = 0;
      try {
        size_t used_t = 0, used_s = 0;
        t = std::stoi(token.substr(0, sep), &used_t);
        s = std::stoi(token.substr(sep + 1), &used_s);
        if (used_t != sep || used_s != token.size() - sep - 1) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception&) {
        throw DataError("malformed alignment token '" + token + "' in " +
                        path);
      }
      if (t < 0 || s < 0) {
        throw DataError("negative alignment index in " + path);
      }
      if (token[sep] == '-') {
        sentence.sure.emplace(t, s);
      } else {
        sentence.possible.emplace(t, s);
      }
    }
    out.push_back(std::move(sentence));
  }
  return out;
}

std::vector<LengthBucket> length_buckets(
    const std::vector<std::vector<std::string>>& sources,
    const std::vector<std::vector<std::string>>& candidates,
    const std::vector<std::vector<std::string>>& references,
    const std::vector<int>& edges) {
  if (sources.size() != candidates.size() ||
      sources.size() != references.size()) {
    throw std::invalid_argument("length_buckets: corpus size mismatch");
  }
  for (size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) {
      throw std::invalid_argument(
          "length_buckets: edges must be strictly increasing");
    }
  }

  const size_t ranges = edges.size() + 1;
  std::vector<std::vector<size_t>> members(ranges);
  for (size_t i = 0; i < sources.size(); ++i) {
    const int len = static_cast<int>(sources[i].size());
    size_t slot = 0;
    while (slot < edges.size() && len >= edges[slot]) ++slot;
    members[slot].push_back(i);
  }

  std::vector<LengthBucket> out;
  for (size_t slot = 0; slot < ranges; ++slot) {
    if (members[slot].empty()) continue;  // absent, not zero
    LengthBucket bucket;
    bucket.lo = slot == 0 ? 0 : edges[slot - 1];
    bucket.hi = slot < edges.size() ? edges[slot] : -1;
    bucket.sentences = static_cast<int>(members[slot].size());
    std::vector<std::vector<std::string>> cand, ref;
    for (size_t idx : members[slot]) {
      cand.push_back(candidates[idx]);
      ref.push_back(references[idx]);
    }
    bucket.report = bleu(cand, ref);
    out.push_back(std::move(bucket));
  }
  return out;
}

}  // namespace nmt
