#include "attnmt/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "attnmt/errors.hpp"

namespace nmt {

namespace {

std::vector<std::string> reserved_tokens() { return {kUnkToken, kEosToken}; }

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(reserved_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kUnkToken || tokens[1] != kEosToken) {
    throw DataError("vocabulary must start with the reserved tokens " +
                    std::string(kUnkToken) + ", " + kEosToken);
  }
  tokens_ = std::move(tokens);
  ids_.reserve(tokens_.size());
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    if (!ids_.emplace(tokens_[static_cast<size_t>(i)], i).second) {
      throw DataError("duplicate vocabulary token: " +
                      tokens_[static_cast<size_t>(i)]);
    }
  }
}

Vocabulary Vocabulary::build(const std::string& corpus_path, int max_size) {
  if (max_size < 3) {
    throw std::invalid_argument(
        "vocabulary size must be at least 3 (two reserved tokens plus one "
        "word), got " +
        std::to_string(max_size));
  }
  std::ifstream in(corpus_path);
  if (!in) throw DataError("cannot read corpus file: " + corpus_path);

  // Counts plus first-occurrence order, so frequency ties stay deterministic.
  std::unordered_map<std::string, long long> counts;
  std::vector<std::string> order;
  std::string line, token;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    while (words >> token) {
      if (token == kUnkToken || token == kEosToken) continue;
      auto [it, inserted] = counts.emplace(token, 0);
      if (inserted) order.push_back(token);
      ++it->second;
    }
  }
  if (in.bad()) throw DataError("error while reading corpus: " + corpus_path);

  std::stable_sort(order.begin(), order.end(),
                   [&counts](const std::string& a, const std::string& b) {
                     return counts[a] > counts[b];
                   });
  const std::size_t keep =
      std::min(order.size(), static_cast<std::size_t>(max_size - 2));
  std::vector<std::string> tokens = reserved_tokens();
  tokens.insert(tokens.end(), order.begin(),
                order.begin() + static_cast<std::ptrdiff_t>(keep));
  return Vocabulary(std::move(tokens));
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw std::invalid_argument("vocabulary id " + std::to_string(id) +
                                " out of range [0, " + std::to_string(size()) +
                                ")");
  }
  return tokens_[static_cast<size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  for (const std::string& t : tokens_) out << t << '\n';
  if (!out) throw DataError("error while writing vocabulary file: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      throw DataError("empty line " + std::to_string(tokens.size()) +
                      " in vocabulary file: " + path);
    }
    tokens.push_back(line);
  }
  if (in.bad()) throw DataError("error while reading vocabulary: " + path);
  return Vocabulary(std::move(tokens));
}

}  // namespace nmt
