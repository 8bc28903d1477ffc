#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace nmt {

inline constexpr int kUnkId = 0;
inline constexpr int kEosId = 1;
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kEosToken = "<eos>";

// Immutable token <-> id bijection. Ids 0 and 1 are always the unknown and
// end-of-sentence tokens; every out-of-vocabulary lookup maps to id 0.
class Vocabulary {
 public:
  // Just the two reserved tokens.
  Vocabulary();
  // tokens[0], tokens[1] must be the reserved tokens; no duplicates.
  explicit Vocabulary(std::vector<std::string> tokens);

  // Reads a tokenized corpus (one sentence per line, space-separated) and
  // keeps the max_size - 2 most frequent tokens, ties broken by first
  // occurrence. Occurrences of the reserved token strings are ignored.
  // Throws DataError for an unreadable file, std::invalid_argument for
  // max_size < 3.
  static Vocabulary build(const std::string& corpus_path, int max_size);

  int size() const { return static_cast<int>(tokens_.size()); }
  int lookup(const std::string& token) const;
  const std::string& token(int id) const;

  // One token per line; the line number is the id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace nmt
