#pragma once

#include <stdexcept>
#include <string>

namespace nmt {

// Unreadable or malformed files, corpora, or on-disk models.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite losses or gradients. Carries enough context to reproduce.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nmt
