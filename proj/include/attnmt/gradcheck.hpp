#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "attnmt/tensor.hpp"

namespace nmt {

// A loss builder recomputes the scalar loss from the current values of
// whatever tensors it captures, recording onto the tape it is given.
using LossFn = std::function<Tensor(Tape&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
};

// Compares the reverse-mode gradient of f at x against central finite
// differences, coordinate by coordinate. Relative error per coordinate is
// |analytic - numeric| / max(1e-4, |analytic| + |numeric|); the floor turns
// the check absolute for coordinates whose gradient is smaller than the
// rounding noise of the central difference itself. Returns the maximum over
// coordinates. Throws NumericError if f evaluates non-finite.
double check_gradient(const LossFn& f, Tensor& x, double eps = 1e-5);

// Same check over several named parameter tensors with a single backward
// pass; reports the worst coordinate across all of them.
GradCheckReport check_gradient_all(
    const LossFn& f, const std::vector<std::pair<std::string, Tensor>>& params,
    double eps = 1e-5);

}  // namespace nmt
