#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nmt {

namespace detail {
struct TensorNode {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first requested
};
}  // namespace detail

// Dense row-major 64-bit tensor with a lazily allocated gradient buffer.
// Copies are shallow: they share the underlying value and gradient storage,
// which is what lets backward closures write gradients that the caller sees.
// Use clone() for an independent deep copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> values);
  static Tensor scalar(double v);

  bool defined() const { return static_cast<bool>(node_); }
  const std::vector<int>& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const { return node_->shape[static_cast<size_t>(axis)]; }
  int size() const { return static_cast<int>(node_->data.size()); }

  double* data() { return node_->data.data(); }
  const double* data() const { return node_->data.data(); }

  // Gradient buffer, zero-initialized on first access. It lives on the shared
  // node and is accumulation state rather than part of the tensor's value, so
  // access is const: backward closures holding copies may write through it.
  double* grad() const;
  const std::vector<double>& grad_vector() const;
  bool has_grad() const { return defined() && !node_->grad.empty(); }
  void zero_grad() const;

  // Accessors for small fixtures and tests.
  double value() const;                // requires size() == 1
  double at(int i) const { return node_->data[static_cast<size_t>(i)]; }
  double at(int i, int j) const;       // requires rank 2
  double& ref(int i) { return node_->data[static_cast<size_t>(i)]; }

  Tensor clone() const;

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

std::string shape_str(const std::vector<int>& shape);

// Reverse-mode tape: an ordered log of backward closures. Each forward op
// appends one closure; backward() replays them in exact reverse order, and
// every closure only *adds* into operand gradients, so fan-out accumulates.
class Tape {
 public:
  void record(std::function<void()> backward) {
    ops_.push_back(std::move(backward));
  }

  // Seeds d(loss)/d(loss) with `seed` and replays the tape backwards.
  // loss must hold exactly one value.
  void backward(Tensor& loss, double seed = 1.0);

  void clear() { ops_.clear(); }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
};

}  // namespace nmt
