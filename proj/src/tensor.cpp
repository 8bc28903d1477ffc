#include "attnmt/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace nmt {

namespace {

std::size_t checked_size(const std::vector<int>& shape) {
  std::size_t total = 1;
  for (int extent : shape) {
    if (extent <= 0) {
      throw std::invalid_argument("tensor extents must be positive, got " +
                                  shape_str(shape));
    }
    total *= static_cast<std::size_t>(extent);
  }
  return total;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) {
  const std::size_t total = checked_size(shape);
  node_ = std::make_shared<detail::TensorNode>();
  node_->shape = std::move(shape);
  node_->data.assign(total, 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values) {
  const std::size_t total = checked_size(shape);
  if (total != values.size()) {
    throw std::invalid_argument("tensor shape " + shape_str(shape) +
                                " does not hold " +
                                std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<detail::TensorNode>();
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

double* Tensor::grad() const {
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  return node_->grad.data();
}

const std::vector<double>& Tensor::grad_vector() const { return node_->grad; }

void Tensor::zero_grad() const {
  node_->grad.assign(node_->data.size(), 0.0);
}

double Tensor::value() const {
  if (node_->data.size() != 1) {
    throw std::invalid_argument("value() needs a single-element tensor, got " +
                                shape_str(node_->shape));
  }
  return node_->data[0];
}

double Tensor::at(int i, int j) const {
  return node_->data[static_cast<std::size_t>(i) * dim(1) +
                     static_cast<std::size_t>(j)];
}

Tensor Tensor::clone() const {
  Tensor copy;
  copy.node_ = std::make_shared<detail::TensorNode>();
  copy.node_->shape = node_->shape;
  copy.node_->data = node_->data;
  return copy;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << " x ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

void Tape::backward(Tensor& loss, double seed) {
  if (loss.size() != 1) {
    throw std::invalid_argument("backward needs a scalar loss, got " +
                                shape_str(loss.shape()));
  }
  loss.grad()[0] += seed;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

}  // namespace nmt
