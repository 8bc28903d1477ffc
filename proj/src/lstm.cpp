#include "attnmt/lstm.hpp"

#include <stdexcept>

namespace nmt {

namespace {

Tensor uniform_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t.ref(i) = rng.uniform(-0.1, 0.1);
  return t;
}

}  // namespace

LstmState LstmState::zeros(int layers, int n) {
  LstmState state;
  for (int l = 0; l < layers; ++l) {
    state.h.emplace_back(std::vector<int>{n});
    state.c.emplace_back(std::vector<int>{n});
  }
  return state;
}

StackedLstmParams init_lstm(int layers, int n, int in_dim, Rng& rng) {
  if (layers < 1) {
    throw std::invalid_argument("stacked LSTM needs at least one layer");
  }
  StackedLstmParams params;
  for (int l = 0; l < layers; ++l) {
    const int d = l == 0 ? in_dim : n;
    LstmLayerParams layer;
    layer.w_x = uniform_tensor({4 * n, d}, rng);
    layer.w_h = uniform_tensor({4 * n, n}, rng);
    layer.b = uniform_tensor({4 * n}, rng);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

std::pair<LstmState, Tensor> lstm_step(
    Tape& tape, const StackedLstmParams& params, const LstmState& prev,
    const Tensor& x, const std::vector<Tensor>* dropout_masks) {
  const int layers = params.layer_count();
  if (prev.layer_count() != layers) {
    throw std::invalid_argument(
        "state has " + std::to_string(prev.layer_count()) +
        " layers, parameters have " + std::to_string(layers));
  }
  if (dropout_masks != nullptr &&
      static_cast<int>(dropout_masks->size()) != layers) {
    throw std::invalid_argument("expected one dropout mask per layer");
  }

  LstmState next;
  Tensor input = x;
  for (int l = 0; l < layers; ++l) {
    const LstmLayerParams& p = params.layers[static_cast<size_t>(l)];
    const int n = p.cell_count();
    if (input.dim(0) != p.input_dim()) {
      throw std::invalid_argument(
          "layer " + std::to_string(l) + " expects input width " +
          std::to_string(p.input_dim()) + ", got " + shape_str(input.shape()));
    }
    if (dropout_masks != nullptr) {
      input = ops::mul(tape, input, (*dropout_masks)[static_cast<size_t>(l)]);
    }
    Tensor pre = ops::add(
        tape,
        ops::add(tape, ops::matvec(tape, p.w_x, input),
                 ops::matvec(tape, p.w_h, prev.h[static_cast<size_t>(l)])),
        p.b);
    Tensor gate_i = ops::sigmoid(tape, ops::slice(tape, pre, 0, n));
    Tensor gate_f = ops::sigmoid(tape, ops::slice(tape, pre, n, 2 * n));
    Tensor cand = ops::tanh(tape, ops::slice(tape, pre, 2 * n, 3 * n));
    Tensor gate_o = ops::sigmoid(tape, ops::slice(tape, pre, 3 * n, 4 * n));

    Tensor cell =
        ops::add(tape, ops::mul(tape, gate_f, prev.c[static_cast<size_t>(l)]),
                 ops::mul(tape, gate_i, cand));
    Tensor hidden = ops::mul(tape, gate_o, ops::tanh(tape, cell));

    next.c.push_back(cell);
    next.h.push_back(hidden);
    input = hidden;
  }
  return {next, input};
}

}  // namespace nmt
