#pragma once

#include <utility>
#include <vector>

#include "attnmt/ops.hpp"
#include "attnmt/rng.hpp"
#include "attnmt/tensor.hpp"

namespace nmt {

// One layer of the stack. The 4n rows of w_x / w_h (and entries of b) hold
// the four gate blocks in fixed order: [0,n) input gate, [n,2n) forget gate,
// [2n,3n) candidate, [3n,4n) output gate. This order is part of the model
// container format.
struct LstmLayerParams {
  Tensor w_x;  // [4n x in_dim]
  Tensor w_h;  // [4n x n]
  Tensor b;    // [4n]

  int cell_count() const { return w_h.dim(1); }
  int input_dim() const { return w_x.dim(1); }
};

struct StackedLstmParams {
  std::vector<LstmLayerParams> layers;

  int layer_count() const { return static_cast<int>(layers.size()); }
  int cell_count() const { return layers.front().cell_count(); }
};

// Hidden and cell vectors per layer, each of length n.
struct LstmState {
  std::vector<Tensor> h;
  std::vector<Tensor> c;

  static LstmState zeros(int layers, int n);
  int layer_count() const { return static_cast<int>(h.size()); }
};

// Every entry uniform in [-0.1, 0.1], drawn in a fixed order (per layer:
// w_x row-major, then w_h, then b), so a seed reproduces the model.
StackedLstmParams init_lstm(int layers, int n, int in_dim, Rng& rng);

// One step of the whole stack. x feeds layer 0; each higher layer consumes
// the hidden output of the one below. dropout_masks, when non-null, holds
// one mask per layer that multiplies that layer's input — the non-recurrent
// connections only; pass nullptr outside training. Returns the new state and
// the top layer's hidden vector.
std::pair<LstmState, Tensor> lstm_step(Tape& tape,
                                       const StackedLstmParams& params,
                                       const LstmState& prev, const Tensor& x,
                                       const std::vector<Tensor>* dropout_masks
                                       = nullptr);

}  // namespace nmt
