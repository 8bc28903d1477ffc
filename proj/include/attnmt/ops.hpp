#pragma once

#include <optional>
#include <vector>

#include "attnmt/rng.hpp"
#include "attnmt/tensor.hpp"

// Differentiable tensor operations. Every op computes its result eagerly and
// records one backward closure on the tape. Backward closures only add into
// operand gradients, so shared operands accumulate correctly.

namespace nmt::ops {

// C[m x n] = A[m x k] * B[k x n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// C[m x n] = A[m x k] * B[n x k]^T
Tensor matmul_nt(Tape& tape, const Tensor& a, const Tensor& b);
// y[m] = W[m x k] * x[k]
Tensor matvec(Tape& tape, const Tensor& w, const Tensor& x);
// y[k] = W[m x k]^T * x[m]
Tensor matvec_t(Tape& tape, const Tensor& w, const Tensor& x);
// scalar = sum_i a[i] * b[i]
Tensor dot(Tape& tape, const Tensor& a, const Tensor& b);

// Elementwise; binary ops require identical shapes.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double s);
Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);

// Concatenation along `axis`; rank 1 supports axis 0, rank 2 axes 0 and 1.
Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, int axis = 0);
// y = x[lo..hi) of a rank-1 tensor.
Tensor slice(Tape& tape, const Tensor& x, int lo, int hi);
// Row i of a rank-2 tensor, as a rank-1 tensor.
Tensor row(Tape& tape, const Tensor& m, int i);
// Rows [lo, hi) of a rank-2 tensor.
Tensor row_block(Tape& tape, const Tensor& m, int lo, int hi);
// Stack S rank-1 tensors of equal length n into an [S x n] matrix.
Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows);
// Repeat a rank-1 tensor as every row of an [count x n] matrix.
Tensor broadcast_rows(Tape& tape, const Tensor& v, int count);

// Max-subtracted softmax over a rank-1 tensor. With a mask, only the listed
// indices participate; all other outputs are exactly 0 and get no gradient.
Tensor softmax(Tape& tape, const Tensor& logits,
               const std::vector<int>* mask = nullptr);
// log(softmax(x)) over a rank-1 tensor, max-subtracted.
Tensor log_softmax(Tape& tape, const Tensor& logits);
// scalar = v[i]
Tensor pick(Tape& tape, const Tensor& v, int i);
// scalar = sum of all entries
Tensor sum(Tape& tape, const Tensor& x);

// y[j] = w[j] * exp(-(lo + j - p)^2 / (2 sigma^2)) for a rank-1 w whose entry
// j sits at absolute position lo + j. p is a single-element tensor and gets
// the gradient of the Gaussian factor.
Tensor gaussian_window(Tape& tape, const Tensor& w, const Tensor& p, int lo,
                       double sigma);

// Inverted-dropout mask: entries are 0 with probability p, else 1/(1-p), so
// the expectation is 1. train=false returns all ones without consuming rng
// draws. Not recorded on any tape (the mask is a constant).
Tensor dropout_mask(const std::vector<int>& shape, double p, Rng& rng,
                    bool train);

}  // namespace nmt::ops
