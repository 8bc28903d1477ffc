#include "attnmt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "attnmt/kernels.hpp"

namespace nmt::ops {

namespace {

// Rare-failure argument checks. A macro so the message expression — string
// concatenation and shape formatting — is only evaluated on the throw path,
// never in the per-op fast path.
#define require(ok, ...) \
  do {                   \
    if (!(ok)) throw std::invalid_argument(__VA_ARGS__); \
  } while (0)

void require_rank(const Tensor& t, int rank, const char* op) {
  require(t.rank() == rank, std::string(op) + ": expected rank " +
                                std::to_string(rank) + " operand, got " +
                                shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  require(b.dim(0) == k, "matmul: inner extents disagree, a is " +
                             shape_str(a.shape()) + ", b is " +
                             shape_str(b.shape()));
  Tensor y({m, n});
  kern::mm_nn(a.data(), b.data(), y.data(), m, k, n, false);
  tape.record([a, b, y, m, k, n]() mutable {
    kern::mm_nt(y.grad(), b.data(), a.grad(), m, n, k, true);
    kern::mm_tn(a.data(), y.grad(), b.grad(), k, m, n, true);
  });
  return y;
}

Tensor matmul_nt(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(0);
  require(b.dim(1) == k, "matmul_nt: inner extents disagree, a is " +
                             shape_str(a.shape()) + ", b is " +
                             shape_str(b.shape()));
  Tensor y({m, n});
  kern::mm_nt(a.data(), b.data(), y.data(), m, k, n, false);
  tape.record([a, b, y, m, k, n]() mutable {
    kern::mm_nn(y.grad(), b.data(), a.grad(), m, n, k, true);
    kern::mm_tn(y.grad(), a.data(), b.grad(), n, m, k, true);
  });
  return y;
}

Tensor matvec(Tape& tape, const Tensor& w, const Tensor& x) {
  require_rank(w, 2, "matvec");
  require_rank(x, 1, "matvec");
  const int m = w.dim(0), k = w.dim(1);
  require(x.dim(0) == k, "matvec: w is " + shape_str(w.shape()) + ", x is " +
                             shape_str(x.shape()));
  Tensor y({m});
  kern::mm_nn(w.data(), x.data(), y.data(), m, k, 1, false);
  tape.record([w, x, y, m, k]() mutable {
    kern::mm_nn(y.grad(), x.data(), w.grad(), m, 1, k, true);
    kern::mm_tn(w.data(), y.grad(), x.grad(), k, m, 1, true);
  });
  return y;
}

Tensor matvec_t(Tape& tape, const Tensor& w, const Tensor& x) {
  require_rank(w, 2, "matvec_t");
  require_rank(x, 1, "matvec_t");
  const int m = w.dim(0), k = w.dim(1);
  require(x.dim(0) == m, "matvec_t: w is " + shape_str(w.shape()) +
                             ", x is " + shape_str(x.shape()));
  Tensor y({k});
  kern::mm_tn(w.data(), x.data(), y.data(), k, m, 1, false);
  tape.record([w, x, y, m, k]() mutable {
    kern::mm_nn(x.data(), y.grad(), w.grad(), m, 1, k, true);
    kern::mm_nn(w.data(), y.grad(), x.grad(), m, k, 1, true);
  });
  return y;
}

Tensor dot(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 1, "dot");
  require_same_shape(a, b, "dot");
  const int n = a.dim(0);
  Tensor y({1});
  kern::mm_nn(a.data(), b.data(), y.data(), 1, n, 1, false);
  tape.record([a, b, y, n]() mutable {
    const double g = y.grad()[0];
    double* da = a.grad();
    double* db = b.grad();
    const double* av = a.data();
    const double* bv = b.data();
    for (int i = 0; i < n; ++i) {
      da[i] += g * bv[i];
      db[i] += g * av[i];
    }
  });
  return y;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const int n = a.size();
  Tensor y(a.shape());
  const double* av = a.data();
  const double* bv = b.data();
  double* yv = y.data();
  for (int i = 0; i < n; ++i) yv[i] = av[i] + bv[i];
  tape.record([a, b, y, n]() mutable {
    const double* g = y.grad();
    double* da = a.grad();
    double* db = b.grad();
    for (int i = 0; i < n; ++i) {
      da[i] += g[i];
      db[i] += g[i];
    }
  });
  return y;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const int n = a.size();
  Tensor y(a.shape());
  const double* av = a.data();
  const double* bv = b.data();
  double* yv = y.data();
  for (int i = 0; i < n; ++i) yv[i] = av[i] * bv[i];
  tape.record([a, b, y, n]() mutable {
    const double* g = y.grad();
    double* da = a.grad();
    double* db = b.grad();
    const double* av2 = a.data();
    const double* bv2 = b.data();
    for (int i = 0; i < n; ++i) {
      da[i] += g[i] * bv2[i];
      db[i] += g[i] * av2[i];
    }
  });
  return y;
}

Tensor scale(Tape& tape, const Tensor& a, double s) {
  const int n = a.size();
  Tensor y(a.shape());
  const double* av = a.data();
  double* yv = y.data();
  for (int i = 0; i < n; ++i) yv[i] = s * av[i];
  tape.record([a, y, s, n]() mutable {
    const double* g = y.grad();
    double* da = a.grad();
    for (int i = 0; i < n; ++i) da[i] += s * g[i];
  });
  return y;
}

Tensor tanh(Tape& tape, const Tensor& a) {
  const int n = a.size();
  Tensor y(a.shape());
  kern::vtanh(a.data(), y.data(), n);
  tape.record([a, y, n]() mutable {
    const double* g = y.grad();
    const double* yv = y.data();
    double* da = a.grad();
    for (int i = 0; i < n; ++i) da[i] += g[i] * (1.0 - yv[i] * yv[i]);
  });
  return y;
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  const int n = a.size();
  Tensor y(a.shape());
  kern::vsigmoid(a.data(), y.data(), n);
  tape.record([a, y, n]() mutable {
    const double* g = y.grad();
    const double* yv = y.data();
    double* da = a.grad();
    for (int i = 0; i < n; ++i) da[i] += g[i] * yv[i] * (1.0 - yv[i]);
  });
  return y;
}

Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, int axis) {
  if (a.rank() == 1 && b.rank() == 1) {
    require(axis == 0, "concat: rank-1 tensors only concatenate on axis 0");
    const int na = a.dim(0), nb = b.dim(0);
    Tensor y({na + nb});
    std::memcpy(y.data(), a.data(), sizeof(double) * static_cast<size_t>(na));
    std::memcpy(y.data() + na, b.data(),
                sizeof(double) * static_cast<size_t>(nb));
    tape.record([a, b, y, na, nb]() mutable {
      const double* g = y.grad();
      double* da = a.grad();
      double* db = b.grad();
      for (int i = 0; i < na; ++i) da[i] += g[i];
      for (int i = 0; i < nb; ++i) db[i] += g[na + i];
    });
    return y;
  }
  require_rank(a, 2, "concat");
  require_rank(b, 2, "concat");
  require(axis == 0 || axis == 1, "concat: axis must be 0 or 1");
  if (axis == 0) {
    require(a.dim(1) == b.dim(1), "concat: column counts disagree, " +
                                      shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
    const int ra = a.dim(0), rb = b.dim(0), c = a.dim(1);
    Tensor y({ra + rb, c});
    std::memcpy(y.data(), a.data(),
                sizeof(double) * static_cast<size_t>(ra) * c);
    std::memcpy(y.data() + static_cast<size_t>(ra) * c, b.data(),
                sizeof(double) * static_cast<size_t>(rb) * c);
    tape.record([a, b, y, ra, rb, c]() mutable {
      const double* g = y.grad();
      double* da = a.grad();
      double* db = b.grad();
      for (int i = 0; i < ra * c; ++i) da[i] += g[i];
      for (int i = 0; i < rb * c; ++i) db[i] += g[ra * c + i];
    });
    return y;
  }
  require(a.dim(0) == b.dim(0), "concat: row counts disagree, " +
                                    shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
  const int r = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  Tensor y({r, ca + cb});
  for (int i = 0; i < r; ++i) {
    std::memcpy(y.data() + static_cast<size_t>(i) * (ca + cb),
                a.data() + static_cast<size_t>(i) * ca,
                sizeof(double) * static_cast<size_t>(ca));
    std::memcpy(y.data() + static_cast<size_t>(i) * (ca + cb) + ca,
                b.data() + static_cast<size_t>(i) * cb,
                sizeof(double) * static_cast<size_t>(cb));
  }
  tape.record([a, b, y, r, ca, cb]() mutable {
    const double* g = y.grad();
    double* da = a.grad();
    double* db = b.grad();
    for (int i = 0; i < r; ++i) {
      const double* grow = g + static_cast<size_t>(i) * (ca + cb);
      for (int j = 0; j < ca; ++j) da[i * ca + j] += grow[j];
      for (int j = 0; j < cb; ++j) db[i * cb + j] += grow[ca + j];
    }
  });
  return y;
}

Tensor slice(Tape& tape, const Tensor& x, int lo, int hi) {
  require_rank(x, 1, "slice");
  require(0 <= lo && lo < hi && hi <= x.dim(0),
          "slice: range [" + std::to_string(lo) + ", " + std::to_string(hi) +
              ") out of bounds for " + shape_str(x.shape()));
  const int n = hi - lo;
  Tensor y({n});
  std::memcpy(y.data(), x.data() + lo, sizeof(double) * static_cast<size_t>(n));
  tape.record([x, y, lo, n]() mutable {
    const double* g = y.grad();
    double* dx = x.grad();
    for (int i = 0; i < n; ++i) dx[lo + i] += g[i];
  });
  return y;
}

Tensor row(Tape& tape, const Tensor& m, int i) {
  require_rank(m, 2, "row");
  require(0 <= i && i < m.dim(0), "row: index " + std::to_string(i) +
                                      " out of bounds for " +
                                      shape_str(m.shape()));
  const int c = m.dim(1);
  Tensor y({c});
  std::memcpy(y.data(), m.data() + static_cast<size_t>(i) * c,
              sizeof(double) * static_cast<size_t>(c));
  tape.record([m, y, i, c]() mutable {
    const double* g = y.grad();
    double* dm = m.grad() + static_cast<size_t>(i) * c;
    for (int j = 0; j < c; ++j) dm[j] += g[j];
  });
  return y;
}

Tensor row_block(Tape& tape, const Tensor& m, int lo, int hi) {
  require_rank(m, 2, "row_block");
  require(0 <= lo && lo < hi && hi <= m.dim(0),
          "row_block: range [" + std::to_string(lo) + ", " +
              std::to_string(hi) + ") out of bounds for " +
              shape_str(m.shape()));
  const int r = hi - lo, c = m.dim(1);
  Tensor y({r, c});
  std::memcpy(y.data(), m.data() + static_cast<size_t>(lo) * c,
              sizeof(double) * static_cast<size_t>(r) * c);
  tape.record([m, y, lo, r, c]() mutable {
    const double* g = y.grad();
    double* dm = m.grad() + static_cast<size_t>(lo) * c;
    for (int i = 0; i < r * c; ++i) dm[i] += g[i];
  });
  return y;
}

Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows) {
  require(!rows.empty(), "stack_rows: no rows given");
  const int c = rows.front().dim(0);
  for (const Tensor& r : rows) {
    require_rank(r, 1, "stack_rows");
    require(r.dim(0) == c, "stack_rows: row lengths disagree, " +
                               shape_str(rows.front().shape()) + " vs " +
                               shape_str(r.shape()));
  }
  const int s = static_cast<int>(rows.size());
  Tensor y({s, c});
  for (int i = 0; i < s; ++i) {
    std::memcpy(y.data() + static_cast<size_t>(i) * c, rows[i].data(),
                sizeof(double) * static_cast<size_t>(c));
  }
  tape.record([rows, y, s, c]() mutable {
    const double* g = y.grad();
    for (int i = 0; i < s; ++i) {
      double* dr = rows[static_cast<size_t>(i)].grad();
      const double* grow = g + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j) dr[j] += grow[j];
    }
  });
  return y;
}

Tensor broadcast_rows(Tape& tape, const Tensor& v, int count) {
  require_rank(v, 1, "broadcast_rows");
  require(count >= 1, "broadcast_rows: count must be positive");
  const int c = v.dim(0);
  Tensor y({count, c});
  for (int i = 0; i < count; ++i) {
    std::memcpy(y.data() + static_cast<size_t>(i) * c, v.data(),
                sizeof(double) * static_cast<size_t>(c));
  }
  tape.record([v, y, count, c]() mutable {
    const double* g = y.grad();
    double* dv = v.grad();
    for (int i = 0; i < count; ++i) {
      const double* grow = g + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j) dv[j] += grow[j];
    }
  });
  return y;
}

Tensor softmax(Tape& tape, const Tensor& logits, const std::vector<int>* mask) {
  require_rank(logits, 1, "softmax");
  const int n = logits.dim(0);
  std::vector<int> valid;
  if (mask != nullptr) {
    require(!mask->empty(), "softmax: empty mask");
    valid = *mask;
    for (int i : valid) {
      require(0 <= i && i < n, "softmax: mask index " + std::to_string(i) +
                                   " out of bounds for " +
                                   shape_str(logits.shape()));
    }
  } else {
    valid.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) valid[static_cast<size_t>(i)] = i;
  }
  Tensor y({n});
  const double* x = logits.data();
  double* yv = y.data();
  double maxv = x[valid.front()];
  for (int i : valid) maxv = std::max(maxv, x[i]);
  double total = 0.0;
  for (int i : valid) {
    yv[i] = std::exp(x[i] - maxv);
    total += yv[i];
  }
  for (int i : valid) yv[i] /= total;
  tape.record([logits, y, valid = std::move(valid)]() mutable {
    const double* g = y.grad();
    const double* yv2 = y.data();
    double* dx = logits.grad();
    double inner = 0.0;
    for (int i : valid) inner += g[i] * yv2[i];
    for (int i : valid) dx[i] += yv2[i] * (g[i] - inner);
  });
  return y;
}

Tensor log_softmax(Tape& tape, const Tensor& logits) {
  require_rank(logits, 1, "log_softmax");
  const int n = logits.dim(0);
  Tensor y({n});
  const double* x = logits.data();
  double* yv = y.data();
  double maxv = x[0];
  for (int i = 1; i < n; ++i) maxv = std::max(maxv, x[i]);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += std::exp(x[i] - maxv);
  const double lse = maxv + std::log(total);
  for (int i = 0; i < n; ++i) yv[i] = x[i] - lse;
  tape.record([logits, y, n]() mutable {
    const double* g = y.grad();
    const double* yv2 = y.data();
    double* dx = logits.grad();
    double gsum = 0.0;
    for (int i = 0; i < n; ++i) gsum += g[i];
    for (int i = 0; i < n; ++i) dx[i] += g[i] - std::exp(yv2[i]) * gsum;
  });
  return y;
}

Tensor pick(Tape& tape, const Tensor& v, int i) {
  require_rank(v, 1, "pick");
  require(0 <= i && i < v.dim(0), "pick: index " + std::to_string(i) +
                                      " out of bounds for " +
                                      shape_str(v.shape()));
  Tensor y = Tensor::scalar(v.at(i));
  tape.record([v, y, i]() mutable { v.grad()[i] += y.grad()[0]; });
  return y;
}

Tensor sum(Tape& tape, const Tensor& x) {
  const int n = x.size();
  const double* xv = x.data();
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += xv[i];
  Tensor y = Tensor::scalar(total);
  tape.record([x, y, n]() mutable {
    const double g = y.grad()[0];
    double* dx = x.grad();
    for (int i = 0; i < n; ++i) dx[i] += g;
  });
  return y;
}

Tensor gaussian_window(Tape& tape, const Tensor& w, const Tensor& p, int lo,
                       double sigma) {
  require_rank(w, 1, "gaussian_window");
  require(p.size() == 1, "gaussian_window: p must hold a single value, got " +
                             shape_str(p.shape()));
  require(sigma > 0.0, "gaussian_window: sigma must be positive");
  const int n = w.dim(0);
  const double pv = p.value();
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  Tensor y({n});
  std::vector<double> factor(static_cast<size_t>(n));
  const double* wv = w.data();
  double* yv = y.data();
  for (int i = 0; i < n; ++i) {
    const double d = static_cast<double>(lo + i) - pv;
    factor[static_cast<size_t>(i)] = std::exp(-d * d * inv_two_sigma_sq);
    yv[i] = wv[i] * factor[static_cast<size_t>(i)];
  }
  const double inv_sigma_sq = 1.0 / (sigma * sigma);
  tape.record(
      [w, p, y, lo, n, inv_sigma_sq, factor = std::move(factor)]() mutable {
        const double* g = y.grad();
        const double* wv2 = w.data();
        double* dw = w.grad();
        double* dp = p.grad();
        const double pv2 = p.value();
        double psum = 0.0;
        for (int i = 0; i < n; ++i) {
          const double f = factor[static_cast<size_t>(i)];
          dw[i] += g[i] * f;
          const double d = static_cast<double>(lo + i) - pv2;
          psum += g[i] * wv2[i] * f * d * inv_sigma_sq;
        }
        dp[0] += psum;
      });
  return y;
}

Tensor dropout_mask(const std::vector<int>& shape, double p, Rng& rng,
                    bool train) {
  require(p >= 0.0 && p < 1.0,
          "dropout_mask: probability must lie in [0, 1), got " +
              std::to_string(p));
  Tensor mask(shape);
  double* mv = mask.data();
  const int n = mask.size();
  if (!train || p == 0.0) {
    for (int i = 0; i < n; ++i) mv[i] = 1.0;
    return mask;
  }
  const double keep_scale = 1.0 / (1.0 - p);
  for (int i = 0; i < n; ++i) {
    mv[i] = rng.uniform() < p ? 0.0 : keep_scale;
  }
  return mask;
}

#undef require

}  // namespace nmt::ops
