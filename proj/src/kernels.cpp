#include "attnmt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nmt::kern {

namespace {

Mode g_mode = Mode::automatic;

// Work thresholds below which the automatic mode stays serial; thread startup
// dominates on the small matrices the recurrent steps produce.
constexpr long long kMmThreshold = 1LL << 16;
constexpr int kMapThreshold = 1 << 14;

// The per-element workers are noinline so the serial and OpenMP drivers run
// the exact same instruction sequence, keeping their results bitwise equal.

// Dot product with four independent accumulators combined in a fixed order.
// The lanes live in two-element arrays so the vectorizer can keep each pair
// in one SIMD register; the summation order matches the scalar s0..s3 form.
__attribute__((noinline)) double dot4(const double* a, const double* b,
                                      int n) {
  double s01[2] = {0.0, 0.0};
  double s23[2] = {0.0, 0.0};
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s01[0] += a[i] * b[i];
    s01[1] += a[i + 1] * b[i + 1];
    s23[0] += a[i + 2] * b[i + 2];
    s23[1] += a[i + 3] * b[i + 3];
  }
  double s = (s01[0] + s01[1]) + (s23[0] + s23[1]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// One output row of C = A * B: c[j] (+)= sum_l arow[l] * B[l*n + j].
__attribute__((noinline)) void nn_row(const double* arow, const double* b,
                                      double* crow, int k, int n, bool acc) {
  if (!acc) std::memset(crow, 0, sizeof(double) * static_cast<size_t>(n));
  for (int l = 0; l < k; ++l) {
    const double al = arow[l];
    const double* brow = b + static_cast<size_t>(l) * n;
    for (int j = 0; j < n; ++j) crow[j] += al * brow[j];
  }
}

// One output row of C = A^T * B: a column of A walked with stride m.
__attribute__((noinline)) void tn_row(const double* acol, int stride,
                                      const double* b, double* crow, int k,
                                      int n, bool acc) {
  if (!acc) std::memset(crow, 0, sizeof(double) * static_cast<size_t>(n));
  for (int l = 0; l < k; ++l) {
    const double al = acol[static_cast<size_t>(l) * stride];
    const double* brow = b + static_cast<size_t>(l) * n;
    for (int j = 0; j < n; ++j) crow[j] += al * brow[j];
  }
}

// C[m x 1] (+)= A[k x m]^T * B[k x 1] over the output range [lo, hi): rows of
// A are walked sequentially and scaled into the range, so the column-major
// access pattern of the transposed product never issues strided loads. The
// per-element fold order (l ascending) is independent of the range split.
__attribute__((noinline)) void tn_vec_range(const double* a, const double* b,
                                            double* c, int m, int k, int lo,
                                            int hi, bool acc) {
  if (!acc) {
    std::memset(c + lo, 0, sizeof(double) * static_cast<size_t>(hi - lo));
  }
  for (int l = 0; l < k; ++l) {
    const double bl = b[l];
    const double* arow = a + static_cast<size_t>(l) * m;
    for (int i = lo; i < hi; ++i) c[i] += bl * arow[i];
  }
}

bool use_openmp(long long work) {
#ifdef _OPENMP
  switch (g_mode) {
    case Mode::serial:
      return false;
    case Mode::openmp:
      return true;
    case Mode::automatic:
      return work >= kMmThreshold && omp_get_max_threads() > 1;
  }
  return false;
#else
  (void)work;
  return false;
#endif
}

}  // namespace

Mode mode() { return g_mode; }
void set_mode(Mode m) { g_mode = m; }

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void mm_nn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc) {
  if (n == 1) {
    for (int i = 0; i < m; ++i) {
      const double s = dot4(a + static_cast<size_t>(i) * k, b, k);
      c[i] = acc ? c[i] + s : s;
    }
    return;
  }
  for (int i = 0; i < m; ++i) {
    nn_row(a + static_cast<size_t>(i) * k, b, c + static_cast<size_t>(i) * n,
           k, n, acc);
  }
}

void mm_nn_openmp(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc) {
#ifdef _OPENMP
  if (n == 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      const double s = dot4(a + static_cast<size_t>(i) * k, b, k);
      c[i] = acc ? c[i] + s : s;
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    nn_row(a + static_cast<size_t>(i) * k, b, c + static_cast<size_t>(i) * n,
           k, n, acc);
  }
#else
  mm_nn_serial(a, b, c, m, k, n, acc);
#endif
}

void mm_nt_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double s = dot4(arow, b + static_cast<size_t>(j) * k, k);
      crow[j] = acc ? crow[j] + s : s;
    }
  }
}

void mm_nt_openmp(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double s = dot4(arow, b + static_cast<size_t>(j) * k, k);
      crow[j] = acc ? crow[j] + s : s;
    }
  }
#else
  mm_nt_serial(a, b, c, m, k, n, acc);
#endif
}

void mm_tn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc) {
  if (n == 1) {
    tn_vec_range(a, b, c, m, k, 0, m, acc);
    return;
  }
  for (int i = 0; i < m; ++i) {
    tn_row(a + i, m, b, c + static_cast<size_t>(i) * n, k, n, acc);
  }
}

void mm_tn_openmp(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc) {
#ifdef _OPENMP
  if (n == 1) {
#pragma omp parallel
    {
      const int nt = omp_get_num_threads();
      const int tid = omp_get_thread_num();
      const int chunk = (m + nt - 1) / nt;
      const int lo = tid * chunk;
      const int hi = std::min(m, lo + chunk);
      if (lo < hi) tn_vec_range(a, b, c, m, k, lo, hi, acc);
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    tn_row(a + i, m, b, c + static_cast<size_t>(i) * n, k, n, acc);
  }
#else
  mm_tn_serial(a, b, c, m, k, n, acc);
#endif
}

void mm_nn(const double* a, const double* b, double* c, int m, int k, int n,
           bool acc) {
  const long long work = 1LL * m * k * n;
  if (use_openmp(work)) {
    mm_nn_openmp(a, b, c, m, k, n, acc);
  } else {
    mm_nn_serial(a, b, c, m, k, n, acc);
  }
}

void mm_nt(const double* a, const double* b, double* c, int m, int k, int n,
           bool acc) {
  const long long work = 1LL * m * k * n;
  if (use_openmp(work)) {
    mm_nt_openmp(a, b, c, m, k, n, acc);
  } else {
    mm_nt_serial(a, b, c, m, k, n, acc);
  }
}

void mm_tn(const double* a, const double* b, double* c, int m, int k, int n,
           bool acc) {
  const long long work = 1LL * m * k * n;
  if (use_openmp(work)) {
    mm_tn_openmp(a, b, c, m, k, n, acc);
  } else {
    mm_tn_serial(a, b, c, m, k, n, acc);
  }
}

void vtanh_serial(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vtanh_openmp(const double* x, double* y, int n) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
#else
  vtanh_serial(x, y, n);
#endif
}

void vsigmoid_serial(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void vsigmoid_openmp(const double* x, double* y, int n) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
#else
  vsigmoid_serial(x, y, n);
#endif
}

void vtanh(const double* x, double* y, int n) {
  if (use_openmp(static_cast<long long>(n) * 16)) {
    vtanh_openmp(x, y, n);
  } else {
    vtanh_serial(x, y, n);
  }
}

void vsigmoid(const double* x, double* y, int n) {
  if (use_openmp(static_cast<long long>(n) * 16)) {
    vsigmoid_openmp(x, y, n);
  } else {
    vsigmoid_serial(x, y, n);
  }
}

}  // namespace nmt::kern
