#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "attnmt/kernels.hpp"
#include "attnmt/rng.hpp"

namespace kern = nmt::kern;

namespace {

std::vector<double> random_values(nmt::Rng& rng, int count) {
  std::vector<double> v(static_cast<size_t>(count));
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Plain three-loop product, the order the row kernels also use.
void naive_mm_nn(const double* a, const double* b, double* c, int m, int k,
                 int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < k; ++l) s += a[i * k + l] * b[l * n + j];
      c[i * n + j] = s;
    }
  }
}

}  // namespace

TEST_CASE("mm_nn matches a naive triple loop") {
  nmt::Rng rng(11);
  const std::tuple<int, int, int> sizes[] = {
      {1, 1, 1}, {3, 4, 2}, {7, 5, 9}, {16, 33, 8}, {2, 64, 1}};
  for (auto [m, k, n] : sizes) {
    auto a = random_values(rng, m * k);
    auto b = random_values(rng, k * n);
    std::vector<double> got(static_cast<size_t>(m) * n, -1.0);
    std::vector<double> want(static_cast<size_t>(m) * n);
    kern::mm_nn_serial(a.data(), b.data(), got.data(), m, k, n, false);
    naive_mm_nn(a.data(), b.data(), want.data(), m, k, n);
    for (int i = 0; i < m * n; ++i) {
      CHECK(got[static_cast<size_t>(i)] ==
            doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("mm_nt and mm_tn agree with explicitly transposed operands") {
  nmt::Rng rng(12);
  const int m = 5, k = 7, n = 4;
  auto a = random_values(rng, m * k);   // [m x k]
  auto bt = random_values(rng, n * k);  // [n x k]
  std::vector<double> b(static_cast<size_t>(k) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      b[static_cast<size_t>(j) * n + i] = bt[static_cast<size_t>(i) * k + j];

  std::vector<double> via_nt(static_cast<size_t>(m) * n);
  std::vector<double> via_nn(static_cast<size_t>(m) * n);
  kern::mm_nt_serial(a.data(), bt.data(), via_nt.data(), m, k, n, false);
  kern::mm_nn_serial(a.data(), b.data(), via_nn.data(), m, k, n, false);
  for (int i = 0; i < m * n; ++i) {
    CHECK(via_nt[static_cast<size_t>(i)] ==
          doctest::Approx(via_nn[static_cast<size_t>(i)]).epsilon(1e-12));
  }

  // C = A^T * B with A stored [k x m]: transpose A by hand and use mm_nn.
  auto a_km = random_values(rng, k * m);
  std::vector<double> a_mk(static_cast<size_t>(m) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j)
      a_mk[static_cast<size_t>(j) * k + i] = a_km[static_cast<size_t>(i) * m + j];
  auto b2 = random_values(rng, k * n);
  std::vector<double> via_tn(static_cast<size_t>(m) * n);
  std::vector<double> via_nn2(static_cast<size_t>(m) * n);
  kern::mm_tn_serial(a_km.data(), b2.data(), via_tn.data(), m, k, n, false);
  kern::mm_nn_serial(a_mk.data(), b2.data(), via_nn2.data(), m, k, n, false);
  for (int i = 0; i < m * n; ++i) {
    CHECK(via_tn[static_cast<size_t>(i)] ==
          doctest::Approx(via_nn2[static_cast<size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("identity times a matrix reproduces it exactly") {
  std::vector<double> eye{1.0, 0.0, 0.0, 1.0};
  std::vector<double> m{1.0, 2.0, 3.0, 4.0};
  std::vector<double> out(4);
  kern::mm_nn(eye.data(), m.data(), out.data(), 2, 2, 2, false);
  CHECK(out == m);
}

TEST_CASE("accumulate flag adds onto the existing output") {
  nmt::Rng rng(13);
  const int m = 3, k = 6, n = 2;
  auto a = random_values(rng, m * k);
  auto b = random_values(rng, k * n);
  std::vector<double> base(static_cast<size_t>(m) * n, 0.5);
  std::vector<double> acc = base;
  std::vector<double> fresh(static_cast<size_t>(m) * n);
  kern::mm_nn_serial(a.data(), b.data(), acc.data(), m, k, n, true);
  kern::mm_nn_serial(a.data(), b.data(), fresh.data(), m, k, n, false);
  for (int i = 0; i < m * n; ++i) {
    CHECK(acc[static_cast<size_t>(i)] ==
          doctest::Approx(base[static_cast<size_t>(i)] +
                          fresh[static_cast<size_t>(i)])
              .epsilon(1e-12));
  }
}

TEST_CASE("serial and OpenMP flavors are bitwise identical") {
  nmt::Rng rng(14);
  INFO("OpenMP available: " << kern::openmp_available()
                            << ", threads: " << kern::thread_count());
  const std::tuple<int, int, int> sizes[] = {{1, 1, 1},   {4, 8, 4},
                                             {37, 19, 23}, {64, 128, 1},
                                             {1, 300, 1}, {128, 96, 64}};
  for (auto [m, k, n] : sizes) {
    auto a = random_values(rng, m * k);
    auto b_kn = random_values(rng, k * n);
    auto b_nk = random_values(rng, n * k);
    auto a_km = random_values(rng, k * m);
    std::vector<double> s(static_cast<size_t>(m) * n), p(s.size());

    kern::mm_nn_serial(a.data(), b_kn.data(), s.data(), m, k, n, false);
    kern::mm_nn_openmp(a.data(), b_kn.data(), p.data(), m, k, n, false);
    CHECK(s == p);

    kern::mm_nt_serial(a.data(), b_nk.data(), s.data(), m, k, n, false);
    kern::mm_nt_openmp(a.data(), b_nk.data(), p.data(), m, k, n, false);
    CHECK(s == p);

    kern::mm_tn_serial(a_km.data(), b_kn.data(), s.data(), m, k, n, false);
    kern::mm_tn_openmp(a_km.data(), b_kn.data(), p.data(), m, k, n, false);
    CHECK(s == p);
  }

  auto x = random_values(rng, 5000);
  std::vector<double> ys(x.size()), yp(x.size());
  kern::vtanh_serial(x.data(), ys.data(), static_cast<int>(x.size()));
  kern::vtanh_openmp(x.data(), yp.data(), static_cast<int>(x.size()));
  CHECK(ys == yp);
  kern::vsigmoid_serial(x.data(), ys.data(), static_cast<int>(x.size()));
  kern::vsigmoid_openmp(x.data(), yp.data(), static_cast<int>(x.size()));
  CHECK(ys == yp);
}

TEST_CASE("dispatcher output is identical across all modes") {
  nmt::Rng rng(15);
  const int m = 40, k = 50, n = 30;
  auto a = random_values(rng, m * k);
  auto b = random_values(rng, k * n);
  std::vector<double> out_auto(static_cast<size_t>(m) * n);
  std::vector<double> out_serial(out_auto.size());
  std::vector<double> out_omp(out_auto.size());

  const kern::Mode saved = kern::mode();
  kern::set_mode(kern::Mode::automatic);
  kern::mm_nn(a.data(), b.data(), out_auto.data(), m, k, n, false);
  kern::set_mode(kern::Mode::serial);
  kern::mm_nn(a.data(), b.data(), out_serial.data(), m, k, n, false);
  kern::set_mode(kern::Mode::openmp);
  kern::mm_nn(a.data(), b.data(), out_omp.data(), m, k, n, false);
  kern::set_mode(saved);

  CHECK(out_auto == out_serial);
  CHECK(out_auto == out_omp);
}
