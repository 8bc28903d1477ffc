// Times the serial and OpenMP flavors of each dense kernel across problem
// sizes and verifies on the fly that both flavors produce bitwise-identical
// output. Build with -DATTNMT_NATIVE=ON for machine-tuned numbers.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "attnmt/kernels.hpp"
#include "attnmt/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeats) {
  fn();  // warm-up, also the first equivalence sample
  auto start = Clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() /
         repeats;
}

std::vector<double> random_buffer(std::size_t n, nmt::Rng& rng) {
  std::vector<double> buf(n);
  for (double& v : buf) v = rng.uniform(-1.0, 1.0);
  return buf;
}

int repeats_for(long work) {
  if (work < 1L << 18) return 200;
  if (work < 1L << 22) return 50;
  return 10;
}

struct MmKernel {
  const char* name;
  void (*serial)(const double*, const double*, double*, int, int, int, bool);
  void (*openmp)(const double*, const double*, double*, int, int, int, bool);
};

struct MapKernel {
  const char* name;
  void (*serial)(const double*, double*, int);
  void (*openmp)(const double*, double*, int);
};

}  // namespace

int main() {
  nmt::Rng rng(20240915);
  std::printf("threads available: %d (openmp %s)\n", nmt::kern::thread_count(),
              nmt::kern::openmp_available() ? "enabled" : "disabled");
  std::printf("%-10s %-18s %12s %12s %9s  %s\n", "kernel", "size",
              "serial(ms)", "openmp(ms)", "speedup", "bitwise");

  const MmKernel mm_kernels[] = {
      {"mm_nn", nmt::kern::mm_nn_serial, nmt::kern::mm_nn_openmp},
      {"mm_nt", nmt::kern::mm_nt_serial, nmt::kern::mm_nt_openmp},
      {"mm_tn", nmt::kern::mm_tn_serial, nmt::kern::mm_tn_openmp},
  };
  const int mm_sizes[][3] = {
      {64, 64, 64}, {128, 128, 128}, {256, 256, 256},
      {512, 512, 512}, {1024, 256, 1024}, {1, 1024, 4096},
  };
  for (const auto& kernel : mm_kernels) {
    for (const auto& size : mm_sizes) {
      int m = size[0], k = size[1], n = size[2];
      auto a = random_buffer(static_cast<std::size_t>(m) * k, rng);
      auto b = random_buffer(static_cast<std::size_t>(k) * n, rng);
      std::vector<double> c_serial(static_cast<std::size_t>(m) * n);
      std::vector<double> c_openmp(c_serial.size());

      int repeats = repeats_for(static_cast<long>(m) * k * n);
      double serial_ms = time_ms(
          [&] { kernel.serial(a.data(), b.data(), c_serial.data(), m, k, n,
                              false); },
          repeats);
      double openmp_ms = time_ms(
          [&] { kernel.openmp(a.data(), b.data(), c_openmp.data(), m, k, n,
                              false); },
          repeats);
      bool same = std::memcmp(c_serial.data(), c_openmp.data(),
                              c_serial.size() * sizeof(double)) == 0;

      char size_label[32];
      std::snprintf(size_label, sizeof(size_label), "%dx%dx%d", m, k, n);
      std::printf("%-10s %-18s %12.3f %12.3f %8.2fx  %s\n", kernel.name,
                  size_label, serial_ms, openmp_ms, serial_ms / openmp_ms,
                  same ? "yes" : "NO - MISMATCH");
      if (!same) return 1;
    }
  }

  const MapKernel map_kernels[] = {
      {"vtanh", nmt::kern::vtanh_serial, nmt::kern::vtanh_openmp},
      {"vsigmoid", nmt::kern::vsigmoid_serial, nmt::kern::vsigmoid_openmp},
  };
  const int map_sizes[] = {1 << 12, 1 << 16, 1 << 20, 1 << 24};
  for (const auto& kernel : map_kernels) {
    for (int n : map_sizes) {
      auto x = random_buffer(static_cast<std::size_t>(n), rng);
      std::vector<double> y_serial(x.size());
      std::vector<double> y_openmp(x.size());

      int repeats = repeats_for(n);
      double serial_ms = time_ms(
          [&] { kernel.serial(x.data(), y_serial.data(), n); }, repeats);
      double openmp_ms = time_ms(
          [&] { kernel.openmp(x.data(), y_openmp.data(), n); }, repeats);
      bool same = std::memcmp(y_serial.data(), y_openmp.data(),
                              y_serial.size() * sizeof(double)) == 0;

      char size_label[32];
      std::snprintf(size_label, sizeof(size_label), "%d", n);
      std::printf("%-10s %-18s %12.3f %12.3f %8.2fx  %s\n", kernel.name,
                  size_label, serial_ms, openmp_ms, serial_ms / openmp_ms,
                  same ? "yes" : "NO - MISMATCH");
      if (!same) return 1;
    }
  }
  return 0;
}
