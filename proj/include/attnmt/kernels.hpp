#pragma once

// Dense inner-loop kernels behind the tensor ops. Every kernel exists in a
// serial and an OpenMP flavor that produce bitwise-identical results: the
// parallel loops only split work across independent output elements, and the
// per-element arithmetic is shared between both drivers. The dispatcher picks
// a flavor from the active mode and the problem size.

namespace nmt::kern {

enum class Mode { automatic, serial, openmp };

Mode mode();
void set_mode(Mode m);
bool openmp_available();
int thread_count();

// All matrices are row-major. acc=false overwrites C, acc=true adds into it.

// C[m x n] = A[m x k] * B[k x n]
void mm_nn(const double* a, const double* b, double* c, int m, int k, int n,
           bool acc);
// C[m x n] = A[m x k] * B[n x k]^T
void mm_nt(const double* a, const double* b, double* c, int m, int k, int n,
           bool acc);
// C[m x n] = A[k x m]^T * B[k x n]
void mm_tn(const double* a, const double* b, double* c, int m, int k, int n,
           bool acc);

void vtanh(const double* x, double* y, int n);
void vsigmoid(const double* x, double* y, int n);

// Fixed-flavor entry points for the equivalence tests and the benchmark.
void mm_nn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
void mm_nn_openmp(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
void mm_nt_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
void mm_nt_openmp(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
void mm_tn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
void mm_tn_openmp(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
void vtanh_serial(const double* x, double* y, int n);
void vtanh_openmp(const double* x, double* y, int n);
void vsigmoid_serial(const double* x, double* y, int n);
void vsigmoid_openmp(const double* x, double* y, int n);

}  // namespace nmt::kern
