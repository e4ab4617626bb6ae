#pragma once
#include <cstddef>
#include <string>

namespace hypolab::kernels {

// Hot inner-loop primitives used by the integrator and quadrature code.
// One scalar reference implementation, one AVX2 implementation; selected
// once at startup from CPU capability, overridable for equivalence tests.
struct Kernels {
  const char* name;
  // sum_i x_i y_i
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = a.*x + b.*y   (fused exponential-Euler state update)
  void (*combine)(const double* a, const double* x, const double* b, const double* y, double* out,
                  std::size_t n);
  // out_r = rows[r] . v  for r < m, rows row-major m x n
  void (*matvec)(const double* rows, std::size_t m, std::size_t n, const double* v, double* out);
  // trapezoid rule for sum y_i^2 on a uniform grid of spacing dt (m nodes)
  double (*trapz_sq)(const double* y, std::size_t m, double dt);
  // trapezoid rule for sum y_i z_i on a uniform grid of spacing dt (m nodes)
  double (*trapz_dot)(const double* y, const double* z, std::size_t m, double dt);
};

const Kernels& scalar();
#if defined(HYPOLAB_BUILD_AVX2)
const Kernels& avx2();
#endif

// Active implementation: AVX2 when the CPU supports it, else scalar.
// HYPOLAB_KERNELS=scalar|avx2 in the environment forces a choice.
const Kernels& active();

// Test/CLI hook; pass "" to restore automatic selection.
void force_backend(const std::string& name);

}  // namespace hypolab::kernels
