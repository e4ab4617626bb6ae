#include "hypolab/kernels.hpp"

namespace hypolab::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void combine_scalar(const double* a, const double* x, const double* b, const double* y, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * x[i] + b[i] * y[i];
}

void matvec_scalar(const double* rows, std::size_t m, std::size_t n, const double* v, double* out) {
  for (std::size_t r = 0; r < m; ++r) out[r] = dot_scalar(rows + r * n, v, n);
}

double trapz_sq_scalar(const double* y, std::size_t m, double dt) {
  if (m < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) acc += y[i] * y[i];
  acc -= 0.5 * (y[0] * y[0] + y[m - 1] * y[m - 1]);
  return acc * dt;
}

double trapz_dot_scalar(const double* y, const double* z, std::size_t m, double dt) {
  if (m < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) acc += y[i] * z[i];
  acc -= 0.5 * (y[0] * z[0] + y[m - 1] * z[m - 1]);
  return acc * dt;
}

}  // namespace

const Kernels& scalar() {
  static const Kernels k = {"scalar",        dot_scalar,      axpy_scalar,
                            combine_scalar,  matvec_scalar,   trapz_sq_scalar,
                            trapz_dot_scalar};
  return k;
}

}  // namespace hypolab::kernels
