#include "hypolab/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypolab/errors.hpp"
#include "hypolab/kernels.hpp"

namespace hypolab {

namespace {

void check_grid(const CompiledProblem& p, const BrownianPath& path) {
  if (path.channels != p.noise_dim)
    throw DimensionError("integrate: path channels != noise dimension");
  if (path.steps < 1) throw DimensionError("integrate: path needs at least one step");
}

std::vector<double> start_state(const CompiledProblem& p, const std::vector<double>& u0) {
  if (u0.empty()) return p.u0;
  if (static_cast<int>(u0.size()) != p.dim)
    throw DimensionError("integrate: initial condition length != dim");
  return u0;
}

Trajectory make_frame(const CompiledProblem& p, const BrownianPath& path,
                      const std::vector<double>& u0) {
  Trajectory t;
  t.dim = p.dim;
  t.steps = path.steps;
  t.horizon = path.horizon;
  t.seed = path.seed;
  t.path_index = path.path_index;
  t.u0 = u0;
  t.states.assign((path.steps + 1) * static_cast<std::size_t>(p.dim), 0.0);
  return t;
}

}  // namespace

StepCoeffs step_coefficients(const CompiledProblem& p, double dt) {
  StepCoeffs c;
  c.decay.resize(p.dim);
  c.phi.resize(p.dim);
  for (int k = 0; k < p.dim; ++k) {
    double l = p.lambda[k];
    c.decay[k] = std::exp(-l * dt);
    c.phi[k] = l > 0.0 ? -std::expm1(-l * dt) / l : dt;
  }
  return c;
}

Trajectory integrate(const CompiledProblem& p, const BrownianPath& path,
                     const std::vector<double>& u0) {
  check_grid(p, path);
  const auto& K = kernels::active();
  const std::size_t n = static_cast<std::size_t>(p.dim);
  std::vector<double> u = start_state(p, u0);
  Trajectory traj = make_frame(p, path, u);
  const double bound = 1e6 * (1.0 + std::sqrt(K.dot(u.data(), u.data(), n)));
  StepCoeffs c = step_coefficients(p, traj.dt());

  std::vector<double> fu(n), shifted(n), next(n);
  std::copy(u.begin(), u.end(), traj.states.begin());
  for (std::size_t j = 0; j < path.steps; ++j) {
    p.apply_explicit(u.data(), fu.data());
    for (std::size_t k = 0; k < n; ++k) shifted[k] = u[k];
    for (int r = 0; r < p.noise_dim; ++r) {
      const double dw = path.increment(j, r);
      K.axpy(dw, p.noise.data() + static_cast<std::size_t>(r) * n, shifted.data(), n);
    }
    K.combine(c.decay.data(), shifted.data(), c.phi.data(), fu.data(), next.data(), n);
    if (!(K.dot(next.data(), next.data(), n) <= bound * bound))
      throw BlowUpError("integrate: state norm passed the blow-up guard at step " +
                            std::to_string(j + 1),
                        j + 1);
    std::copy(next.begin(), next.end(), traj.states.begin() + (j + 1) * n);
    u.swap(next);
  }
  return traj;
}

std::vector<double> noise_shift(const CompiledProblem& p, const BrownianPath& path) {
  check_grid(p, path);
  const std::size_t n = static_cast<std::size_t>(p.dim);
  std::vector<double> qw((path.steps + 1) * n, 0.0);
  for (std::size_t j = 0; j <= path.steps; ++j) {
    double* row = qw.data() + j * n;
    for (int r = 0; r < p.noise_dim; ++r)
      kernels::active().axpy(path.value(j, r), p.noise.data() + static_cast<std::size_t>(r) * n,
                             row, n);
  }
  return qw;
}

Trajectory integrate_shifted(const CompiledProblem& p, const BrownianPath& path,
                             const std::vector<double>& u0) {
  check_grid(p, path);
  const auto& K = kernels::active();
  const std::size_t n = static_cast<std::size_t>(p.dim);
  std::vector<double> v = start_state(p, u0);
  Trajectory traj = make_frame(p, path, v);
  const double bound = 1e6 * (1.0 + std::sqrt(K.dot(v.data(), v.data(), n)));
  StepCoeffs c = step_coefficients(p, traj.dt());
  std::vector<double> qw = noise_shift(p, path);

  std::vector<double> arg(n), rhs(n), next(n);
  std::copy(v.begin(), v.end(), traj.states.begin());
  for (std::size_t j = 0; j < path.steps; ++j) {
    const double* w = qw.data() + j * n;
    for (std::size_t k = 0; k < n; ++k) arg[k] = v[k] + w[k];
    p.apply_explicit(arg.data(), rhs.data());
    for (std::size_t k = 0; k < n; ++k) rhs[k] -= p.lambda[k] * w[k];
    K.combine(c.decay.data(), v.data(), c.phi.data(), rhs.data(), next.data(), n);
    if (!(K.dot(next.data(), next.data(), n) <= bound * bound))
      throw BlowUpError("integrate_shifted: state norm passed the blow-up guard at step " +
                            std::to_string(j + 1),
                        j + 1);
    std::copy(next.begin(), next.end(), traj.states.begin() + (j + 1) * n);
    v.swap(next);
  }
  return traj;
}

std::vector<double> jacobian_forward(const CompiledProblem& p, const Trajectory& traj,
                                     std::size_t s_index, const std::vector<double>& h) {
  if (s_index > traj.steps) throw DimensionError("jacobian_forward: start index past the grid");
  if (static_cast<int>(h.size()) != p.dim)
    throw DimensionError("jacobian_forward: direction length != dim");
  const auto& K = kernels::active();
  const std::size_t n = static_cast<std::size_t>(p.dim);
  StepCoeffs c = step_coefficients(p, traj.dt());
  std::vector<double> x = h, dfx(n), next(n);
  for (std::size_t j = s_index; j < traj.steps; ++j) {
    p.apply_jacobian(traj.state(j), x.data(), dfx.data());
    K.combine(c.decay.data(), x.data(), c.phi.data(), dfx.data(), next.data(), n);
    x.swap(next);
  }
  return x;
}

std::vector<double> adjoint_backward(const CompiledProblem& p, const Trajectory& traj,
                                     const std::vector<double>& xi) {
  if (static_cast<int>(xi.size()) != p.dim)
    throw DimensionError("adjoint_backward: direction length != dim");
  const std::size_t n = static_cast<std::size_t>(p.dim);
  StepCoeffs c = step_coefficients(p, traj.dt());
  std::vector<double> rho((traj.steps + 1) * n);
  std::copy(xi.begin(), xi.end(), rho.begin() + traj.steps * n);
  std::vector<double> scaled(n), back(n);
  for (std::size_t j = traj.steps; j-- > 0;) {
    const double* up = rho.data() + (j + 1) * n;
    for (std::size_t k = 0; k < n; ++k) scaled[k] = c.phi[k] * up[k];
    p.apply_jacobian_transpose(traj.state(j), scaled.data(), back.data());
    double* row = rho.data() + j * n;
    for (std::size_t k = 0; k < n; ++k) row[k] = c.decay[k] * up[k] + back[k];
  }
  return rho;
}

}  // namespace hypolab
