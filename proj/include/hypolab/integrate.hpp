#pragma once
#include <cstdint>
#include <vector>

#include "hypolab/problem.hpp"
#include "hypolab/rng.hpp"

namespace hypolab {

// States on the path grid, (M+1) x dim row-major. u(t_0) = u0.
struct Trajectory {
  int dim = 0;
  std::size_t steps = 0;  // M
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<double> u0;
  std::vector<double> states;

  double dt() const { return horizon / static_cast<double>(steps); }
  const double* state(std::size_t j) const { return states.data() + j * dim; }
  std::vector<double> state_vec(std::size_t j) const {
    return {state(j), state(j) + dim};
  }
};

// Per-mode exponential-Euler step weights for step size dt:
// decay_k = e^{-lambda_k dt}, phi_k = (1 - e^{-lambda_k dt}) / lambda_k.
// decay + lambda .* phi = 1 holds exactly up to roundoff.
struct StepCoeffs {
  std::vector<double> decay, phi;
};

StepCoeffs step_coefficients(const CompiledProblem& p, double dt);

// u_{j+1} = decay .* (u_j + Q dW_j) + phi .* (F + Lc)(u_j).
// Exact on F = 0, Q = 0 for any step count. Aborts with BlowUpError when
// |u| > 1e6 (1 + |u0|); empty u0 starts at the problem's initial state.
Trajectory integrate(const CompiledProblem& p, const BrownianPath& path,
                     const std::vector<double>& u0 = {});

// Same scheme on the shifted equation dv/dt = -Av + (F+Lc)(v + QW) - A QW;
// v + QW tracks integrate() on matched paths to the scheme's strong order.
Trajectory integrate_shifted(const CompiledProblem& p, const BrownianPath& path,
                             const std::vector<double>& u0 = {});

// J_{s,T} h: the variational flow along traj with frozen left-point
// coefficients, one-step map S_j = diag(decay) + diag(phi) D(F+Lc)(u_j).
std::vector<double> jacobian_forward(const CompiledProblem& p, const Trajectory& traj,
                                     std::size_t s_index, const std::vector<double>& h);

// rho(s_j) = J_{s_j,T}^* xi for every grid index, (M+1) x dim row-major;
// uses the exact transposes of the forward one-step maps, so
// <rho(s), h> = <xi, J_{s,T} h> is an identity up to roundoff.
std::vector<double> adjoint_backward(const CompiledProblem& p, const Trajectory& traj,
                                     const std::vector<double>& xi);

// Q W(t_j) for every node, (M+1) x dim row-major.
std::vector<double> noise_shift(const CompiledProblem& p, const BrownianPath& path);

}  // namespace hypolab
