#pragma once
#include <cstdint>
#include <vector>

#include "hypolab/integrate.hpp"
#include "hypolab/problem.hpp"

namespace hypolab {

// <xi, M_T xi> = sum_i integral_0^T <xi, J_{s,T} q_i>^2 ds via one backward
// sweep and trapezoid quadrature on the path grid. Non-negative.
double malliavin_quadratic_form(const CompiledProblem& p, const Trajectory& traj,
                                const std::vector<double>& xi);

// Reduced form and flow data: C = sum_i int <., J_{0,s}^{-1} q_i>^2 ds as a
// full dim x dim matrix, J = J_{0,T}, both row-major. M_T = J C J^T holds to
// quadrature accuracy. condition tracks cond_2(J_{0,s}) along the sweep;
// above 1e12 the propagation aborts (near-degenerate linearization).
struct ReducedForm {
  std::vector<double> C;
  std::vector<double> J;
  double condition = 1.0;
};

ReducedForm reduced_malliavin(const CompiledProblem& p, const Trajectory& traj);

double reduced_quadratic_form(const CompiledProblem& p, const Trajectory& traj,
                              const std::vector<double>& xi);

// Projected matrix (Pi M_T Pi)_{r r'} on the leading N modes, from one
// trajectory and N backward sweeps.
struct MalliavinSample {
  int N = 0;
  double t = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<double> matrix;  // N x N row-major, symmetric
  double min_eigenvalue = 0.0;
  int clamped = 0;  // eigenvalues in [-1e-10, 0) zeroed
};

MalliavinSample assemble_projected_matrix(const CompiledProblem& p, std::uint64_t seed,
                                          std::uint64_t path_index, std::size_t steps, int N);

// Empirical small-eigenvalue tail P(lambda_min <= eps) over an ensemble,
// with a log-log least-squares slope over the grid points whose frequency
// lies strictly inside (0,1). fit_valid requires >= 3 such points.
struct TailFit {
  std::vector<double> epsilons;     // decreasing
  std::vector<double> frequencies;  // P(lambda_min <= eps)
  std::vector<double> samples;      // raw lambda_min draws, path-index order
  int sample_count = 0;
  bool fit_valid = false;
  double fitted_p = 0.0;
  double stderr_p = 0.0;
};

std::vector<double> log_eps_grid(double lo, double hi, int per_decade = 12);

TailFit tail_fit(const CompiledProblem& p, std::uint64_t seed, std::size_t steps, int N,
                 int sample_count, const std::vector<double>& eps_grid);

// Gaussian-kernel density on a per-dimension Silverman bandwidth; N <= 3.
// A zero-spread dimension marks the estimate degenerate (point mass), the
// bandwidth floor keeps evaluation finite.
struct DensityEstimate {
  int N = 0;
  std::vector<double> bandwidth;
  bool degenerate = false;
  std::vector<double> values;  // one per query point
};

DensityEstimate kde_density(const std::vector<std::vector<double>>& samples,
                            const std::vector<std::vector<double>>& query_points);

}  // namespace hypolab
