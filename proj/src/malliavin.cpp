#include "hypolab/malliavin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hypolab/errors.hpp"
#include "hypolab/kernels.hpp"

namespace hypolab {

namespace {

// <rho(s_j), q_i> for all nodes and channels; row i holds one channel's
// integrand on the grid.
std::vector<double> channel_integrands(const CompiledProblem& p, const std::vector<double>& rho,
                                       std::size_t nodes) {
  const auto& K = kernels::active();
  const std::size_t n = static_cast<std::size_t>(p.dim);
  std::vector<double> g(static_cast<std::size_t>(p.noise_dim) * nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double* row = rho.data() + j * n;
    for (int i = 0; i < p.noise_dim; ++i)
      g[static_cast<std::size_t>(i) * nodes + j] =
          K.dot(row, p.noise.data() + static_cast<std::size_t>(i) * n, n);
  }
  return g;
}

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat one_step_matrix(const CompiledProblem& p, const StepCoeffs& c, const double* u) {
  const int n = p.dim;
  Mat S = Mat::Zero(n, n);
  std::vector<double> h(n, 0.0), col(n);
  for (int j = 0; j < n; ++j) {
    h[j] = 1.0;
    p.apply_jacobian(u, h.data(), col.data());
    h[j] = 0.0;
    for (int i = 0; i < n; ++i) S(i, j) = c.phi[i] * col[i];
    S(j, j) += c.decay[j];
  }
  return S;
}

}  // namespace

double malliavin_quadratic_form(const CompiledProblem& p, const Trajectory& traj,
                                const std::vector<double>& xi) {
  const auto& K = kernels::active();
  std::vector<double> rho = adjoint_backward(p, traj, xi);
  const std::size_t nodes = traj.steps + 1;
  std::vector<double> g = channel_integrands(p, rho, nodes);
  double total = 0.0;
  for (int i = 0; i < p.noise_dim; ++i)
    total += K.trapz_sq(g.data() + static_cast<std::size_t>(i) * nodes, nodes, traj.dt());
  return total;
}

ReducedForm reduced_malliavin(const CompiledProblem& p, const Trajectory& traj) {
  const int n = p.dim;
  const std::size_t nodes = traj.steps + 1;
  StepCoeffs c = step_coefficients(p, traj.dt());

  // z_r(s) = J_{0,s}^{-*} e_r, advanced by solving S_j^* z(s_{j+1}) = z(s_j);
  // then <e_r, J_{0,s}^{-1} q_i> = <z_r(s), q_i>.
  Mat Z = Mat::Identity(n, n);  // row r = z_r
  Mat J = Mat::Identity(n, n);
  std::vector<double> g(static_cast<std::size_t>(n) * p.noise_dim * nodes);
  auto gslot = [&](int r, int i, std::size_t j) -> double& {
    return g[(static_cast<std::size_t>(r) * p.noise_dim + i) * nodes + j];
  };
  Eigen::Map<const Mat> Q(p.noise.data(), p.noise_dim, n);

  ReducedForm out;
  const std::size_t check_every = std::max<std::size_t>(1, traj.steps / 256);
  for (std::size_t j = 0; j <= traj.steps; ++j) {
    Mat dots = Z * Q.transpose();  // n x noise_dim
    for (int r = 0; r < n; ++r)
      for (int i = 0; i < p.noise_dim; ++i) gslot(r, i, j) = dots(r, i);
    if (j == traj.steps) break;
    Mat S = one_step_matrix(p, c, traj.state(j));
    J = S * J;
    Eigen::PartialPivLU<Mat> lu(S.transpose());
    Z = (lu.solve(Z.transpose())).transpose();
    if ((j + 1) % check_every == 0 || j + 1 == traj.steps) {
      Eigen::JacobiSVD<Mat> svd(J);
      double smin = svd.singularValues()(n - 1);
      out.condition = smin > 0.0 ? svd.singularValues()(0) / smin
                                 : std::numeric_limits<double>::infinity();
      if (!(out.condition < 1e12))
        throw NumericalError("reduced form: J_{0,s} condition number passed 1e12");
    }
  }

  const auto& K = kernels::active();
  out.C.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r)
    for (int r2 = r; r2 < n; ++r2) {
      double v = 0.0;
      for (int i = 0; i < p.noise_dim; ++i)
        v += K.trapz_dot(&gslot(r, i, 0), &gslot(r2, i, 0), nodes, traj.dt());
      out.C[static_cast<std::size_t>(r) * n + r2] = v;
      out.C[static_cast<std::size_t>(r2) * n + r] = v;
    }
  out.J.assign(J.data(), J.data() + static_cast<std::size_t>(n) * n);
  return out;
}

double reduced_quadratic_form(const CompiledProblem& p, const Trajectory& traj,
                              const std::vector<double>& xi) {
  if (static_cast<int>(xi.size()) != p.dim)
    throw DimensionError("reduced form: direction length != dim");
  ReducedForm rf = reduced_malliavin(p, traj);
  const int n = p.dim;
  // <xi, J C J^T xi> = <J^T xi, C J^T xi>
  std::vector<double> y(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) y[b] += xi[a] * rf.J[static_cast<std::size_t>(a) * n + b];
  double v = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) v += y[a] * rf.C[static_cast<std::size_t>(a) * n + b] * y[b];
  return v;
}

MalliavinSample assemble_projected_matrix(const CompiledProblem& p, std::uint64_t seed,
                                          std::uint64_t path_index, std::size_t steps, int N) {
  if (N < 1 || N > p.dim) throw DimensionError("projected matrix: N out of range");
  const auto& K = kernels::active();
  BrownianPath path = sample_path(steps, p.noise_dim, p.horizon, seed, path_index);
  Trajectory traj = integrate(p, path);
  const std::size_t nodes = steps + 1;

  std::vector<double> g(static_cast<std::size_t>(N) * p.noise_dim * nodes);
  std::vector<double> xi(p.dim, 0.0);
  for (int r = 0; r < N; ++r) {
    xi[r] = 1.0;
    std::vector<double> rho = adjoint_backward(p, traj, xi);
    xi[r] = 0.0;
    std::vector<double> gr = channel_integrands(p, rho, nodes);
    std::copy(gr.begin(), gr.end(),
              g.begin() + static_cast<std::size_t>(r) * p.noise_dim * nodes);
  }

  MalliavinSample s;
  s.N = N;
  s.t = traj.horizon;
  s.seed = seed;
  s.path_index = path_index;
  s.matrix.assign(static_cast<std::size_t>(N) * N, 0.0);
  auto row = [&](int r, int i) {
    return g.data() + (static_cast<std::size_t>(r) * p.noise_dim + i) * nodes;
  };
  for (int r = 0; r < N; ++r)
    for (int r2 = r; r2 < N; ++r2) {
      double v = 0.0;
      for (int i = 0; i < p.noise_dim; ++i)
        v += K.trapz_dot(row(r, i), row(r2, i), nodes, traj.dt());
      s.matrix[static_cast<std::size_t>(r) * N + r2] = v;
      s.matrix[static_cast<std::size_t>(r2) * N + r] = v;
    }

  Eigen::Map<const Mat> M(s.matrix.data(), N, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  double mn = es.eigenvalues()(0);
  if (mn < -1e-10)
    throw NumericalError("projected matrix: eigenvalue below -1e-10, duality is broken");
  if (mn < 0.0) {
    s.clamped = 1;
    mn = 0.0;
  }
  s.min_eigenvalue = mn;
  return s;
}

std::vector<double> log_eps_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo)) throw DimensionError("eps grid: need 0 < lo < hi");
  std::vector<double> eps;
  const double step = 1.0 / per_decade;
  const double top = std::log10(hi), bot = std::log10(lo);
  for (double e = top; e > bot - 0.5 * step; e -= step)
    eps.push_back(std::pow(10.0, std::max(e, bot)));
  return eps;
}

TailFit tail_fit(const CompiledProblem& p, std::uint64_t seed, std::size_t steps, int N,
                 int sample_count, const std::vector<double>& eps_grid) {
  if (sample_count < 100) throw DimensionError("tail fit: need at least 100 samples");
  TailFit f;
  f.epsilons = eps_grid;
  f.sample_count = sample_count;
  f.samples.reserve(sample_count);
  for (int i = 0; i < sample_count; ++i)
    f.samples.push_back(
        assemble_projected_matrix(p, seed, static_cast<std::uint64_t>(i), steps, N)
            .min_eigenvalue);

  f.frequencies.resize(eps_grid.size());
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    int c = 0;
    for (double s : f.samples)
      if (s <= eps_grid[k]) ++c;
    f.frequencies[k] = static_cast<double>(c) / sample_count;
  }

  // slope of log freq against log eps over the informative points
  std::vector<double> x, y;
  for (std::size_t k = 0; k < eps_grid.size(); ++k)
    if (f.frequencies[k] > 0.0 && f.frequencies[k] < 1.0) {
      x.push_back(std::log(eps_grid[k]));
      y.push_back(std::log(f.frequencies[k]));
    }
  if (x.size() < 3) return f;
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) return f;
  f.fitted_p = sxy / sxx;
  double rss = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double r = y[k] - my - f.fitted_p * (x[k] - mx);
    rss += r * r;
  }
  f.stderr_p = m > 2 ? std::sqrt(rss / (m - 2) / sxx) : 0.0;
  f.fit_valid = true;
  return f;
}

DensityEstimate kde_density(const std::vector<std::vector<double>>& samples,
                            const std::vector<std::vector<double>>& query_points) {
  if (samples.size() < 50) throw DimensionError("kde: need at least 50 samples");
  const int N = static_cast<int>(samples.front().size());
  if (N < 1 || N > 3) throw DimensionError("kde: tabulated output limited to N <= 3");
  const std::size_t m = samples.size();
  for (const auto& s : samples)
    if (static_cast<int>(s.size()) != N) throw DimensionError("kde: ragged sample list");

  DensityEstimate est;
  est.N = N;
  est.bandwidth.resize(N);
  const double silverman = std::pow(4.0 / ((N + 2.0) * m), 1.0 / (N + 4.0));
  for (int j = 0; j < N; ++j) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s[j];
    mean /= m;
    double var = 0.0;
    for (const auto& s : samples) var += (s[j] - mean) * (s[j] - mean);
    var /= (m > 1 ? m - 1 : 1);
    double sd = std::sqrt(var);
    if (sd == 0.0) {
      est.degenerate = true;  // point mass: spike at the bandwidth floor
      sd = 1e-12;
    }
    est.bandwidth[j] = sd * silverman;
  }

  double bw_prod = 1.0;
  for (int j = 0; j < N; ++j) bw_prod *= est.bandwidth[j];
  const double norm = 1.0 / (m * std::pow(2.0 * std::numbers::pi, N / 2.0) * bw_prod);
  est.values.reserve(query_points.size());
  for (const auto& q : query_points) {
    if (static_cast<int>(q.size()) != N) throw DimensionError("kde: query dimension mismatch");
    double acc = 0.0;
    for (const auto& s : samples) {
      double e = 0.0;
      for (int j = 0; j < N; ++j) {
        double z = (q[j] - s[j]) / est.bandwidth[j];
        e += z * z;
      }
      acc += std::exp(-0.5 * e);
    }
    est.values.push_back(norm * acc);
  }
  return est;
}

}  // namespace hypolab
