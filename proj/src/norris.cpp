#include "hypolab/norris.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hypolab/errors.hpp"
#include "hypolab/kernels.hpp"

namespace hypolab {

namespace {

unsigned long long multiindex_count(int d, int m) {
  // sum_{l=0}^m C(d+l-1, l), kept in exact integer arithmetic
  unsigned long long total = 0, c = 1;  // C(d-1, 0)
  for (int l = 0; l <= m; ++l) {
    total += c;
    if (c > (1ull << 60) / (d + l + 1))
      throw BudgetError("multiindices: count overflows 64 bits", total);
    c = c * (d + l) / (l + 1);  // C(d+l, l+1), product stays divisible
  }
  return total;
}

struct Thresholds {
  double small, large;
};

Thresholds dichotomy_thresholds(int m, double eps) {
  const double pow3m = std::pow(3.0, -static_cast<double>(m));
  return {std::pow(eps, pow3m), std::pow(eps, -pow3m / 3.0)};
}

DichotomyOutcome classify(double sup_z, double sup_coeff, double lip_coeff, double eps,
                          const Thresholds& t) {
  if (sup_z > eps) return DichotomyOutcome::VACUOUS;
  if (sup_coeff <= t.small) return DichotomyOutcome::SMALL_COEFF;
  if (lip_coeff >= t.large) return DichotomyOutcome::LARGE_LIP;
  return DichotomyOutcome::VIOLATION;
}

void emit_indices(int d, int m, int first, Multiindex& cur, std::vector<Multiindex>& out) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == m) return;
  for (int ch = first; ch < d; ++ch) {
    cur.push_back(ch);
    emit_indices(d, m, ch, cur, out);
    cur.pop_back();
  }
}

// uniforms in (0,1) addressed by (seed, stream, index)
struct UniformStream {
  Philox eng;
  std::uint64_t stream;

  double at(std::uint64_t i) const {
    auto b = eng.block(i, stream);
    std::uint64_t x = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
  }
};

}  // namespace

std::vector<Multiindex> enumerate_multiindices(int d, int m, unsigned long long budget) {
  if (d < 1 || m < 0) throw DimensionError("multiindices: need d >= 1, m >= 0");
  unsigned long long count = multiindex_count(d, m);
  if (count > budget)
    throw BudgetError("multiindices: enumeration of " + std::to_string(count) +
                          " indices passes the budget",
                      count);
  std::vector<Multiindex> out;
  out.reserve(count);
  Multiindex cur;
  emit_indices(d, m, 0, cur, out);
  return out;
}

CoeffProcess make_coeff_process(std::vector<double> values, double dt,
                                double declared_lipschitz) {
  if (values.empty()) throw DimensionError("coefficient process: empty grid");
  if (!(dt > 0.0)) throw DimensionError("coefficient process: nonpositive step");
  CoeffProcess c;
  c.values = std::move(values);
  c.lipschitz_bound = declared_lipschitz;
  for (double v : c.values) c.sup_bound = std::max(c.sup_bound, std::abs(v));
  for (std::size_t j = 0; j + 1 < c.values.size(); ++j)
    c.measured_lipschitz =
        std::max(c.measured_lipschitz, std::abs(c.values[j + 1] - c.values[j]) / dt);
  if (c.measured_lipschitz > declared_lipschitz * (1.0 + 1e-9))
    throw ConfigError("coefficient process moves faster than its declared Lipschitz bound");
  return c;
}

double wiener_monomial(const BrownianPath& path, const Multiindex& alpha,
                       std::size_t t_index) {
  double v = 1.0;
  for (int ch : alpha) v *= path.value(t_index, ch);
  return v;
}

std::vector<double> eval_Z(const WienerPolyProcess& proc, const BrownianPath& path) {
  if (path.channels != proc.d) throw DimensionError("eval_Z: path channels != process d");
  const std::size_t nodes = path.steps + 1;
  std::vector<double> z(nodes, 0.0);
  for (const auto& [alpha, coeff] : proc.coeffs) {
    if (static_cast<int>(alpha.size()) > proc.m)
      throw DimensionError("eval_Z: coefficient order above the declared m");
    if (coeff.values.size() != nodes)
      throw DimensionError("eval_Z: coefficient grid != path grid");
    for (std::size_t j = 0; j < nodes; ++j)
      z[j] += coeff.values[j] * wiener_monomial(path, alpha, j);
  }
  return z;
}

DichotomyReport dichotomy_check(const WienerPolyProcess& proc, const BrownianPath& path,
                                double eps) {
  if (std::abs(path.horizon - 1.0) > 1e-12)
    throw ConfigError("dichotomy: stated on the unit time interval");
  if (!(eps > 0.0) || eps > 1.0) throw ConfigError("dichotomy: eps must lie in (0, 1]");

  DichotomyReport r;
  Thresholds t = dichotomy_thresholds(proc.m, eps);
  r.small_threshold = t.small;
  r.large_threshold = t.large;

  for (double z : eval_Z(proc, path)) r.sup_z = std::max(r.sup_z, std::abs(z));
  for (const auto& [alpha, coeff] : proc.coeffs) {
    r.sup_coeff = std::max(r.sup_coeff, coeff.sup_bound);
    r.lip_coeff = std::max(r.lip_coeff, coeff.measured_lipschitz);
  }
  r.outcome = classify(r.sup_z, r.sup_coeff, r.lip_coeff, eps, t);
  return r;
}

ViolationCurve exceptional_probability(const ProcessFamily& family, int d, int m,
                                       const std::vector<double>& eps_grid, int path_count,
                                       int procs_per_path, std::size_t grid_steps,
                                       std::uint64_t seed) {
  ViolationCurve curve;
  curve.epsilons = eps_grid;
  curve.path_count = path_count;
  curve.procs_per_path = procs_per_path;
  const std::size_t ne = eps_grid.size();
  std::vector<long> pair_hits(ne, 0), path_hits(ne, 0);

  for (int pi = 0; pi < path_count; ++pi) {
    BrownianPath path = sample_path(grid_steps, d, 1.0, seed, static_cast<std::uint64_t>(pi));
    std::vector<char> path_flag(ne, 0);
    for (int qi = 0; qi < procs_per_path; ++qi) {
      WienerPolyProcess proc = family(path, static_cast<std::uint64_t>(qi));
      // the three norms are eps-free; classify against the whole grid at once
      DichotomyReport probe = dichotomy_check(proc, path, 1.0);
      for (std::size_t k = 0; k < ne; ++k) {
        if (classify(probe.sup_z, probe.sup_coeff, probe.lip_coeff, eps_grid[k],
                     dichotomy_thresholds(m, eps_grid[k])) != DichotomyOutcome::VIOLATION)
          continue;
        ++pair_hits[k];
        path_flag[k] = 1;
      }
    }
    for (std::size_t k = 0; k < ne; ++k) path_hits[k] += path_flag[k];
  }

  curve.pair_hits = pair_hits;
  curve.path_hits = path_hits;
  curve.pair_fraction.resize(ne);
  curve.path_fraction.resize(ne);
  curve.path_stderr.resize(ne);
  const double pairs = static_cast<double>(path_count) * procs_per_path;
  for (std::size_t k = 0; k < ne; ++k) {
    curve.pair_fraction[k] = pair_hits[k] / pairs;
    double f = static_cast<double>(path_hits[k]) / path_count;
    curve.path_fraction[k] = f;
    curve.path_stderr[k] = std::sqrt(f * (1.0 - f) / path_count);
  }
  return curve;
}

// family draws ride a tagged key so a shared master seed cannot collide
// with the path streams
constexpr std::uint64_t kFamilyTag = 0x9E3779B97F4A7C15ull;

ProcessFamily constant_family(int d, int m, std::uint64_t seed) {
  return [d, m, seed](const BrownianPath& path, std::uint64_t index) {
    WienerPolyProcess proc;
    proc.d = d;
    proc.m = m;
    UniformStream u{Philox{seed ^ kFamilyTag}, (path.path_index << 20) | index};
    auto indices = enumerate_multiindices(d, m);
    const double dt = path.horizon / static_cast<double>(path.steps);
    for (std::size_t a = 0; a < indices.size(); ++a) {
      double v = 2.0 * u.at(a) - 1.0;
      proc.coeffs.emplace(indices[a],
                          make_coeff_process(std::vector<double>(path.steps + 1, v), dt, 0.0));
    }
    return proc;
  };
}

ProcessFamily adversarial_tracker_family(int d, int m, std::uint64_t seed) {
  if (m < 1) throw ConfigError("adversarial family needs m >= 1");
  return [d, m, seed](const BrownianPath& path, std::uint64_t index) {
    WienerPolyProcess proc;
    proc.d = d;
    proc.m = m;
    UniformStream u{Philox{seed ^ kFamilyTag}, (path.path_index << 20) | index};
    const std::size_t nodes = path.steps + 1;
    const double dt = path.horizon / static_cast<double>(path.steps);

    int ch = std::min(d - 1, static_cast<int>(u.at(0) * d));
    int order = 1 + std::min(m - 1, static_cast<int>(u.at(1) * m));

    if (u.at(2) < 0.5) {
      // resonant branch: Z rides the deepest monomial with a slow ramp
      // whose sup exceeds 1 and whose slope stays below 1, so neither
      // dichotomy branch applies and a pair violates exactly when
      // sup|Z| <= eps, a path small-ball event
      Multiindex target(m, ch);
      const double lift = 1.02 + 0.18 * u.at(3);
      const double ramp = 0.1 * u.at(4);
      const double bait = 0.05 * u.at(5);
      std::vector<double> base(nodes), coeff(nodes);
      for (std::size_t j = 0; j < nodes; ++j) {
        base[j] = bait * std::sin(std::numbers::pi * (j * dt));
        coeff[j] = lift + ramp * (j * dt);
      }
      proc.coeffs.emplace(Multiindex{},
                          make_coeff_process(base, dt, bait * std::numbers::pi));
      // absolute pad absorbs node rounding at the lift's magnitude
      proc.coeffs.emplace(target, make_coeff_process(coeff, dt, ramp + 1e-9));
      return proc;
    }

    Multiindex target(order, ch);
    const double c = 0.5 + 0.4 * u.at(3);
    const double slope_budget = 1.0 + 9.0 * u.at(4);
    std::vector<double> base(nodes);
    for (std::size_t j = 0; j < nodes; ++j)
      base[j] = c * std::sin(std::numbers::pi * (j * dt));
    proc.coeffs.emplace(Multiindex{},
                        make_coeff_process(base, dt, c * std::numbers::pi));

    // tracker branch: slope-limited, value-clipped pursuit of
    // -A_empty / W_target; held where the monomial sits near zero
    std::vector<double> track(nodes, 0.0);
    for (std::size_t j = 1; j < nodes; ++j) {
      double w = wiener_monomial(path, target, j);
      double want = std::abs(w) > 0.05 ? -base[j] / w : track[j - 1];
      want = std::clamp(want, -1.0, 1.0);
      track[j] = std::clamp(want, track[j - 1] - slope_budget * dt,
                            track[j - 1] + slope_budget * dt);
    }
    proc.coeffs.emplace(target, make_coeff_process(track, dt, slope_budget));
    return proc;
  };
}

namespace {

// B_{alpha + i} = -[B_alpha, q_i] / (mult_i(alpha) + 1)
std::vector<std::pair<Multiindex, PolySum<Rational>>> expansion_fields(
    const ProblemSpec& spec, unsigned long long term_budget) {
  PolySum<Rational> drift = spec.drift();
  const int d = spec.noise_dim();
  const int depth = drift.max_degree();
  std::vector<std::pair<Multiindex, PolySum<Rational>>> fields;
  fields.emplace_back(Multiindex{}, drift);
  std::size_t terms = 0;
  for (std::size_t a = 0; a < fields.size(); ++a) {
    const auto [alpha, field] = fields[a];
    for (const auto& p : field.parts()) terms += p.term_count();
    if (terms > term_budget)
      throw BudgetError("expansion: symbolic term count passed the budget", terms);
    if (static_cast<int>(alpha.size()) >= depth) continue;
    int first = alpha.empty() ? 0 : alpha.back();
    for (int ch = first; ch < d; ++ch) {
      PolyMap<Rational> q(0, spec.dim);
      for (int k = 0; k < spec.dim; ++k)
        q.add_coeff(static_cast<std::uint32_t>(k), {}, spec.noise[ch][k]);
      int mult = static_cast<int>(std::count(alpha.begin(), alpha.end(), ch));
      PolySum<Rational> next =
          lie_bracket(field, q).scaled(Rational(-1, mult + 1));
      if (next.is_zero()) continue;
      Multiindex na = alpha;
      na.push_back(ch);
      fields.emplace_back(std::move(na), std::move(next));
    }
  }
  return fields;
}

}  // namespace

std::vector<std::pair<Multiindex, PolySum<Rational>>> shift_expansion_fields(
    const ProblemSpec& spec, unsigned long long term_budget) {
  return expansion_fields(spec, term_budget);
}

ExpansionReport bracket_expansion_check(const ProblemSpec& spec, const Trajectory& vtraj,
                                        const BrownianPath& path, const PolySum<Rational>& G,
                                        const std::vector<double>& xi,
                                        unsigned long long term_budget) {
  if (path.steps != vtraj.steps) throw DimensionError("expansion: path grid != trajectory grid");
  if (static_cast<int>(xi.size()) != spec.dim)
    throw DimensionError("expansion: direction length != dim");
  CompiledProblem p = compile(spec);
  const auto& K = kernels::active();
  const std::size_t n = static_cast<std::size_t>(p.dim);

  // G_alpha = [B_alpha, G]; drop identically zero ones
  std::vector<Multiindex> alphas;
  std::vector<PolySum<double>> g_alpha;
  std::size_t terms = 0;
  for (const auto& [alpha, field] : expansion_fields(spec, term_budget)) {
    PolySum<Rational> ga = lie_bracket(field, G);
    if (ga.is_zero()) continue;
    for (const auto& part : ga.parts()) terms += part.term_count();
    if (terms > term_budget)
      throw BudgetError("expansion: symbolic term count passed the budget", terms);
    alphas.push_back(alpha);
    g_alpha.push_back(to_double_sum(ga));
  }
  PolySum<double> gd = to_double_sum(G);

  // u-nodes reconstructed exactly as v + QW; the adjoint rows along them
  // turn <xi, J_{s,T} x> into <rho(s), x>
  std::vector<double> qw = noise_shift(p, path);
  Trajectory utraj = vtraj;
  for (std::size_t k = 0; k < utraj.states.size(); ++k) utraj.states[k] += qw[k];
  std::vector<double> rho = adjoint_backward(p, utraj, xi);

  ExpansionReport rep;
  rep.dt = vtraj.dt();
  rep.alpha_count = static_cast<int>(alphas.size());
  rep.term_count = terms;

  double phi_next = K.dot(rho.data() + vtraj.steps * n, gd.evaluate(vtraj.state_vec(vtraj.steps)).data(), n);
  for (std::size_t j = vtraj.steps; j-- > 0;) {
    std::vector<double> v = vtraj.state_vec(j);
    double phi = K.dot(rho.data() + j * n, gd.evaluate(v).data(), n);
    double rhs = 0.0;
    const double* rho_next = rho.data() + (j + 1) * n;
    for (std::size_t a = 0; a < alphas.size(); ++a)
      rhs += wiener_monomial(path, alphas[a], j) *
             K.dot(rho_next, g_alpha[a].evaluate(v).data(), n);
    double res = (phi_next - phi) / rep.dt - rhs;
    rep.residual_sup = std::max(rep.residual_sup, std::abs(res));
    phi_next = phi;
  }
  return rep;
}

}  // namespace hypolab
