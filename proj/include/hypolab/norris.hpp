#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "hypolab/integrate.hpp"
#include "hypolab/problem.hpp"
#include "hypolab/rng.hpp"

namespace hypolab {

// Sorted multiset over noise channels 0..d-1; the empty index is admitted
// and indexes the deterministic coefficient.
using Multiindex = std::vector<int>;

// All multisets of order <= m over d channels, lexicographic; the count is
// sum_l C(d+l-1, l) and is checked against the budget before enumeration.
std::vector<Multiindex> enumerate_multiindices(int d, int m,
                                               unsigned long long budget = 1'000'000);

// Coefficient process on a uniform grid, piecewise linear between nodes.
// The measured max adjacent slope must stay within the declared Lipschitz
// bound (factor 1 + 1e-9); sup and slope norms are grid norms.
struct CoeffProcess {
  std::vector<double> values;
  double lipschitz_bound = 0.0;
  double sup_bound = 0.0;
  double measured_lipschitz = 0.0;
};

CoeffProcess make_coeff_process(std::vector<double> values, double dt,
                                double declared_lipschitz);

// Z(t) = sum_{|alpha| <= m} A_alpha(t) W_alpha(t); absent coefficients are
// identically zero.
struct WienerPolyProcess {
  int d = 1;
  int m = 0;
  std::map<Multiindex, CoeffProcess> coeffs;
};

// prod_i W_{alpha_i}(t); 1 for the empty index.
double wiener_monomial(const BrownianPath& path, const Multiindex& alpha,
                       std::size_t t_index);

std::vector<double> eval_Z(const WienerPolyProcess& proc, const BrownianPath& path);

// On paths with |Z| <= eps everywhere, either every coefficient is small
// (sup <= eps^{3^-m}) or some coefficient moves fast (Lip >= eps^{-3^-(m+1)}).
// VIOLATION marks a pair satisfying the premise but neither branch.
enum class DichotomyOutcome { VACUOUS, SMALL_COEFF, LARGE_LIP, VIOLATION };

struct DichotomyReport {
  DichotomyOutcome outcome = DichotomyOutcome::VACUOUS;
  double sup_z = 0.0;
  double sup_coeff = 0.0;
  double lip_coeff = 0.0;
  double small_threshold = 0.0;
  double large_threshold = 0.0;
};

// Requires a unit-horizon path and eps in (0, 1].
DichotomyReport dichotomy_check(const WienerPolyProcess& proc, const BrownianPath& path,
                                double eps);

// Produces process index -> coefficient process set for a given path; must
// honor its declared bounds.
using ProcessFamily = std::function<WienerPolyProcess(const BrownianPath&, std::uint64_t)>;

// Empirical violation curve over an ensemble: at each eps, the fraction of
// (path, process) pairs in VIOLATION, and the fraction of paths with at
// least one violating process (the event lives on the path).
struct ViolationCurve {
  std::vector<double> epsilons;
  std::vector<long> pair_hits;  // violating (path, process) pairs, per eps
  std::vector<long> path_hits;  // paths with at least one violating process
  std::vector<double> pair_fraction;
  std::vector<double> path_fraction;
  std::vector<double> path_stderr;  // binomial, per eps
  int path_count = 0;
  int procs_per_path = 0;
};

ViolationCurve exceptional_probability(const ProcessFamily& family, int d, int m,
                                       const std::vector<double>& eps_grid, int path_count,
                                       int procs_per_path, std::size_t grid_steps,
                                       std::uint64_t seed);

// Constant-in-time coefficients drawn uniformly from [-1, 1].
ProcessFamily constant_family(int d, int m, std::uint64_t seed);

// Equal mixture of two generators on one drawn index alpha = {ch}^k.
// Resonant branch: A_alpha is a slow ramp with sup > 1 and slope < 1, so a
// pair violates exactly when sup|Z| <= eps and the violation set shrinks
// with eps. Tracker branch: A_alpha is the slope-limited, value-clipped
// projection of -A_empty / W_alpha with A_empty = c sin(pi t).
ProcessFamily adversarial_tracker_family(int d, int m, std::uint64_t seed);

// Forward-difference residual of the flow-derivative expansion
//   d/ds <xi, J_{s,T} G(v(s))> = sum_alpha W_alpha(s) <xi, J_{s,T} G_alpha(v(s))>
// on the shifted trajectory, with G_alpha = [B_alpha, G] and
// B_alpha = (-1)^{|alpha|} / prod_j mult_j! * [..[drift, q_a1],..,q_al].
// The sup over grid steps decays at first order in the step size.
struct ExpansionReport {
  double dt = 0.0;
  double residual_sup = 0.0;
  int alpha_count = 0;
  std::size_t term_count = 0;  // table entries across all G_alpha
};

ExpansionReport bracket_expansion_check(const ProblemSpec& spec, const Trajectory& vtraj,
                                        const BrownianPath& path, const PolySum<Rational>& G,
                                        const std::vector<double>& xi,
                                        unsigned long long term_budget = 1'000'000);

// The B_alpha family of the expansion, exposed for equality tests against
// direct symbolic differentiation.
std::vector<std::pair<Multiindex, PolySum<Rational>>> shift_expansion_fields(
    const ProblemSpec& spec, unsigned long long term_budget = 1'000'000);

}  // namespace hypolab
