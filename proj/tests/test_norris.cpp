#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hypolab/errors.hpp"
#include "hypolab/integrate.hpp"
#include "hypolab/norris.hpp"
#include "hypolab/polymap.hpp"
#include "hypolab/presets.hpp"
#include "hypolab/problem.hpp"
#include "hypolab/rng.hpp"

using namespace hypolab;

namespace {

// five-node unit-horizon path on one channel with a small excursion
BrownianPath toy_path() {
  BrownianPath p;
  p.horizon = 1.0;
  p.steps = 4;
  p.channels = 1;
  p.values = {0.0, 0.1, -0.05, 0.2, 0.15};
  return p;
}

CoeffProcess constant_coeff(double v, std::size_t nodes, double dt) {
  return make_coeff_process(std::vector<double>(nodes, v), dt, 0.0);
}

WienerPolyProcess single_index_proc(int m, const Multiindex& alpha,
                                    CoeffProcess coeff) {
  WienerPolyProcess proc;
  proc.d = 1;
  proc.m = m;
  proc.coeffs.emplace(alpha, std::move(coeff));
  return proc;
}

}  // namespace

TEST_CASE("multiindex enumeration counts and order") {
  auto one = enumerate_multiindices(1, 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].empty());

  auto small = enumerate_multiindices(2, 1);
  REQUIRE(small.size() == 3);
  CHECK(small[0] == Multiindex{});
  CHECK(small[1] == Multiindex{0});
  CHECK(small[2] == Multiindex{1});

  // sum_l C(d+l-1, l) for d = 3, m = 3 is 1 + 3 + 6 + 10
  CHECK(enumerate_multiindices(3, 3).size() == 20);

  auto two = enumerate_multiindices(2, 2);
  REQUIRE(two.size() == 6);
  CHECK(two[2] == Multiindex{0, 0});
  CHECK(two[3] == Multiindex{0, 1});
  for (const auto& a : two)
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1] <= a[i]);

  CHECK_THROWS_AS(enumerate_multiindices(0, 1), DimensionError);
  try {
    enumerate_multiindices(3, 3, 10);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(e.count == 20);
  }
}

TEST_CASE("coefficient process norms and the slope contract") {
  auto c = make_coeff_process({0.0, 1.0, -0.5}, 0.5, 3.1);
  CHECK(c.sup_bound == 1.0);
  CHECK(c.measured_lipschitz == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(c.lipschitz_bound == 3.1);
  CHECK_THROWS_AS(make_coeff_process({0.0, 1.0}, 0.5, 1.9), ConfigError);
  CHECK_THROWS_AS(make_coeff_process({}, 0.5, 1.0), DimensionError);
  CHECK_THROWS_AS(make_coeff_process({1.0}, 0.0, 1.0), DimensionError);
  // single node has no slope
  CHECK(make_coeff_process({4.0}, 1.0, 0.0).measured_lipschitz == 0.0);
}

TEST_CASE("wiener monomials are plain products") {
  BrownianPath p;
  p.horizon = 1.0;
  p.steps = 2;
  p.channels = 2;
  p.values = {0.0, 0.0, 0.5, -2.0, 1.5, 0.25};
  CHECK(wiener_monomial(p, {}, 2) == 1.0);
  CHECK(wiener_monomial(p, {0}, 1) == 0.5);
  CHECK(wiener_monomial(p, {1}, 1) == -2.0);
  CHECK(wiener_monomial(p, {0, 0, 1}, 1) == doctest::Approx(0.25 * -2.0).epsilon(1e-15));
  CHECK(wiener_monomial(p, {0, 1}, 2) == doctest::Approx(1.5 * 0.25).epsilon(1e-15));
}

TEST_CASE("Z assembles coefficients against monomials") {
  auto path = toy_path();
  WienerPolyProcess proc;
  proc.d = 1;
  proc.m = 1;
  proc.coeffs.emplace(Multiindex{}, constant_coeff(0.5, 5, 0.25));
  std::vector<double> ramp = {0.0, 0.25, 0.5, 0.75, 1.0};
  proc.coeffs.emplace(Multiindex{0}, make_coeff_process(ramp, 0.25, 1.0));
  auto z = eval_Z(proc, path);
  REQUIRE(z.size() == 5);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(z[j] == doctest::Approx(0.5 + ramp[j] * path.values[j]).epsilon(1e-15));
}

TEST_CASE("Z validates its inputs") {
  auto path = toy_path();
  WienerPolyProcess wrong_d;
  wrong_d.d = 2;
  CHECK_THROWS_AS(eval_Z(wrong_d, path), DimensionError);

  auto deep = single_index_proc(0, {0}, constant_coeff(1.0, 5, 0.25));
  CHECK_THROWS_AS(eval_Z(deep, path), DimensionError);

  auto ragged = single_index_proc(1, {0}, constant_coeff(1.0, 4, 0.25));
  CHECK_THROWS_AS(eval_Z(ragged, path), DimensionError);
}

TEST_CASE("dichotomy thresholds are the stated powers") {
  auto path = toy_path();
  auto proc = single_index_proc(1, Multiindex{}, constant_coeff(0.0, 5, 0.25));
  auto r = dichotomy_check(proc, path, 1e-3);
  CHECK(r.small_threshold == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.large_threshold == doctest::Approx(std::pow(10.0, 1.0 / 3.0)).epsilon(1e-12));

  proc.m = 0;
  proc.coeffs.clear();
  proc.coeffs.emplace(Multiindex{}, constant_coeff(0.0, 5, 0.25));
  r = dichotomy_check(proc, path, 1e-3);
  CHECK(r.small_threshold == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(r.large_threshold == doctest::Approx(10.0).epsilon(1e-12));

  proc.m = 2;
  r = dichotomy_check(proc, path, 1e-3);
  CHECK(r.small_threshold == doctest::Approx(std::pow(10.0, -1.0 / 3.0)).epsilon(1e-12));
  CHECK(r.large_threshold == doctest::Approx(std::pow(10.0, 1.0 / 9.0)).epsilon(1e-12));
}

TEST_CASE("dichotomy guards the horizon and the eps range") {
  auto proc = single_index_proc(1, Multiindex{}, constant_coeff(0.0, 5, 0.5));
  BrownianPath stretched = toy_path();
  stretched.horizon = 2.0;
  CHECK_THROWS_AS(dichotomy_check(proc, stretched, 0.5), ConfigError);
  auto path = toy_path();
  CHECK_THROWS_AS(dichotomy_check(proc, path, 0.0), ConfigError);
  CHECK_THROWS_AS(dichotomy_check(proc, path, 1.5), ConfigError);
}

TEST_CASE("outcome classification on frozen cases") {
  auto path = toy_path();

  // |Z| tops eps: nothing to say
  auto loud = single_index_proc(1, Multiindex{}, constant_coeff(0.9, 5, 0.25));
  CHECK(dichotomy_check(loud, path, 0.5).outcome == DichotomyOutcome::VACUOUS);

  // small premise, small coefficients
  WienerPolyProcess quiet;
  quiet.d = 1;
  quiet.m = 1;
  quiet.coeffs.emplace(Multiindex{}, constant_coeff(0.01, 5, 0.25));
  quiet.coeffs.emplace(Multiindex{0}, constant_coeff(0.05, 5, 0.25));
  auto r = dichotomy_check(quiet, path, 0.216);
  CHECK(r.outcome == DichotomyOutcome::SMALL_COEFF);
  CHECK(r.sup_coeff == 0.05);

  // fast coefficient: Z = A W with A swinging at slope 12
  auto fast =
      single_index_proc(1, {0}, make_coeff_process({0.0, 3.0, 0.0, 3.0, 0.0}, 0.25, 12.0));
  r = dichotomy_check(fast, path, 0.61);
  CHECK(r.outcome == DichotomyOutcome::LARGE_LIP);
  CHECK(r.sup_z == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r.lip_coeff == doctest::Approx(12.0).epsilon(1e-15));

  // unit coefficient on a small path: the premise holds, neither branch fires
  auto unit = single_index_proc(1, {0}, constant_coeff(1.0, 5, 0.25));
  r = dichotomy_check(unit, path, 0.5);
  CHECK(r.outcome == DichotomyOutcome::VIOLATION);
  CHECK(r.sup_z == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.sup_coeff == 1.0);

  // small sup wins over a large slope
  auto mixed =
      single_index_proc(1, {0}, make_coeff_process({0.2, -0.2, 0.2, -0.2, 0.2}, 0.25, 1.6));
  r = dichotomy_check(mixed, path, 0.216);
  CHECK(r.lip_coeff >= r.large_threshold);
  CHECK(r.outcome == DichotomyOutcome::SMALL_COEFF);
}

TEST_CASE("violation window of a unit constant coefficient") {
  // Z = W, sup 0.2: vacuous below, violating up to 1, tautological at 1
  auto path = toy_path();
  auto unit = single_index_proc(1, {0}, constant_coeff(1.0, 5, 0.25));
  CHECK(dichotomy_check(unit, path, 0.1).outcome == DichotomyOutcome::VACUOUS);
  CHECK(dichotomy_check(unit, path, 0.2).outcome == DichotomyOutcome::VIOLATION);
  CHECK(dichotomy_check(unit, path, 0.5).outcome == DichotomyOutcome::VIOLATION);
  CHECK(dichotomy_check(unit, path, 0.999).outcome == DichotomyOutcome::VIOLATION);
  CHECK(dichotomy_check(unit, path, 1.0).outcome == DichotomyOutcome::SMALL_COEFF);
}

TEST_CASE("order zero never violates") {
  auto curve = exceptional_probability(constant_family(1, 0, 5), 1, 0,
                                       {1.0, 0.5, 0.1, 0.001}, 200, 50, 32, 3);
  for (long h : curve.pair_hits) CHECK(h == 0);
  for (long h : curve.path_hits) CHECK(h == 0);
}

TEST_CASE("constant coefficients stay clean on the low grid") {
  auto curve = exceptional_probability(constant_family(1, 1, 11), 1, 1,
                                       {0.1, 0.0316, 0.01, 0.00316, 0.001}, 300, 40, 100, 11);
  for (long h : curve.pair_hits) CHECK(h == 0);
}

TEST_CASE("constant family honors its declared contract") {
  auto family = constant_family(2, 1, 77);
  auto path = sample_path(16, 2, 1.0, 4, 9);
  auto proc = family(path, 3);
  CHECK(proc.d == 2);
  CHECK(proc.m == 1);
  CHECK(proc.coeffs.size() == 3);
  for (const auto& [alpha, coeff] : proc.coeffs) {
    CHECK(coeff.sup_bound <= 1.0);
    CHECK(coeff.measured_lipschitz == 0.0);
    for (double v : coeff.values) CHECK(v == coeff.values[0]);
  }
  // redrawing the same (path, index) reproduces the process
  auto again = family(path, 3);
  CHECK(eval_Z(again, path) == eval_Z(proc, path));
  auto other = family(path, 4);
  CHECK(eval_Z(other, path) != eval_Z(proc, path));
}

TEST_CASE("adversarial family is monotone and nontrivial at eps = 1") {
  auto curve = exceptional_probability(adversarial_tracker_family(1, 1, 21), 1, 1,
                                       {1.0, 0.316, 0.1, 0.0316}, 300, 30, 128, 21);
  CHECK(curve.pair_hits[0] > 0);
  for (std::size_t k = 1; k < curve.pair_hits.size(); ++k)
    CHECK(curve.pair_hits[k] <= curve.pair_hits[k - 1]);
  for (std::size_t k = 0; k < curve.epsilons.size(); ++k) {
    CHECK(curve.pair_fraction[k] ==
          doctest::Approx(curve.pair_hits[k] / 9000.0).epsilon(1e-15));
    double f = curve.path_fraction[k];
    CHECK(curve.path_stderr[k] == doctest::Approx(std::sqrt(f * (1.0 - f) / 300.0)).epsilon(1e-12));
    CHECK(curve.path_hits[k] <= curve.pair_hits[k]);
    CHECK(curve.path_hits[k] <= 300);
  }
  CHECK_THROWS_AS(adversarial_tracker_family(1, 0, 1), ConfigError);
}

TEST_CASE("adversarial processes respect their declared bounds") {
  auto family = adversarial_tracker_family(2, 2, 9);
  auto path = sample_path(64, 2, 1.0, 2, 5);
  for (std::uint64_t i = 0; i < 40; ++i) {
    auto proc = family(path, i);  // construction re-checks the slope contract
    CHECK(proc.d == 2);
    CHECK(proc.m == 2);
    CHECK(proc.coeffs.count(Multiindex{}) == 1);
    CHECK(proc.coeffs.size() == 2);
  }
}

TEST_CASE("expansion fields follow the nested-bracket closed form") {
  // direct route: left-nested brackets of the drift, one global scale
  ProblemSpec s;
  s.dim = 2;
  s.lambda = {Rational(1), Rational(2)};
  PolyMap<Rational> F(2, 2);
  F.add_coeff(0, {0, 1}, Rational(1));   // u0 u1
  F.add_coeff(1, {0, 0}, Rational(1));   // u0^2
  s.F.add(F);
  s.noise = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};

  auto fields = shift_expansion_fields(s);
  CHECK(fields.size() >= 4);
  for (const auto& [alpha, field] : fields) {
    PolySum<Rational> cur = s.drift();
    Rational denom(1);
    int run = 1;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      PolyMap<Rational> q(0, s.dim);
      for (int k = 0; k < s.dim; ++k)
        q.add_coeff(static_cast<std::uint32_t>(k), {}, s.noise[alpha[i]][k]);
      PolySum<Rational> next;
      for (const auto& part : cur.parts()) {
        auto b = lie_bracket(part, q);
        if (!b.is_zero()) next.add(b);
      }
      cur = next;
      run = (i > 0 && alpha[i] == alpha[i - 1]) ? run + 1 : 1;
      denom = denom * Rational(run);
    }
    Rational scale = alpha.size() % 2 == 0 ? Rational(1) : Rational(-1);
    scale = scale / denom;
    scale.canonicalize();
    CHECK(cur.scaled(scale) == field);
  }
}

TEST_CASE("single-channel cubic fields carry factorial weights") {
  auto s = make_preset("rd-cubic-4");
  auto fields = shift_expansion_fields(s);
  // depth tops out at the drift degree; one channel, so one chain
  REQUIRE(fields.size() == 4);
  CHECK(fields[0].first == Multiindex{});
  CHECK(fields[3].first == Multiindex{0, 0, 0});
  CHECK(fields[3].second.max_degree() == 0);
}

TEST_CASE("expansion residual shrinks at first order") {
  auto spec = make_preset("ou-2mode");
  auto p = compile(spec);
  auto fine = sample_path(400, p.noise_dim, 1.0, 31, 2);
  auto coarse = fine.coarsened(2);
  std::vector<double> xi = {1.0, -0.5};
  PolySum<Rational> G = spec.drift();

  auto residual = [&](const BrownianPath& path) {
    auto vtraj = integrate_shifted(p, path);
    auto rep = bracket_expansion_check(spec, vtraj, path, G, xi);
    CHECK(rep.alpha_count > 0);
    CHECK(rep.dt == doctest::Approx(path.horizon / path.steps).epsilon(1e-15));
    return rep.residual_sup;
  };
  double rc = residual(coarse);
  double rf = residual(fine);
  REQUIRE(rf > 0.0);
  double order = std::log2(rc / rf);
  CHECK(order >= 0.6);
  CHECK(order <= 1.4);
}

TEST_CASE("expansion validates its arguments") {
  auto spec = make_preset("ou-2mode");
  auto p = compile(spec);
  auto path = sample_path(32, p.noise_dim, 1.0, 1);
  auto vtraj = integrate_shifted(p, path);
  PolySum<Rational> G = spec.drift();
  CHECK_THROWS_AS(bracket_expansion_check(spec, vtraj, path, G, {1.0}), DimensionError);
  auto other = sample_path(16, p.noise_dim, 1.0, 1);
  CHECK_THROWS_AS(bracket_expansion_check(spec, vtraj, other, G, {1.0, 0.0}), DimensionError);
  CHECK_THROWS_AS(shift_expansion_fields(make_preset("rd-cubic-4"), 2), BudgetError);
}
