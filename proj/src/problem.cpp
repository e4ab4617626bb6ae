#include "hypolab/problem.hpp"

#include "hypolab/errors.hpp"

namespace hypolab {

PolySum<Rational> ProblemSpec::drift() const {
  PolySum<Rational> d(dim);
  PolyMap<Rational> lin(1, dim);
  for (int k = 0; k < dim; ++k)
    lin.add_coeff(static_cast<std::uint32_t>(k), {static_cast<std::uint32_t>(k)}, -lambda[k]);
  if (!linear_correction.is_zero()) lin += linear_correction;
  lin.normalize();
  d.add(lin);
  d.add(F);
  return d;
}

void ProblemSpec::validate() const {
  if (dim < 1) throw ConfigError("problem: dim must be >= 1");
  if (static_cast<int>(lambda.size()) != dim)
    throw ConfigError("problem: eigenvalue list length != dim");
  for (int k = 0; k < dim; ++k) {
    if (sgn(lambda[k]) <= 0) throw ConfigError("problem: eigenvalues must be positive");
    if (k > 0 && lambda[k] < lambda[k - 1])
      throw ConfigError("problem: eigenvalues must be nondecreasing");
  }
  if (!F.is_zero()) {
    if (F.dim() != dim) throw ConfigError("problem: F dimension mismatch");
    for (const auto& p : F.parts()) {
      if (p.degree() < 2) throw ConfigError("problem: F terms must have degree >= 2");
      if (p.degree() > CompiledProblem::kMaxDegree)
        throw ConfigError("problem: F degree exceeds supported maximum");
    }
  }
  if (!linear_correction.is_zero()) {
    if (linear_correction.degree() != 1 || linear_correction.dim() != dim)
      throw ConfigError("problem: linear correction must be a degree-1 map on dim modes");
  }
  if (noise.empty()) throw ConfigError("problem: need at least one noise column");
  for (const auto& q : noise)
    if (static_cast<int>(q.size()) != dim) throw ConfigError("problem: noise column length != dim");
  if (sgn(horizon) <= 0) throw ConfigError("problem: horizon must be positive");
  if (!u0.empty() && static_cast<int>(u0.size()) != dim)
    throw ConfigError("problem: initial condition length != dim");
  if (span_target < 0 || span_target > dim)
    throw ConfigError("problem: span target out of range");
  if (bracket_depth < 1) throw ConfigError("problem: bracket depth must be >= 1");
}

CompiledProblem compile(const ProblemSpec& spec) {
  spec.validate();
  CompiledProblem c;
  c.dim = spec.dim;
  c.noise_dim = spec.noise_dim();
  c.horizon = to_double(spec.horizon);
  c.lambda.reserve(spec.dim);
  for (const auto& l : spec.lambda) c.lambda.push_back(to_double(l));
  c.u0.assign(spec.dim, 0.0);
  for (std::size_t k = 0; k < spec.u0.size(); ++k) c.u0[k] = to_double(spec.u0[k]);
  c.noise.resize(static_cast<std::size_t>(c.noise_dim) * c.dim);
  for (int r = 0; r < c.noise_dim; ++r)
    for (int k = 0; k < c.dim; ++k)
      c.noise[static_cast<std::size_t>(r) * c.dim + k] = to_double(spec.noise[r][k]);

  auto push_terms = [&](const PolyMap<Rational>& p) {
    for (const auto& [key, coeff] : p.table()) {
      CompiledProblem::MonoTerm t{};
      t.out = key.first;
      t.c = to_double(coeff) * static_cast<double>(multiset_multiplicity(key.second));
      t.deg = static_cast<std::uint8_t>(key.second.size());
      for (std::size_t a = 0; a < key.second.size(); ++a) t.idx[a] = key.second[a];
      c.terms.push_back(t);
    }
    c.max_explicit_degree = std::max(c.max_explicit_degree, p.degree());
  };
  if (!spec.linear_correction.is_zero()) push_terms(spec.linear_correction);
  for (const auto& p : spec.F.parts()) push_terms(p);
  return c;
}

void CompiledProblem::apply_explicit(const double* u, double* out) const {
  for (int k = 0; k < dim; ++k) out[k] = 0.0;
  for (const auto& t : terms) {
    double v = t.c;
    for (int a = 0; a < t.deg; ++a) v *= u[t.idx[a]];
    out[t.out] += v;
  }
}

void CompiledProblem::apply_jacobian(const double* u, const double* h, double* out) const {
  for (int k = 0; k < dim; ++k) out[k] = 0.0;
  for (const auto& t : terms) {
    for (int a = 0; a < t.deg; ++a) {
      if (a > 0 && t.idx[a] == t.idx[a - 1]) continue;  // distinct slots once
      double v = t.c * h[t.idx[a]];
      int seen = 0;
      for (int b = 0; b < t.deg; ++b) {
        if (t.idx[b] == t.idx[a] && seen == 0) {
          seen = 1;  // drop one factor: the differentiated slot
          continue;
        }
        v *= u[t.idx[b]];
      }
      // multiplicity of idx[a] in the monomial
      int mult = 0;
      for (int b = 0; b < t.deg; ++b)
        if (t.idx[b] == t.idx[a]) ++mult;
      out[t.out] += static_cast<double>(mult) * v;
    }
  }
}

void CompiledProblem::apply_jacobian_transpose(const double* u, const double* y, double* out) const {
  for (int k = 0; k < dim; ++k) out[k] = 0.0;
  for (const auto& t : terms) {
    const double yi = y[t.out];
    if (yi == 0.0) continue;
    for (int a = 0; a < t.deg; ++a) {
      if (a > 0 && t.idx[a] == t.idx[a - 1]) continue;
      double v = t.c * yi;
      int seen = 0;
      for (int b = 0; b < t.deg; ++b) {
        if (t.idx[b] == t.idx[a] && seen == 0) {
          seen = 1;
          continue;
        }
        v *= u[t.idx[b]];
      }
      int mult = 0;
      for (int b = 0; b < t.deg; ++b)
        if (t.idx[b] == t.idx[a]) ++mult;
      out[t.idx[a]] += static_cast<double>(mult) * v;
    }
  }
}

}  // namespace hypolab
