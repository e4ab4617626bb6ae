#pragma once
#include <string>
#include <vector>

#include "hypolab/polymap.hpp"

namespace hypolab {

// Finite mode truncation of  du = -Au dt + F(u) dt + Q dW.
// A is diagonal in this basis (lambda positive, nondecreasing); F collects
// the multilinear terms of degree >= 2; an optional degree-1 correction
// holds drift pieces that are not part of A. Coefficients are exact; the
// simulation side works on the compiled double view.
struct ProblemSpec {
  std::string name = "custom";
  int dim = 1;
  std::vector<Rational> lambda;
  PolySum<Rational> F;
  PolyMap<Rational> linear_correction;       // degree 1, or zero map
  std::vector<std::vector<Rational>> noise;  // columns q_i, each of length dim
  Rational horizon = Rational(1);
  std::vector<Rational> u0;                  // empty means the origin

  // Span check target: rank is taken on the leading span_target modes
  // (0 means dim). Sharp truncations set this below dim when the last
  // classes have no in-band cascade partners.
  int span_target = 0;
  // Word depth that saturates the cascade for this problem; used as the
  // default depth_limit by the CLI and the experiment runner.
  int bracket_depth = 6;

  int noise_dim() const { return static_cast<int>(noise.size()); }

  // Full drift -A + linear_correction + F as one polynomial map.
  PolySum<Rational> drift() const;

  // Shape and sign checks; throws ConfigError with a description.
  void validate() const;
};

// Flat monomial program for the explicit drift part (F plus the linear
// correction), plus double copies of everything the integrator touches.
struct CompiledProblem {
  static constexpr int kMaxDegree = 6;

  struct MonoTerm {
    std::uint32_t out;
    double c;  // monomial coefficient, multiplicity folded in
    std::uint8_t deg;
    std::uint32_t idx[kMaxDegree];
  };

  int dim = 0;
  int noise_dim = 0;
  double horizon = 1.0;
  int max_explicit_degree = 0;
  std::vector<double> lambda;
  std::vector<double> u0;
  std::vector<double> noise;  // row r = column q_r, row-major noise_dim x dim
  std::vector<MonoTerm> terms;

  // out = F(u) + Lc u
  void apply_explicit(const double* u, double* out) const;
  // out = DF(u) h + Lc h
  void apply_jacobian(const double* u, const double* h, double* out) const;
  // out = DF(u)^T y + Lc^T y; exact transpose of apply_jacobian
  void apply_jacobian_transpose(const double* u, const double* y, double* out) const;
};

CompiledProblem compile(const ProblemSpec& spec);

}  // namespace hypolab
