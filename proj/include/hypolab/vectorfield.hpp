#pragma once
#include <map>

#include "hypolab/polymap.hpp"

namespace hypolab {

// Polynomial vector field on R^n held in plain monomial form: coefficient of
// u^J in component i, multiplicities folded in. This is the independent
// reference representation for validating lie_bracket: its bracket is the
// classical DQ.P - DP.Q computed by formal differentiation, no polarization.
class VecField {
 public:
  using Table = std::map<std::pair<std::uint32_t, Multiset>, Rational>;

  explicit VecField(int dim = 1) : dim_(dim) {}

  static VecField from_polymap(const PolyMap<Rational>& g);
  static VecField from_polysum(const PolySum<Rational>& f);

  int dim() const { return dim_; }
  const Table& table() const { return table_; }
  bool is_zero() const { return table_.empty(); }

  void add_monomial(std::uint32_t out, Multiset exps, Rational c);
  std::vector<Rational> evaluate(const std::vector<Rational>& u) const;

  // d(component i)/du_j as a scalar polynomial table keyed by multiset.
  std::map<Multiset, Rational> partial(std::uint32_t i, std::uint32_t j) const;

  bool operator==(const VecField& o) const { return dim_ == o.dim_ && table_ == o.table_; }

 private:
  int dim_;
  Table table_;
};

// Classical vector-field bracket [P,Q] = DQ.P - DP.Q via formal partials.
VecField symbolic_vectorfield_bracket(const VecField& p, const VecField& q);

}  // namespace hypolab
