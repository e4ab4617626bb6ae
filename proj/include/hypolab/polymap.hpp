#pragma once
#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hypolab/errors.hpp"
#include "hypolab/rational.hpp"

namespace hypolab {

// Sorted multiset over mode indices 0..dim-1; the slot key of a symmetric
// coefficient table.
using Multiset = std::vector<std::uint32_t>;

// k!/(m_1! m_2! ... ): number of distinct slot assignments realizing the
// multiset. Degrees here are tiny, so 64 bits never overflow. Returned as
// unsigned long so the value converts cleanly to every coefficient scalar.
unsigned long multiset_multiplicity(const Multiset& in);

// (k-1)!/((m_j-1)! prod_{j'!=j} m_j'!): assignments with one slot pinned at j.
unsigned long pinned_multiplicity(const Multiset& in, std::uint32_t j);

// Symmetric k-multilinear map R^n x ... x R^n -> R^n held as a sparse table
// coeff(i, J) = G(e_J)_i over sorted multisets J. Multiplicities are counted
// at evaluation time, never folded into stored coefficients. An empty table
// normalizes to degree 0: the zero map.
template <class S>
class PolyMap {
 public:
  using Term = std::pair<std::uint32_t, Multiset>;
  using Table = std::map<Term, S>;

  PolyMap() : degree_(0), dim_(1) {}
  PolyMap(int degree, int dim) : degree_(degree), dim_(dim) {
    if (degree < 0 || dim < 1) throw DimensionError("polymap: bad degree/dim");
  }

  static PolyMap zero(int dim) { return PolyMap(0, dim); }

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  bool is_zero() const { return table_.empty(); }
  std::size_t term_count() const { return table_.size(); }
  const Table& table() const { return table_; }

  // Adds c to coeff(out, in); `in` is sorted on entry. Exact zeros are pruned.
  void add_coeff(std::uint32_t out, Multiset in, S c) {
    if (out >= static_cast<std::uint32_t>(dim_))
      throw DimensionError("polymap: output index out of range");
    if (static_cast<int>(in.size()) != degree_)
      throw DimensionError("polymap: slot count != degree");
    for (auto j : in)
      if (j >= static_cast<std::uint32_t>(dim_))
        throw DimensionError("polymap: slot index out of range");
    std::sort(in.begin(), in.end());
    auto key = Term{out, std::move(in)};
    auto it = table_.find(key);
    if (it == table_.end()) {
      if (!hypolab::is_zero(c)) table_.emplace(std::move(key), std::move(c));
    } else {
      it->second += c;
      if (hypolab::is_zero(it->second)) table_.erase(it);
    }
  }

  void set_coeff(std::uint32_t out, Multiset in, S c) {
    std::sort(in.begin(), in.end());
    table_.erase(Term{out, in});
    add_coeff(out, std::move(in), std::move(c));
  }

  // Collapses an empty table to the canonical degree-0 zero map.
  void normalize() {
    if (table_.empty()) degree_ = 0;
  }

  // G(u,...,u). Degree 0 returns the stored constants.
  std::vector<S> evaluate(const std::vector<S>& u) const {
    check_dim(u);
    std::vector<S> out(dim_, S(0));
    for (const auto& [key, c] : table_) {
      S v = c * S(multiset_multiplicity(key.second));
      for (auto j : key.second) v *= u[j];
      out[key.first] += v;
    }
    return out;
  }

  // G(u,...,u,h): one slot takes h, the rest u. Undefined for degree 0.
  std::vector<S> evaluate_directional(const std::vector<S>& u, const std::vector<S>& h) const {
    if (degree_ == 0)
      throw DimensionError("polymap: directional evaluation needs degree >= 1");
    check_dim(u);
    check_dim(h);
    std::vector<S> out(dim_, S(0));
    for (const auto& [key, c] : table_) {
      const Multiset& in = key.second;
      for (std::size_t a = 0; a < in.size(); ++a) {
        if (a > 0 && in[a] == in[a - 1]) continue;  // each distinct slot value once
        S v = c * S(pinned_multiplicity(in, in[a])) * h[in[a]];
        for (std::size_t b = 0; b < in.size(); ++b) {
          if (b == a) continue;
          v *= u[in[b]];
        }
        // skip one factor of u[in[a]]: the pinned slot
        out[key.first] += v;
      }
    }
    return out;
  }

  PolyMap& operator+=(const PolyMap& o) {
    if (o.is_zero()) return *this;
    if (is_zero() && degree_ != o.degree_) degree_ = o.degree_;
    if (degree_ != o.degree_ || dim_ != o.dim_)
      throw DimensionError("polymap: += shape mismatch");
    for (const auto& [key, c] : o.table_) add_coeff(key.first, key.second, c);
    normalize();
    return *this;
  }

  PolyMap scaled(const S& a) const {
    PolyMap r(degree_, dim_);
    if (hypolab::is_zero(a)) {
      r.normalize();
      return r;
    }
    for (const auto& [key, c] : table_) r.table_.emplace(key, c * a);
    r.normalize();
    return r;
  }

  bool operator==(const PolyMap& o) const {
    if (is_zero() && o.is_zero()) return dim_ == o.dim_;
    return degree_ == o.degree_ && dim_ == o.dim_ && table_ == o.table_;
  }

 private:
  void check_dim(const std::vector<S>& u) const {
    if (static_cast<int>(u.size()) != dim_)
      throw DimensionError("polymap: argument dimension mismatch");
  }

  int degree_, dim_;
  Table table_;
};

PolyMap<double> to_double_map(const PolyMap<Rational>& g);

// [G1,G2](u) = l G2(u,...,u,G1(u)) - k G1(u,...,u,G2(u)), the symmetric
// (k+l-1)-linear map with that diagonal. Computed by polarized slot
// substitution; the result's monomial table is de-polarized by dividing out
// multiplicities, so coefficients stay exact on the rational backend.
template <class S>
PolyMap<S> lie_bracket(const PolyMap<S>& g1, const PolyMap<S>& g2);

// text form, 1-based indices:
//   polymap <degree> <dim>
//   <out> : <j1> ... <jk> : <coeff>
//   end
std::string to_text(const PolyMap<Rational>& g);
std::string to_text(const PolyMap<double>& g);
PolyMap<Rational> polymap_rational_from_text(const std::string& text);
PolyMap<double> polymap_double_from_text(const std::string& text);

// Finite formal sum of PolyMaps with pairwise distinct degrees (a polynomial
// map). The zero sum is the empty list.
template <class S>
class PolySum {
 public:
  PolySum() : dim_(1) {}
  explicit PolySum(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  bool is_zero() const { return parts_.empty(); }
  const std::vector<PolyMap<S>>& parts() const { return parts_; }

  void add(const PolyMap<S>& g) {
    if (g.is_zero()) return;
    if (parts_.empty())
      dim_ = g.dim();
    else if (g.dim() != dim_)
      throw DimensionError("polysum: dimension mismatch");
    for (auto& p : parts_)
      if (p.degree() == g.degree()) {
        p += g;
        prune();
        return;
      }
    parts_.push_back(g);
    std::sort(parts_.begin(), parts_.end(),
              [](const PolyMap<S>& a, const PolyMap<S>& b) { return a.degree() < b.degree(); });
  }

  void add(const PolySum<S>& o) {
    for (const auto& p : o.parts_) add(p);
  }

  PolySum scaled(const S& a) const {
    PolySum r(dim_);
    for (const auto& p : parts_) r.add(p.scaled(a));
    return r;
  }

  const PolyMap<S>* part_of_degree(int k) const {
    for (const auto& p : parts_)
      if (p.degree() == k) return &p;
    return nullptr;
  }

  int max_degree() const { return parts_.empty() ? 0 : parts_.back().degree(); }

  std::vector<S> evaluate(const std::vector<S>& u) const {
    std::vector<S> out(dim_, S(0));
    for (const auto& p : parts_) {
      auto v = p.evaluate(u);
      for (int i = 0; i < dim_; ++i) out[i] += v[i];
    }
    return out;
  }

  bool operator==(const PolySum& o) const { return dim_ == o.dim_ && parts_ == o.parts_; }

 private:
  void prune() {
    parts_.erase(std::remove_if(parts_.begin(), parts_.end(),
                                [](const PolyMap<S>& p) { return p.is_zero(); }),
                 parts_.end());
  }

  int dim_;
  std::vector<PolyMap<S>> parts_;
};

PolySum<double> to_double_sum(const PolySum<Rational>& f);

// Bilinear extension of the bracket to polynomial maps.
template <class S>
PolySum<S> lie_bracket(const PolySum<S>& a, const PolySum<S>& b) {
  int dim = a.is_zero() ? b.dim() : a.dim();
  PolySum<S> r(dim);
  for (const auto& p : a.parts())
    for (const auto& q : b.parts()) r.add(lie_bracket(p, q));
  return r;
}

template <class S>
PolySum<S> lie_bracket(const PolyMap<S>& a, const PolySum<S>& b) {
  PolySum<S> wrapped(a.dim());
  wrapped.add(a);
  return lie_bracket(wrapped, b);
}

template <class S>
PolySum<S> lie_bracket(const PolySum<S>& a, const PolyMap<S>& b) {
  PolySum<S> wrapped(b.dim());
  wrapped.add(b);
  return lie_bracket(a, wrapped);
}

extern template class PolyMap<Rational>;
extern template class PolyMap<double>;
extern template class PolySum<Rational>;
extern template class PolySum<double>;
extern template PolyMap<Rational> lie_bracket(const PolyMap<Rational>&, const PolyMap<Rational>&);
extern template PolyMap<double> lie_bracket(const PolyMap<double>&, const PolyMap<double>&);

}  // namespace hypolab
