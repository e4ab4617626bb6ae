#include "hypolab/vectorfield.hpp"

namespace hypolab {

VecField VecField::from_polymap(const PolyMap<Rational>& g) {
  VecField f(g.dim());
  for (const auto& [key, c] : g.table())
    f.add_monomial(key.first, key.second, c * Rational(multiset_multiplicity(key.second)));
  return f;
}

VecField VecField::from_polysum(const PolySum<Rational>& s) {
  VecField f(s.dim());
  for (const auto& p : s.parts())
    for (const auto& [key, c] : p.table())
      f.add_monomial(key.first, key.second, c * Rational(multiset_multiplicity(key.second)));
  return f;
}

void VecField::add_monomial(std::uint32_t out, Multiset exps, Rational c) {
  if (hypolab::is_zero(c)) return;
  if (out >= static_cast<std::uint32_t>(dim_)) throw DimensionError("vecfield: bad output index");
  std::sort(exps.begin(), exps.end());
  auto key = std::make_pair(out, std::move(exps));
  auto it = table_.find(key);
  if (it == table_.end())
    table_.emplace(std::move(key), std::move(c));
  else {
    it->second += c;
    if (hypolab::is_zero(it->second)) table_.erase(it);
  }
}

std::vector<Rational> VecField::evaluate(const std::vector<Rational>& u) const {
  if (static_cast<int>(u.size()) != dim_) throw DimensionError("vecfield: dimension mismatch");
  std::vector<Rational> out(dim_, Rational(0));
  for (const auto& [key, c] : table_) {
    Rational v = c;
    for (auto j : key.second) v *= u[j];
    out[key.first] += v;
  }
  return out;
}

std::map<Multiset, Rational> VecField::partial(std::uint32_t i, std::uint32_t j) const {
  // d/du_j (c u^J) = c * mult_j(J) * u^(J minus one j)
  std::map<Multiset, Rational> out;
  for (const auto& [key, c] : table_) {
    if (key.first != i) continue;
    const Multiset& J = key.second;
    unsigned long mult = 0;
    for (auto x : J)
      if (x == j) ++mult;
    if (mult == 0) continue;
    Multiset rest;
    rest.reserve(J.size() - 1);
    bool dropped = false;
    for (auto x : J) {
      if (!dropped && x == j) {
        dropped = true;
        continue;
      }
      rest.push_back(x);
    }
    Rational v = c * Rational(mult);
    auto it = out.find(rest);
    if (it == out.end())
      out.emplace(std::move(rest), std::move(v));
    else {
      it->second += v;
      if (hypolab::is_zero(it->second)) out.erase(it);
    }
  }
  return out;
}

VecField symbolic_vectorfield_bracket(const VecField& p, const VecField& q) {
  if (p.dim() != q.dim()) throw DimensionError("vecfield bracket: dimension mismatch");
  const auto n = static_cast<std::uint32_t>(p.dim());
  VecField r(p.dim());

  // [P,Q]_i = sum_j ( dQ_i/du_j * P_j  -  dP_i/du_j * Q_j )
  auto accumulate = [&](const VecField& outer, const VecField& inner, int sign) {
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = 0; j < n; ++j) {
        auto d = outer.partial(i, j);
        if (d.empty()) continue;
        for (const auto& [ikey, ic] : inner.table()) {
          if (ikey.first != j) continue;
          for (const auto& [dkey, dc] : d) {
            Multiset merged = dkey;
            merged.insert(merged.end(), ikey.second.begin(), ikey.second.end());
            r.add_monomial(i, std::move(merged), Rational(sign) * dc * ic);
          }
        }
      }
    }
  };
  accumulate(q, p, +1);
  accumulate(p, q, -1);
  return r;
}

}  // namespace hypolab
