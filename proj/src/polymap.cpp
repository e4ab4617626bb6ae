#include "hypolab/polymap.hpp"

#include <charconv>
#include <sstream>

namespace hypolab {

unsigned long multiset_multiplicity(const Multiset& in) {
  unsigned long f = 1;
  for (std::size_t i = 1; i <= in.size(); ++i) f *= i;
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t j = i;
    unsigned long run = 1, runfac = 1;
    while (j + 1 < in.size() && in[j + 1] == in[i]) {
      ++j;
      runfac *= ++run;
    }
    f /= runfac;
    i = j + 1;
  }
  return f;
}

unsigned long pinned_multiplicity(const Multiset& in, std::uint32_t j) {
  Multiset rest;
  rest.reserve(in.size() - 1);
  bool removed = false;
  for (auto x : in) {
    if (!removed && x == j) {
      removed = true;
      continue;
    }
    rest.push_back(x);
  }
  if (!removed) return 0;
  return multiset_multiplicity(rest);
}

PolyMap<double> to_double_map(const PolyMap<Rational>& g) {
  PolyMap<double> r(g.degree(), g.dim());
  for (const auto& [key, c] : g.table()) r.add_coeff(key.first, key.second, to_double(c));
  r.normalize();
  return r;
}

PolySum<double> to_double_sum(const PolySum<Rational>& f) {
  PolySum<double> r(f.dim());
  for (const auto& p : f.parts()) r.add(to_double_map(p));
  return r;
}

namespace {

// Monomial accumulator for bracket assembly: coefficient of u^J in output i,
// multiplicities already included.
template <class S>
using MonoTable = std::map<std::pair<std::uint32_t, Multiset>, S>;

template <class S>
void mono_add(MonoTable<S>& t, std::uint32_t out, Multiset in, S c) {
  if (is_zero(c)) return;
  std::sort(in.begin(), in.end());
  auto key = std::make_pair(out, std::move(in));
  auto it = t.find(key);
  if (it == t.end())
    t.emplace(std::move(key), std::move(c));
  else {
    it->second += c;
    if (is_zero(it->second)) t.erase(it);
  }
}

// Accumulates coef * outer(u,...,u, inner(u)) into `t`, where the pinned
// slot of each outer term is substituted by every inner term with matching
// output component.
template <class S>
void accumulate_composition(MonoTable<S>& t, const PolyMap<S>& outer, const PolyMap<S>& inner,
                            const S& coef) {
  // group inner terms by output component
  std::map<std::uint32_t, std::vector<std::pair<Multiset, S>>> by_out;
  for (const auto& [key, c] : inner.table())
    by_out[key.first].emplace_back(key.second, c * S(multiset_multiplicity(key.second)));

  for (const auto& [okey, oc] : outer.table()) {
    const Multiset& in = okey.second;
    for (std::size_t a = 0; a < in.size(); ++a) {
      if (a > 0 && in[a] == in[a - 1]) continue;
      auto slot = by_out.find(in[a]);
      if (slot == by_out.end()) continue;
      S base = coef * oc * S(pinned_multiplicity(in, in[a]));
      Multiset rest;
      rest.reserve(in.size() - 1);
      bool dropped = false;
      for (auto x : in) {
        if (!dropped && x == in[a]) {
          dropped = true;
          continue;
        }
        rest.push_back(x);
      }
      for (const auto& [iin, ic] : slot->second) {
        Multiset merged = rest;
        merged.insert(merged.end(), iin.begin(), iin.end());
        mono_add(t, okey.first, std::move(merged), S(base * ic));
      }
    }
  }
}

}  // namespace

template <class S>
PolyMap<S> lie_bracket(const PolyMap<S>& g1, const PolyMap<S>& g2) {
  if (g1.dim() != g2.dim()) throw DimensionError("lie_bracket: dimension mismatch");
  const int k = g1.degree(), l = g2.degree();
  if (g1.is_zero() || g2.is_zero()) return PolyMap<S>::zero(g1.dim());

  MonoTable<S> mono;
  if (l > 0) accumulate_composition(mono, g2, g1, S(l));
  if (k > 0) accumulate_composition(mono, g1, g2, S(-k));

  PolyMap<S> r(k + l - 1 < 0 ? 0 : k + l - 1, g1.dim());
  for (auto& [key, c] : mono) {
    // de-polarize: symmetric coefficient = monomial coefficient / multiplicity
    S m(multiset_multiplicity(key.second));
    r.add_coeff(key.first, key.second, c / m);
  }
  r.normalize();
  return r;
}

namespace {

std::string format_coeff(const Rational& c) { return rational_to_string(c); }

std::string format_coeff(double c) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, c);
  return std::string(buf, res.ptr);
}

template <class S>
std::string polymap_to_text(const PolyMap<S>& g) {
  std::ostringstream os;
  os << "polymap " << g.degree() << " " << g.dim() << "\n";
  for (const auto& [key, c] : g.table()) {
    os << key.first + 1 << " :";
    for (auto j : key.second) os << " " << j + 1;
    os << " : " << format_coeff(c) << "\n";
  }
  os << "end\n";
  return os.str();
}

template <class S>
PolyMap<S> polymap_from_text(const std::string& text, S (*parse)(const std::string&)) {
  std::istringstream is(text);
  std::string tag;
  int degree, dim;
  if (!(is >> tag >> degree >> dim) || tag != "polymap")
    throw ConfigError("polymap parse: bad header");
  PolyMap<S> g(degree, dim);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "end") {
      g.normalize();
      return g;
    }
    std::uint32_t out = std::stoul(first);
    std::string colon;
    ls >> colon;
    if (colon != ":") throw ConfigError("polymap parse: expected ':' after output index");
    Multiset in;
    std::string tok;
    while (ls >> tok && tok != ":") in.push_back(static_cast<std::uint32_t>(std::stoul(tok) - 1));
    if (tok != ":") throw ConfigError("polymap parse: expected second ':'");
    std::string coeff;
    std::getline(ls, coeff);
    if (out == 0) throw ConfigError("polymap parse: indices are 1-based");
    g.add_coeff(out - 1, std::move(in), parse(coeff));
  }
  throw ConfigError("polymap parse: missing 'end'");
}

Rational parse_rat(const std::string& s) { return parse_rational(s); }
double parse_dbl(const std::string& s) { return std::stod(s); }

}  // namespace

std::string to_text(const PolyMap<Rational>& g) { return polymap_to_text(g); }
std::string to_text(const PolyMap<double>& g) { return polymap_to_text(g); }

PolyMap<Rational> polymap_rational_from_text(const std::string& text) {
  return polymap_from_text<Rational>(text, &parse_rat);
}
PolyMap<double> polymap_double_from_text(const std::string& text) {
  return polymap_from_text<double>(text, &parse_dbl);
}

template class PolyMap<Rational>;
template class PolyMap<double>;
template class PolySum<Rational>;
template class PolySum<double>;
template PolyMap<Rational> lie_bracket(const PolyMap<Rational>&, const PolyMap<Rational>&);
template PolyMap<double> lie_bracket(const PolyMap<double>&, const PolyMap<double>&);

}  // namespace hypolab
