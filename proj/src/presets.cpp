#include "hypolab/presets.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "hypolab/errors.hpp"

namespace hypolab {

namespace {

// Coefficients below are true polynomial coefficients; the stored table keeps
// the multiplicity-divided value so PolyMap::evaluate reproduces them.
void add_poly(PolyMap<Rational>& m, std::uint32_t out, Multiset in, const Rational& c) {
  if (is_zero(c)) return;
  std::sort(in.begin(), in.end());
  Rational stored = c / Rational(static_cast<unsigned long>(multiset_multiplicity(in)));
  stored.canonicalize();  // two-argument mpq_class does not reduce; == assumes canonical form
  m.add_coeff(out, std::move(in), stored);
}

std::vector<std::vector<Rational>> unit_columns(int dim, const std::vector<int>& idx) {
  std::vector<std::vector<Rational>> cols;
  for (int i : idx) {
    std::vector<Rational> q(dim, Rational(0));
    q[i] = Rational(1);
    cols.push_back(std::move(q));
  }
  return cols;
}

// sin-basis advection -u u_x on modes 1..n: the ordered product pair (j,l)
// feeds mode j+l with -(j+l)/4 and mode |j-l| with +|j-l|/4.
PolyMap<Rational> advection_quadratic(int n) {
  PolyMap<Rational> f(2, n);
  for (int j = 1; j <= n; ++j)
    for (int l = 1; l <= n; ++l) {
      Multiset in = {static_cast<std::uint32_t>(j - 1), static_cast<std::uint32_t>(l - 1)};
      int sum = j + l;
      if (sum <= n)
        add_poly(f, static_cast<std::uint32_t>(sum - 1), in, Rational(-sum, 4));
      int diff = std::abs(j - l);
      if (diff >= 1)
        add_poly(f, static_cast<std::uint32_t>(diff - 1), in, Rational(diff, 4));
    }
  f.normalize();
  return f;
}

// sin-basis -u^3 on modes 1..n: sin a sin b sin c expands into four sines at
// a+b-c, a-b+c, -a+b+c, -(a+b+c), each with weight 1/4.
PolyMap<Rational> cubic_trilinear(int n) {
  PolyMap<Rational> f(3, n);
  auto emit = [&](int mode, const Multiset& in, const Rational& c) {
    if (mode == 0) return;
    Rational v = c;
    if (mode < 0) {
      mode = -mode;
      v = -v;
    }
    if (mode <= n) add_poly(f, static_cast<std::uint32_t>(mode - 1), in, v);
  };
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b)
      for (int c = 1; c <= n; ++c) {
        Multiset in = {static_cast<std::uint32_t>(a - 1), static_cast<std::uint32_t>(b - 1),
                       static_cast<std::uint32_t>(c - 1)};
        Rational w(-1, 4);  // -u^3, each product-to-sum term carries 1/4
        emit(a + b - c, in, w);
        emit(a - b + c, in, w);
        emit(-a + b + c, in, w);
        emit(a + b + c, in, -w);
      }
  f.normalize();
  return f;
}

struct Vec2 {
  int x, y;
};

int wedge(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
int norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }

}  // namespace

ProblemSpec make_ou1() {
  ProblemSpec s;
  s.name = "ou-1mode";
  s.dim = 1;
  s.lambda = {Rational(1)};
  s.noise = unit_columns(1, {0});
  s.bracket_depth = 1;
  return s;
}

ProblemSpec make_ou2() {
  ProblemSpec s;
  s.name = "ou-2mode";
  s.dim = 2;
  s.lambda = {Rational(1), Rational(2)};
  s.noise = unit_columns(2, {0, 1});
  s.bracket_depth = 1;
  return s;
}

ProblemSpec make_burgers(int n, const Rational& nu) {
  if (n < 2) throw ConfigError("burgers preset needs at least 2 modes");
  ProblemSpec s;
  s.name = "burgers-" + std::to_string(n);
  s.dim = n;
  for (int k = 1; k <= n; ++k) s.lambda.push_back(nu * Rational(k) * Rational(k));
  s.F.add(advection_quadratic(n));
  s.noise = unit_columns(n, {0});
  // each new mode costs one drift and one noise letter on top of the seed
  s.bracket_depth = 2 * n - 1;
  return s;
}

ProblemSpec make_rd_cubic(int n, bool degenerate) {
  if (n < 2) throw ConfigError("rd-cubic preset needs at least 2 modes");
  ProblemSpec s;
  s.name = "rd-cubic-" + std::to_string(n) + (degenerate ? "-degenerate" : "");
  s.dim = n;
  for (int k = 1; k <= n; ++k) s.lambda.push_back(Rational(k) * Rational(k));
  s.F.add(cubic_trilinear(n));
  if (degenerate) {
    // pure sine mode: the cubic preserves mode-index parity, so the even
    // modes never feel the noise
    s.noise = unit_columns(n, {0});
  } else {
    // mixed-parity column sin(x) + sin(2x); the cascade reaches every mode
    std::vector<Rational> q(n, Rational(0));
    q[0] = Rational(1);
    q[1] = Rational(1);
    s.noise = {std::move(q)};
  }
  s.bracket_depth = 6;
  return s;
}

ProblemSpec make_ks(int n) {
  if (n < 2) throw ConfigError("ks preset needs at least 2 modes");
  ProblemSpec s;
  s.name = "ks-" + std::to_string(n);
  s.dim = n;
  // A = k^4 keeps the linear part positive; the destabilizing +k^2 piece
  // rides along as the explicit degree-1 correction
  PolyMap<Rational> corr(1, n);
  for (int k = 1; k <= n; ++k) {
    Rational k2 = Rational(k) * Rational(k);
    s.lambda.push_back(k2 * k2);
    corr.add_coeff(static_cast<std::uint32_t>(k - 1), {static_cast<std::uint32_t>(k - 1)}, k2);
  }
  s.linear_correction = corr;
  s.F.add(advection_quadratic(n));
  s.noise = unit_columns(n, {0});
  s.bracket_depth = 2 * n - 1;
  return s;
}

std::vector<std::pair<int, int>> ns2d_classes(int cutoff) {
  std::vector<std::pair<int, int>> cls;
  for (int x = -cutoff; x <= cutoff; ++x)
    for (int y = -cutoff; y <= cutoff; ++y) {
      if (x * x + y * y > cutoff * cutoff) continue;
      if (x > 0 || (x == 0 && y > 0)) cls.push_back({x, y});
    }
  std::sort(cls.begin(), cls.end(), [](auto a, auto b) {
    int na = a.first * a.first + a.second * a.second;
    int nb = b.first * b.first + b.second * b.second;
    if (na != nb) return na < nb;
    return a < b;
  });
  return cls;
}

ProblemSpec make_ns2d(int cutoff, Ns2dForcing forcing, const Rational& nu) {
  if (cutoff < 2) throw ConfigError("ns2d preset needs cutoff >= 2");
  auto cls = ns2d_classes(cutoff);
  const int nc = static_cast<int>(cls.size());
  const int dim = 2 * nc;

  auto class_index = [&](Vec2 k) -> int {
    auto it = std::find_if(cls.begin(), cls.end(),
                           [&](auto c) { return c.first == k.x && c.second == k.y; });
    return it == cls.end() ? -1 : static_cast<int>(it - cls.begin());
  };

  ProblemSpec s;
  s.name = "ns2d-" + std::to_string(cutoff) +
           (forcing == Ns2dForcing::Axis ? "-axis" : "");
  s.dim = dim;
  // mode layout: cos_c = 2c, sin_c = 2c+1; classes sorted by |k|^2 keeps
  // lambda nondecreasing
  for (int c = 0; c < nc; ++c) {
    Rational k2(norm2({cls[c].first, cls[c].second}));
    s.lambda.push_back(nu * k2);
    s.lambda.push_back(nu * k2);
  }

  // F(w) = -J(psi, w), psi_k = -w_k/|k|^2. For ordered classes (j,l) with
  // wedge W = j x l and psi-side scale 1/|j|^2:
  //   cos_j cos_l ->  W/2 [cos(j-l) - cos(j+l)]
  //   cos_j sin_l -> -W/2 [sin(j+l) + sin(j-l)]
  //   sin_j cos_l -> -W/2 [sin(j+l) - sin(j-l)]
  //   sin_j sin_l ->  W/2 [cos(j-l) + cos(j+l)]
  PolyMap<Rational> f(2, dim);
  // kind 0 = cos, 1 = sin; sin flips sign when the wavevector is mirrored
  auto emit = [&](Vec2 m, int kind, Multiset in, Rational c) {
    if (m.x == 0 && m.y == 0) return;
    if (m.x < 0 || (m.x == 0 && m.y < 0)) {
      m = {-m.x, -m.y};
      if (kind == 1) c = -c;
    }
    int ci = class_index(m);
    if (ci < 0) return;  // sharp cutoff
    add_poly(f, static_cast<std::uint32_t>(2 * ci + kind), std::move(in), c);
  };
  for (int cj = 0; cj < nc; ++cj)
    for (int cl = 0; cl < nc; ++cl) {
      Vec2 j = {cls[cj].first, cls[cj].second};
      Vec2 l = {cls[cl].first, cls[cl].second};
      int w = wedge(j, l);
      if (w == 0) continue;
      Rational half_w = Rational(w) / (Rational(2) * Rational(norm2(j)));
      Vec2 sum = {j.x + l.x, j.y + l.y};
      Vec2 diff = {j.x - l.x, j.y - l.y};
      std::uint32_t aj = static_cast<std::uint32_t>(2 * cj);
      std::uint32_t bj = aj + 1;
      std::uint32_t al = static_cast<std::uint32_t>(2 * cl);
      std::uint32_t bl = al + 1;
      emit(diff, 0, {aj, al}, half_w);
      emit(sum, 0, {aj, al}, -half_w);
      emit(sum, 1, {aj, bl}, -half_w);
      emit(diff, 1, {aj, bl}, -half_w);
      emit(sum, 1, {bj, al}, -half_w);
      emit(diff, 1, {bj, al}, half_w);
      emit(diff, 0, {bj, bl}, half_w);
      emit(sum, 0, {bj, bl}, half_w);
    }
  f.normalize();
  s.F.add(f);

  std::vector<std::pair<int, int>> forced;
  if (forcing == Ns2dForcing::Axis)
    forced = {{1, 0}};
  else
    forced = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  std::vector<int> cols;
  for (auto [x, y] : forced) {
    int ci = class_index({x, y});
    if (ci < 0) throw ConfigError("ns2d forcing outside the truncation");
    cols.push_back(2 * ci);
    cols.push_back(2 * ci + 1);
  }
  s.noise = unit_columns(dim, cols);

  // classes whose cascade partners are all truncated away sit at the outer
  // rim; the span check targets everything strictly inside
  int rim = cutoff * cutoff;
  int inside = 0;
  for (auto [x, y] : cls)
    if (x * x + y * y < rim) ++inside;
  s.span_target = (forcing == Ns2dForcing::Axis) ? dim : 2 * inside;
  s.bracket_depth = 6;
  return s;
}

const std::vector<PresetInfo>& preset_list() {
  static const std::vector<PresetInfo> table = {
      {"ou-1mode", "1-mode linear problem, lambda = 1, unit noise"},
      {"ou-2mode", "2-mode linear problem, lambda = (1,2), full noise"},
      {"burgers-8", "8-mode advection truncation, forced on mode 1"},
      {"rd-cubic-4", "4-mode cubic truncation, mixed-parity forcing sin x + sin 2x"},
      {"rd-cubic-4-degenerate", "4-mode cubic truncation, forcing sin x only (even modes decoupled)"},
      {"ns2d-4", "2-D vorticity truncation |k| <= 4, 4 forced low wavevectors"},
      {"ns2d-4-axis", "2-D vorticity truncation |k| <= 4, forced on (1,0) only"},
      {"ks-8", "8-mode fourth-order truncation with +k^2 correction, forced on mode 1"},
  };
  return table;
}

namespace {

// "stem<number><rest>": extracts the size and the trailing variant tag
bool split_sized_name(const std::string& name, const std::string& stem, int& n,
                      std::string& rest) {
  if (name.rfind(stem, 0) != 0) return false;
  std::string tail = name.substr(stem.size());
  std::size_t p = 0;
  while (p < tail.size() && std::isdigit(static_cast<unsigned char>(tail[p]))) ++p;
  if (p == 0) return false;
  n = std::atoi(tail.substr(0, p).c_str());
  rest = tail.substr(p);
  return true;
}

}  // namespace

ProblemSpec make_preset(const std::string& name) {
  if (name == "ou-1mode") return make_ou1();
  if (name == "ou-2mode") return make_ou2();
  int n = 0;
  std::string rest;
  if (split_sized_name(name, "burgers-", n, rest) && rest.empty()) return make_burgers(n);
  if (split_sized_name(name, "rd-cubic-", n, rest)) {
    if (rest.empty()) return make_rd_cubic(n, false);
    if (rest == "-degenerate") return make_rd_cubic(n, true);
  }
  if (split_sized_name(name, "ns2d-", n, rest)) {
    if (rest.empty() || rest == "forced") return make_ns2d(n, Ns2dForcing::Standard4);
    if (rest == "-axis") return make_ns2d(n, Ns2dForcing::Axis);
  }
  if (split_sized_name(name, "ks-", n, rest) && rest.empty()) return make_ks(n);
  throw ConfigError("unknown preset: " + name);
}

}  // namespace hypolab
