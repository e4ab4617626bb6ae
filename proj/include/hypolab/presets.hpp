#pragma once
#include <string>
#include <vector>

#include "hypolab/problem.hpp"

namespace hypolab {

// One-mode Ornstein-Uhlenbeck: lambda = 1, unit noise.
ProblemSpec make_ou1();
// Two-mode OU: lambda = (1,2), independent unit noise on each mode.
ProblemSpec make_ou2();

// Burgers truncation on sin(kx), k = 1..n:  du = (-nu k^2 u - u u_x) dt.
// Forced on mode 1 by default; the advection cascade couples everything.
ProblemSpec make_burgers(int n, const Rational& nu = Rational(1, 10));

// Cubic reaction-diffusion truncation on sin(kx): du = (-k^2 u - u^3) dt.
// hypoelliptic: one noise column q = e1 + e2 (odd+even seed, cascade spans).
// degenerate:   q = e1; the cubic preserves mode-index parity, so the even
//               modes never couple to noise.
ProblemSpec make_rd_cubic(int n, bool degenerate);

// Kuramoto-Sivashinsky-type truncation: A = k^4, +k^2 kept as the explicit
// degree-1 correction, Burgers advection term, forced on mode 1.
ProblemSpec make_ks(int n);

enum class Ns2dForcing { Standard4, Axis };

// 2-D vorticity truncation on |k| <= cutoff (real cos/sin basis):
//   dw = (-nu |k|^2 w - J(laplace^{-1} w, w)) dt + noise.
// Standard4 forces cos & sin on the four lowest classes (1,0),(0,1),(1,1),
// (1,-1); Axis forces only (1,0). Modes are ordered by |k|^2.
ProblemSpec make_ns2d(int cutoff, Ns2dForcing forcing, const Rational& nu = Rational(1, 10));

// wavevector class list in mode order (one entry per cos/sin pair)
std::vector<std::pair<int, int>> ns2d_classes(int cutoff);

struct PresetInfo {
  std::string name;
  std::string description;
};

const std::vector<PresetInfo>& preset_list();

// Resolves a preset name ("ou-1mode", "burgers-8", "rd-cubic-4",
// "rd-cubic-4-degenerate", "ns2d-4", "ns2d-4-axis", "ks-8", ...).
// Parametrized families accept any admissible size in the name.
ProblemSpec make_preset(const std::string& name);

}  // namespace hypolab
