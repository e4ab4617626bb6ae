#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "hypolab/errors.hpp"
#include "hypolab/integrate.hpp"
#include "hypolab/presets.hpp"
#include "hypolab/problem.hpp"
#include "hypolab/rng.hpp"

using namespace hypolab;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rel_gap(double a, double b) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-30});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("adjoint boundary row is the terminal direction") {
  auto p = compile(make_preset("ou-2mode"));
  auto traj = integrate(p, sample_path(16, p.noise_dim, p.horizon, 3));
  std::vector<double> xi = {0.3, -1.7};
  auto rho = adjoint_backward(p, traj, xi);
  REQUIRE(rho.size() == 17 * 2);
  CHECK(rho[16 * 2 + 0] == 0.3);
  CHECK(rho[16 * 2 + 1] == -1.7);
  CHECK_THROWS_AS(adjoint_backward(p, traj, {1.0}), DimensionError);
}

TEST_CASE("linear flow transports directions by pure decay") {
  auto p = compile(make_preset("ou-2mode"));
  const std::size_t M = 32;
  auto traj = integrate(p, sample_path(M, p.noise_dim, p.horizon, 8));
  const double dt = traj.dt();
  std::vector<double> h = {2.0, -1.0};
  for (std::size_t s : {std::size_t{0}, std::size_t{7}, M}) {
    auto jh = jacobian_forward(p, traj, s, h);
    auto rho = adjoint_backward(p, traj, h);
    for (int k = 0; k < 2; ++k) {
      double factor = std::exp(-p.lambda[k] * dt * static_cast<double>(M - s));
      CHECK(jh[k] == doctest::Approx(h[k] * factor).epsilon(1e-12));
      CHECK(rho[s * 2 + k] == doctest::Approx(h[k] * factor).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward map is linear in the direction") {
  auto p = compile(make_preset("rd-cubic-4"));
  auto traj = integrate(p, sample_path(64, p.noise_dim, p.horizon, 21));
  GaussianStream g(77, 0);
  auto z = g.draw(2 * static_cast<std::size_t>(p.dim));
  std::vector<double> h1(z.begin(), z.begin() + p.dim);
  std::vector<double> h2(z.begin() + p.dim, z.end());
  std::vector<double> mix(p.dim);
  for (int k = 0; k < p.dim; ++k) mix[k] = 0.75 * h1[k] - 2.5 * h2[k];

  auto j1 = jacobian_forward(p, traj, 0, h1);
  auto j2 = jacobian_forward(p, traj, 0, h2);
  auto jm = jacobian_forward(p, traj, 0, mix);
  for (int k = 0; k < p.dim; ++k)
    CHECK(jm[k] == doctest::Approx(0.75 * j1[k] - 2.5 * j2[k]).epsilon(1e-11));
}

TEST_CASE("adjoint pairing matches the forward pairing on every preset") {
  const std::size_t M = 64;
  for (const std::string name : {"ou-2mode", "rd-cubic-4", "burgers-8", "ks-8"}) {
    CAPTURE(name);
    auto p = compile(make_preset(name));
    auto traj = integrate(p, sample_path(M, p.noise_dim, p.horizon, 4242));
    GaussianStream g(500, 1);
    for (int trial = 0; trial < 8; ++trial) {
      auto z = g.draw(static_cast<std::size_t>(2 * p.dim) * (trial + 1));
      std::vector<double> h(z.end() - 2 * p.dim, z.end() - p.dim);
      std::vector<double> xi(z.end() - p.dim, z.end());
      std::size_t s = (trial * 13) % (M + 1);

      auto jh = jacobian_forward(p, traj, s, h);
      auto rho = adjoint_backward(p, traj, xi);
      std::vector<double> rho_s(rho.begin() + s * p.dim, rho.begin() + (s + 1) * p.dim);
      CHECK(rel_gap(dot(xi, jh), dot(rho_s, h)) <= 1e-10);
    }
  }
}

TEST_CASE("jacobian agrees with a centered difference of the flow") {
  auto p = compile(make_preset("rd-cubic-4"));
  const std::size_t M = 128;
  auto path = sample_path(M, p.noise_dim, p.horizon, 606);
  auto traj = integrate(p, path);

  GaussianStream g(17, 2);
  auto h = g.draw(static_cast<std::size_t>(p.dim));
  double norm = std::sqrt(dot(h, h));
  for (auto& x : h) x /= norm;

  auto jh = jacobian_forward(p, traj, 0, h);
  const double delta = 1e-6;
  std::vector<double> up(p.u0), dn(p.u0);
  for (int k = 0; k < p.dim; ++k) {
    up[k] += delta * h[k];
    dn[k] -= delta * h[k];
  }
  auto tp = integrate(p, path, up);
  auto tm = integrate(p, path, dn);
  double err = 0.0, scale = 0.0;
  for (int k = 0; k < p.dim; ++k) {
    double fd = (tp.state(M)[k] - tm.state(M)[k]) / (2.0 * delta);
    err = std::max(err, std::abs(fd - jh[k]));
    scale = std::max(scale, std::abs(jh[k]));
  }
  CHECK(err <= 1e-4 * std::max(1.0, scale));
}

TEST_CASE("adjoint transports a terminal functional gradient consistently") {
  // d<xi, u(T)>/du0 . h computed two ways: adjoint row at s = 0 versus a
  // centered difference of the pairing itself
  auto p = compile(make_preset("burgers-8"));
  const std::size_t M = 96;
  auto path = sample_path(M, p.noise_dim, p.horizon, 11);
  auto traj = integrate(p, path);
  GaussianStream g(23, 5);
  auto z = g.draw(static_cast<std::size_t>(2 * p.dim));
  std::vector<double> xi(z.begin(), z.begin() + p.dim);
  std::vector<double> h(z.begin() + p.dim, z.end());

  auto rho = adjoint_backward(p, traj, xi);
  std::vector<double> rho0(rho.begin(), rho.begin() + p.dim);

  const double delta = 1e-6;
  std::vector<double> up(p.u0), dn(p.u0);
  for (int k = 0; k < p.dim; ++k) {
    up[k] += delta * h[k];
    dn[k] -= delta * h[k];
  }
  auto tp = integrate(p, path, up);
  auto tm = integrate(p, path, dn);
  std::vector<double> fp(tp.state(M), tp.state(M) + p.dim);
  std::vector<double> fm(tm.state(M), tm.state(M) + p.dim);
  double fd = (dot(xi, fp) - dot(xi, fm)) / (2.0 * delta);
  CHECK(rel_gap(fd, dot(rho0, h)) <= 1e-4);
}
