#include "hypolab/rng.hpp"

#include <cmath>

#include "hypolab/errors.hpp"

namespace hypolab {
namespace {

constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1
constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0, std::uint32_t k1) {
  std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
  std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
  std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::uint64_t counter_lo,
                                           std::uint64_t counter_hi) const {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter_lo), static_cast<std::uint32_t>(counter_lo >> 32),
      static_cast<std::uint32_t>(counter_hi), static_cast<std::uint32_t>(counter_hi >> 32)};
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, k0, k1);
    k0 += kWeyl0;  // raise key
    k1 += kWeyl1;
  }
  return ctr;
}

std::vector<double> GaussianStream::draw(std::size_t count) const {
  // one 128-bit block -> two uniforms -> one Box-Muller pair
  std::vector<double> out(count);
  const double two_pi = 2.0 * M_PI;
  for (std::size_t pair = 0; pair * 2 < count; ++pair) {
    auto w = eng_.block(pair, stream_);
    std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    // (0,1]: keeps the log finite
    double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1p-53;
    double u2 = static_cast<double>(b >> 11) * 0x1p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    out[pair * 2] = r * std::cos(two_pi * u2);
    if (pair * 2 + 1 < count) out[pair * 2 + 1] = r * std::sin(two_pi * u2);
  }
  return out;
}

BrownianPath sample_path(std::size_t steps, int channels, double horizon, std::uint64_t seed,
                         std::uint64_t path_index) {
  if (steps == 0 || channels < 1 || horizon <= 0.0)
    throw DimensionError("sample_path: need steps >= 1, channels >= 1, horizon > 0");
  BrownianPath p;
  p.horizon = horizon;
  p.steps = steps;
  p.channels = channels;
  p.seed = seed;
  p.path_index = path_index;
  p.values.assign((steps + 1) * channels, 0.0);

  const double root_dt = std::sqrt(horizon / static_cast<double>(steps));
  GaussianStream g(seed, path_index);
  auto z = g.draw(steps * static_cast<std::size_t>(channels));
  for (std::size_t j = 0; j < steps; ++j)
    for (int i = 0; i < channels; ++i)
      p.values[(j + 1) * channels + i] =
          p.values[j * channels + i] + root_dt * z[j * channels + i];
  return p;
}

BrownianPath BrownianPath::coarsened(std::size_t factor) const {
  if (factor == 0 || steps % factor != 0)
    throw DimensionError("coarsen: factor must divide the step count");
  BrownianPath p;
  p.horizon = horizon;
  p.steps = steps / factor;
  p.channels = channels;
  p.seed = seed;
  p.path_index = path_index;
  p.values.reserve((p.steps + 1) * channels);
  for (std::size_t j = 0; j <= p.steps; ++j)
    for (int i = 0; i < channels; ++i) p.values.push_back(value(j * factor, i));
  return p;
}

}  // namespace hypolab
