#pragma once
#include <array>
#include <cstdint>
#include <vector>

namespace hypolab {

// Philox4x32-10 counter-based generator. A (key, counter) pair maps to four
// 32-bit words; streams are addressed, never advanced, so any path in an
// ensemble can be regenerated independently of sampling order.
struct Philox {
  std::uint64_t key;  // master seed

  std::array<std::uint32_t, 4> block(std::uint64_t counter_lo, std::uint64_t counter_hi) const;
};

// Standard gaussian draws for one (seed, stream) pair, Box-Muller over
// Philox uniforms. Draw i is a pure function of (seed, stream, i).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream) : eng_{seed}, stream_(stream) {}

  // z_i for i = 0..count-1
  std::vector<double> draw(std::size_t count) const;

 private:
  Philox eng_;
  std::uint64_t stream_;
};

// d-dimensional Brownian path on the uniform grid {0, T/M, ..., T}.
// values is (M+1) x d row-major; W(0) = 0.
struct BrownianPath {
  double horizon = 1.0;
  std::size_t steps = 0;  // M
  int channels = 0;       // d
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<double> values;

  double value(std::size_t node, int channel) const { return values[node * channels + channel]; }
  double increment(std::size_t step, int channel) const {
    return values[(step + 1) * channels + channel] - values[step * channels + channel];
  }

  // Keeps every `factor`-th node; increments aggregate accordingly, so the
  // coarse path is the same Brownian path seen on the coarser grid.
  BrownianPath coarsened(std::size_t factor) const;
};

BrownianPath sample_path(std::size_t steps, int channels, double horizon, std::uint64_t seed,
                         std::uint64_t path_index = 0);

}  // namespace hypolab
