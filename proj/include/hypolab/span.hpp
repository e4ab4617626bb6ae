#pragma once
#include <optional>
#include <string>
#include <vector>

#include "hypolab/bracket.hpp"
#include "hypolab/rational.hpp"

namespace hypolab {

enum class SpanVerdict { SPANS, DEFICIENT };

struct SpanReport {
  int target_dim = 0;
  int rank = 0;
  double sigma_min = 0.0;  // smallest singular value of the stacked matrix
  SpanVerdict verdict = SpanVerdict::DEFICIENT;
  // Unit vector annihilating every projected member; present when DEFICIENT.
  std::vector<double> certificate;
  bool exact = false;  // rank from exact elimination rather than the SVD cut
};

// Incremental exact rank tracker over row vectors.
class RationalRowSpace {
 public:
  explicit RationalRowSpace(int width) : width_(width) {}
  // Reduces v against the pivots; returns true (and keeps it) if independent.
  bool insert(std::vector<Rational> v);
  int rank() const { return static_cast<int>(rows_.size()); }
  int width() const { return width_; }
  // A rational kernel vector of the row space (all rows annihilate it);
  // nullopt when the rows span the full width.
  std::optional<std::vector<Rational>> kernel_vector() const;

 private:
  int width_;
  std::vector<std::vector<Rational>> rows_;  // echelon rows
  std::vector<int> pivot_cols_;
};

// Rank of the projection of span(vectors) onto the leading target_dim
// coordinates. Exact path: rational elimination; float path: SVD with the
// relative cutoff 1e-9 * sigma_max. Both report sigma_min of the stacked
// matrix of unit-normalized projected rows.
SpanReport span_report(const std::vector<std::vector<Rational>>& vectors, int target_dim);
SpanReport span_report(const std::vector<std::vector<double>>& vectors, int target_dim);

struct HormanderReport {
  SpanReport span;
  int depth_limit = 0;
  // Smallest depth whose constants already realize the final rank; -1 when
  // no constant exists.
  int minimal_depth = -1;
  // Rank-increasing constants in generation order: (word, vector).
  std::vector<std::pair<std::string, std::vector<double>>> witness;
  std::size_t lambda_size = 0;
  std::size_t element_count = 0;
  std::size_t dedup_count = 0;
  std::vector<std::size_t> per_depth_counts;
};

// Generates brackets to depth_limit (constants-only expansion) and judges
// the span of Lambda on the leading target_dim modes. exact = false trades
// the rational elimination for the SVD cut; the witness stays exact.
HormanderReport hormander_verdict(const ProblemSpec& problem, int depth_limit, int target_dim,
                                  const GenerateOptions& opt = {.word_budget = 2'000'000,
                                                                .constants_only = true},
                                  bool exact = true);

}  // namespace hypolab
