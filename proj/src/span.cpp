#include "hypolab/span.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hypolab/errors.hpp"

namespace hypolab {

bool RationalRowSpace::insert(std::vector<Rational> v) {
  if (static_cast<int>(v.size()) != width_) throw DimensionError("rowspace: width mismatch");
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const int pc = pivot_cols_[r];
    if (is_zero(v[pc])) continue;
    Rational f = v[pc] / rows_[r][pc];
    for (int c = 0; c < width_; ++c) v[c] -= f * rows_[r][c];
  }
  int pivot = -1;
  for (int c = 0; c < width_; ++c)
    if (!is_zero(v[c])) {
      pivot = c;
      break;
    }
  if (pivot < 0) return false;
  rows_.push_back(std::move(v));
  pivot_cols_.push_back(pivot);
  return true;
}

std::optional<std::vector<Rational>> RationalRowSpace::kernel_vector() const {
  if (rank() >= width_) return std::nullopt;
  // full reduction: eliminate above each pivot, then read off a free column
  std::vector<std::vector<Rational>> rref = rows_;
  std::vector<int> pcols = pivot_cols_;
  // sort rows by pivot column
  for (std::size_t a = 0; a < rref.size(); ++a)
    for (std::size_t b = a + 1; b < rref.size(); ++b)
      if (pcols[b] < pcols[a]) {
        std::swap(pcols[a], pcols[b]);
        std::swap(rref[a], rref[b]);
      }
  for (std::size_t r = 0; r < rref.size(); ++r) {
    Rational inv = rref[r][pcols[r]];
    for (int c = 0; c < width_; ++c) rref[r][c] /= inv;
    for (std::size_t r2 = 0; r2 < r; ++r2) {
      Rational f = rref[r2][pcols[r]];
      if (is_zero(f)) continue;
      for (int c = 0; c < width_; ++c) rref[r2][c] -= f * rref[r][c];
    }
  }
  std::vector<bool> is_pivot(width_, false);
  for (int c : pcols) is_pivot[c] = true;
  int free_col = 0;
  while (free_col < width_ && is_pivot[free_col]) ++free_col;
  // kernel vector: free column = 1, pivot columns = -entry
  std::vector<Rational> k(width_, Rational(0));
  k[free_col] = Rational(1);
  for (std::size_t r = 0; r < rref.size(); ++r) k[pcols[r]] = -rref[r][free_col];
  return k;
}

namespace {

// stacked matrix of unit-normalized projected rows; zero projections dropped
Eigen::MatrixXd stack_rows(const std::vector<std::vector<double>>& vectors, int target_dim) {
  std::vector<std::vector<double>> rows;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) < target_dim)
      throw DimensionError("span_report: vector shorter than target_dim");
    std::vector<double> r(v.begin(), v.begin() + target_dim);
    double norm = 0.0;
    for (double x : r) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (double& x : r) x /= norm;
    rows.push_back(std::move(r));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), target_dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int c = 0; c < target_dim; ++c) m(static_cast<Eigen::Index>(i), c) = rows[i][c];
  return m;
}

// sigma_min and, when wanted, the right-singular direction for it
void svd_fill(const Eigen::MatrixXd& m, SpanReport& rep, bool float_rank) {
  if (m.rows() == 0) {
    rep.sigma_min = 0.0;
    if (float_rank) rep.rank = 0;
    rep.certificate.assign(static_cast<std::size_t>(rep.target_dim), 0.0);
    rep.certificate[0] = 1.0;  // canonical certificate for an empty family
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // singular values of the map R^target -> R^rows: pad with zeros when
  // there are fewer rows than columns
  double smin = (m.rows() >= m.cols()) ? sv(sv.size() - 1) : 0.0;
  rep.sigma_min = smin;
  if (float_rank) {
    double cut = 1e-9 * (sv.size() ? sv(0) : 0.0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++r;
    rep.rank = r;
  }
  if (rep.rank < rep.target_dim && rep.certificate.empty()) {
    // a direction in the numerical kernel: last right-singular vector
    Eigen::VectorXd v = svd.matrixV().col(rep.target_dim - 1);
    rep.certificate.assign(v.data(), v.data() + v.size());
  }
}

}  // namespace

SpanReport span_report(const std::vector<std::vector<double>>& vectors, int target_dim) {
  if (target_dim < 1) throw DimensionError("span_report: target_dim must be >= 1");
  SpanReport rep;
  rep.target_dim = target_dim;
  rep.exact = false;
  Eigen::MatrixXd m = stack_rows(vectors, target_dim);
  svd_fill(m, rep, /*float_rank=*/true);
  rep.verdict = rep.rank == target_dim ? SpanVerdict::SPANS : SpanVerdict::DEFICIENT;
  if (rep.verdict == SpanVerdict::SPANS) rep.certificate.clear();
  return rep;
}

SpanReport span_report(const std::vector<std::vector<Rational>>& vectors, int target_dim) {
  if (target_dim < 1) throw DimensionError("span_report: target_dim must be >= 1");
  SpanReport rep;
  rep.target_dim = target_dim;
  rep.exact = true;

  RationalRowSpace space(target_dim);
  std::vector<std::vector<double>> dvecs;
  dvecs.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) < target_dim)
      throw DimensionError("span_report: vector shorter than target_dim");
    std::vector<Rational> proj(v.begin(), v.begin() + target_dim);
    space.insert(std::move(proj));
    std::vector<double> dv;
    dv.reserve(v.size());
    for (const auto& x : v) dv.push_back(to_double(x));
    dvecs.push_back(std::move(dv));
  }
  rep.rank = space.rank();
  rep.verdict = rep.rank == target_dim ? SpanVerdict::SPANS : SpanVerdict::DEFICIENT;
  if (rep.verdict == SpanVerdict::DEFICIENT) {
    if (auto k = space.kernel_vector()) {
      double norm = 0.0;
      for (const auto& x : *k) norm += to_double(x) * to_double(x);
      norm = std::sqrt(norm);
      rep.certificate.reserve(k->size());
      for (const auto& x : *k) rep.certificate.push_back(to_double(x) / norm);
    }
  }
  Eigen::MatrixXd m = stack_rows(dvecs, target_dim);
  svd_fill(m, rep, /*float_rank=*/false);
  return rep;
}

HormanderReport hormander_verdict(const ProblemSpec& problem, int depth_limit, int target_dim,
                                  const GenerateOptions& opt, bool exact) {
  if (target_dim < 1 || target_dim > problem.dim)
    throw DimensionError("hormander_verdict: target_dim out of range");
  BracketSet set = generate_brackets(problem, depth_limit, opt);

  HormanderReport rep;
  rep.depth_limit = depth_limit;
  rep.lambda_size = set.constant_indices.size();
  rep.element_count = set.elements.size();
  rep.dedup_count = set.dedup_count;
  rep.per_depth_counts = set.per_depth_counts;

  auto lambda = set.constants();
  if (exact) {
    rep.span = span_report(lambda, target_dim);
  } else {
    std::vector<std::vector<double>> approx;
    approx.reserve(lambda.size());
    for (const auto& v : lambda) {
      std::vector<double> dv;
      dv.reserve(v.size());
      for (const auto& x : v) dv.push_back(to_double(x));
      approx.push_back(std::move(dv));
    }
    rep.span = span_report(approx, target_dim);
  }

  // witness: constants that raised the exact rank, in generation order
  RationalRowSpace greedy(target_dim);
  auto elems = set.constant_elements();
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    std::vector<Rational> proj(lambda[i].begin(), lambda[i].begin() + target_dim);
    if (!greedy.insert(std::move(proj))) continue;
    std::vector<double> dv;
    dv.reserve(lambda[i].size());
    for (const auto& x : lambda[i]) dv.push_back(to_double(x));
    rep.witness.emplace_back(elems[i]->word.str(), std::move(dv));
    rep.minimal_depth = elems[i]->word.depth();
    if (greedy.rank() == rep.span.rank) break;
  }
  return rep;
}

}  // namespace hypolab
