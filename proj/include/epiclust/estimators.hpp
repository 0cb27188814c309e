#pragma once

// Classical fundamental-matrix estimators: the linear 8-point solver, the
// 7-point minimal solver, RANSAC and least-median-of-squares.

#include <epiclust/error.hpp>
#include <epiclust/geometry.hpp>

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace epiclust {

using Clock = std::chrono::steady_clock;
using Seconds = std::chrono::duration<double>;

/// Similarity T with T * p = s * (p - centroid), mapping a point set to zero
/// centroid and mean distance sqrt(2) from the origin.
struct NormalizedPoints {
  std::vector<HomogeneousPoint2> points;
  Matrix3 transform;
};

/// Left/right halves of the conditioning used by the linear solvers.
struct NormalizationTransform {
  Matrix3 left = Matrix3::Identity();
  Matrix3 right = Matrix3::Identity();
};

inline NormalizedPoints hartley_normalize(std::span<const HomogeneousPoint2> points) {
  if (points.empty()) {
    throw Error(ErrorKind::DegenerateInput, "no points to normalize");
  }
  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : points) {
    cx += p.x / p.w;
    cy += p.y / p.w;
  }
  const auto n = static_cast<double>(points.size());
  cx /= n;
  cy /= n;

  double mean_dist = 0.0;
  for (const auto& p : points) {
    mean_dist += std::hypot(p.x / p.w - cx, p.y / p.w - cy);
  }
  mean_dist /= n;
  if (!(mean_dist > 0.0)) {
    throw Error(ErrorKind::DegenerateInput, "all points coincide");
  }

  const double s = std::numbers::sqrt2 / mean_dist;
  NormalizedPoints out;
  out.transform << s, 0.0, -s * cx,
                   0.0, s, -s * cy,
                   0.0, 0.0, 1.0;
  out.points.reserve(points.size());
  for (const auto& p : points) {
    out.points.push_back({s * (p.x / p.w - cx), s * (p.y / p.w - cy), 1.0});
  }
  return out;
}

using EpipolarSystem = Eigen::Matrix<double, Eigen::Dynamic, 9>;

/// Rows a_n = (x x', y x', x', x y', y y', y', x, y, 1) so that A f = 0 with f
/// the row-major entries of F.
inline EpipolarSystem build_epipolar_system(std::span<const MatchPair> pairs) {
  EpipolarSystem a(static_cast<Eigen::Index>(pairs.size()), 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double x = pairs[i].m.x / pairs[i].m.w;
    const double y = pairs[i].m.y / pairs[i].m.w;
    const double xp = pairs[i].m_prime.x / pairs[i].m_prime.w;
    const double yp = pairs[i].m_prime.y / pairs[i].m_prime.w;
    a.row(static_cast<Eigen::Index>(i)) << x * xp, y * xp, xp, x * yp, y * yp, yp, x, y, 1.0;
  }
  return a;
}

/// sigma_7 / sigma_0 of the design matrix below this marks a configuration
/// whose solution space is not one-dimensional.
inline constexpr double kDegeneracyRatio = 1e-10;

namespace detail {

struct ConditionedPairs {
  std::vector<MatchPair> pairs;
  NormalizationTransform transform;
};

inline bool all_coincide(std::span<const MatchPair> pairs, bool right) {
  const auto& first = right ? pairs.front().m_prime : pairs.front().m;
  return std::all_of(pairs.begin(), pairs.end(), [&](const MatchPair& p) {
    const auto& q = right ? p.m_prime : p.m;
    return q.x / q.w == first.x / first.w && q.y / q.w == first.y / first.w;
  });
}

inline ConditionedPairs condition(std::span<const MatchPair> pairs, bool normalize) {
  ConditionedPairs out;
  if (!normalize) {
    out.pairs.assign(pairs.begin(), pairs.end());
    return out;
  }
  if (all_coincide(pairs, false) || all_coincide(pairs, true)) {
    throw Error(ErrorKind::DegenerateConfiguration, "all points of one image coincide");
  }
  std::vector<HomogeneousPoint2> left;
  std::vector<HomogeneousPoint2> right;
  left.reserve(pairs.size());
  right.reserve(pairs.size());
  for (const auto& p : pairs) {
    left.push_back(p.m);
    right.push_back(p.m_prime);
  }
  const auto nl = hartley_normalize(left);
  const auto nr = hartley_normalize(right);
  out.transform.left = nl.transform;
  out.transform.right = nr.transform;
  out.pairs.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.pairs.push_back({nl.points[i], nr.points[i]});
  }
  return out;
}

inline FundamentalMatrix denormalize(const Matrix3& f_normalized, const NormalizationTransform& t) {
  const Matrix3 f = t.right.transpose() * enforce_rank2(f_normalized).matrix() * t.left;
  return enforce_rank2(f);
}

inline Matrix3 reshape(const Eigen::Matrix<double, 9, 1>& f) {
  Matrix3 out;
  out << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
  return out;
}

inline double evaluate_cubic(const std::array<double, 4>& c, double x) {
  return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
}

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 with c3 != 0, Newton-polished.
inline std::vector<double> solve_cubic(const std::array<double, 4>& c) {
  const double a = c[2] / c[3];
  const double b = c[1] / c[3];
  const double d = c[0] / c[3];
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  std::vector<double> roots;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) - a / 3.0);
  } else {
    const double r = std::sqrt(-p / 3.0);
    const double arg = r > 0.0 ? std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0) : 0.0;
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      roots.push_back(2.0 * r * std::cos((phi + 2.0 * std::numbers::pi * k) / 3.0) - a / 3.0);
    }
  }
  for (double& x : roots) {
    for (int it = 0; it < 3; ++it) {
      const double fx = evaluate_cubic(c, x);
      const double dfx = (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1];
      if (dfx == 0.0) break;
      x -= fx / dfx;
    }
  }
  return roots;
}

template <class Rng>
std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t population, std::size_t count) {
  std::uniform_int_distribution<std::size_t> pick(0, population - 1);
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::size_t idx = pick(rng);
    if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
  }
  return out;
}

inline std::vector<MatchPair> gather(std::span<const MatchPair> pairs, std::span<const std::size_t> idx) {
  std::vector<MatchPair> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(pairs[i]);
  return out;
}

}  // namespace detail

/// Linear 8-point solution: unit-norm minimizer of ||A f|| projected to rank
/// 2. With `normalize` the system is solved in Hartley-conditioned
/// coordinates and mapped back as F = T_right^T F_n T_left.
inline FundamentalMatrix eight_point(std::span<const MatchPair> pairs, bool normalize = true) {
  if (pairs.size() < 8) {
    throw Error(ErrorKind::TooFewPoints, "eight_point needs at least 8 pairs");
  }
  const auto conditioned = detail::condition(pairs, normalize);
  const EpipolarSystem a = build_epipolar_system(conditioned.pairs);
  const Eigen::JacobiSVD<EpipolarSystem> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(7) / sv(0) < kDegeneracyRatio) {
    throw Error(ErrorKind::DegenerateConfiguration, "design matrix has rank below 8");
  }
  const Matrix3 f = detail::reshape(svd.matrixV().col(8));
  return detail::denormalize(f, conditioned.transform);
}

/// Minimal 7-point solver. Returns one canonical rank-2 matrix per real root
/// of det(lambda F_a + (1 - lambda) F_b) = 0.
inline std::vector<FundamentalMatrix> seven_point(std::span<const MatchPair> pairs, bool normalize = true) {
  if (pairs.size() != 7) {
    throw Error(ErrorKind::InvalidArgument, "seven_point needs exactly 7 pairs");
  }
  const auto conditioned = detail::condition(pairs, normalize);
  const EpipolarSystem a = build_epipolar_system(conditioned.pairs);
  const Eigen::JacobiSVD<EpipolarSystem> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(6) / sv(0) < kDegeneracyRatio) {
    throw Error(ErrorKind::DegenerateConfiguration, "design matrix has rank below 7");
  }
  const Matrix3 fa = detail::reshape(svd.matrixV().col(7));
  const Matrix3 fb = detail::reshape(svd.matrixV().col(8));

  // det(fb + lambda (fa - fb)) sampled at lambda = 0, 1, -1, 2.
  const Matrix3 diff = fa - fb;
  const auto det_at = [&](double lambda) { return (fb + lambda * diff).determinant(); };
  const double p0 = det_at(0.0);
  const double p1 = det_at(1.0);
  const double pm1 = det_at(-1.0);
  const double p2 = det_at(2.0);
  std::array<double, 4> c{};
  c[0] = p0;
  c[2] = 0.5 * (p1 + pm1) - p0;
  const double odd = 0.5 * (p1 - pm1);
  c[3] = (p2 - 4.0 * c[2] - p0 - 2.0 * odd) / 6.0;
  c[1] = odd - c[3];

  const double scale = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]), std::abs(c[3])});
  std::vector<Matrix3> solutions;
  if (std::abs(c[3]) <= 1e-12 * scale) {
    // Leading term vanishes: fa - fb is itself singular, and the remaining
    // roots come from the quadratic.
    solutions.push_back(diff);
    if (std::abs(c[2]) > 1e-12 * scale) {
      const double disc = c[1] * c[1] - 4.0 * c[2] * c[0];
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (const double lambda : {(-c[1] + sq) / (2.0 * c[2]), (-c[1] - sq) / (2.0 * c[2])}) {
          solutions.push_back(fb + lambda * diff);
        }
      }
    } else if (std::abs(c[1]) > 0.0) {
      solutions.push_back(fb - (c[0] / c[1]) * diff);
    }
  } else {
    for (const double lambda : detail::solve_cubic(c)) {
      solutions.push_back(fb + lambda * diff);
    }
  }

  std::vector<FundamentalMatrix> out;
  out.reserve(solutions.size());
  for (const auto& f : solutions) {
    out.push_back(detail::denormalize(f, conditioned.transform));
  }
  return out;
}

/// Smallest k with (1 - r^s)^k <= 1 - p, i.e. ceil(log(1 - p) / log(1 - r^s)),
/// at least 1. Saturates at the maximum size_t when r^s underflows.
inline std::size_t required_iterations(double confidence, double inlier_ratio, std::size_t sample_size) {
  if (!(confidence > 0.0 && confidence < 1.0) || !(inlier_ratio > 0.0 && inlier_ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "required_iterations: p in (0,1) and ratio in (0,1] required");
  }
  if (inlier_ratio >= 1.0) return 1;
  const double denom = std::log1p(-std::pow(inlier_ratio, static_cast<double>(sample_size)));
  if (denom == 0.0) return std::numeric_limits<std::size_t>::max();
  const double k = std::ceil(std::log1p(-confidence) / denom);
  if (k >= static_cast<double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

struct RansacConfig {
  double threshold = 1.0;  ///< pixels, symmetric point-to-epipolar-line distance
  double confidence = 0.99;
  std::size_t max_iterations = 100000;
  std::uint64_t seed = 0;
  std::size_t sample_size = 8;
  bool normalize = true;

  void validate() const {
    if (!(threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be positive");
    if (!(confidence > 0.0 && confidence < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "confidence must lie in (0, 1)");
    }
    if (max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
    if (sample_size != 8) throw Error(ErrorKind::InvalidArgument, "sample_size is fixed at 8");
  }
};

struct EstimateResult {
  FundamentalMatrix f_matrix;
  std::vector<bool> inlier_mask;
  std::size_t iterations_used = 0;
  double mean_inlier_error = 0.0;
  Seconds elapsed{0.0};
  Seconds refit_elapsed{0.0};

  std::size_t inlier_count() const {
    return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
  }
};

/// Equality of everything except the wall-clock fields.
inline bool same_outcome(const EstimateResult& a, const EstimateResult& b) {
  return a.f_matrix == b.f_matrix && a.inlier_mask == b.inlier_mask &&
         a.iterations_used == b.iterations_used && a.mean_inlier_error == b.mean_inlier_error;
}

namespace detail {

struct Consensus {
  std::vector<bool> mask;
  std::size_t count = 0;
  double mean_error = 0.0;
};

inline Consensus score(const FundamentalMatrix& f, std::span<const MatchPair> pairs, double threshold) {
  Consensus c;
  c.mask.assign(pairs.size(), false);
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double d = symmetric_epipolar_distance_or_inf(f, pairs[i]);
    if (d <= threshold) {
      c.mask[i] = true;
      ++c.count;
      sum += d;
    }
  }
  c.mean_error = c.count > 0 ? sum / static_cast<double>(c.count) : 0.0;
  return c;
}

inline double mean_masked_error(const FundamentalMatrix& f, std::span<const MatchPair> pairs,
                                const std::vector<bool>& mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!mask[i]) continue;
    sum += symmetric_epipolar_distance_or_inf(f, pairs[i]);
    ++n;
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

inline std::vector<MatchPair> masked(std::span<const MatchPair> pairs, const std::vector<bool>& mask) {
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (mask[i]) out.push_back(pairs[i]);
  }
  return out;
}

}  // namespace detail

/// RANSAC over 8-point minimal fits. The best model (most inliers, then
/// lowest mean inlier error, then earliest iteration) drives the adaptive
/// iteration bound; the final model is refit on its consensus set.
inline EstimateResult ransac(std::span<const MatchPair> pairs, const RansacConfig& config) {
  config.validate();
  if (pairs.size() < config.sample_size) {
    throw Error(ErrorKind::TooFewPoints, "ransac needs at least 8 pairs");
  }
  const auto start = Clock::now();
  const double n = static_cast<double>(pairs.size());
  std::mt19937_64 rng(config.seed);

  std::optional<FundamentalMatrix> best_model;
  detail::Consensus best;
  std::size_t bound = config.max_iterations;
  std::size_t iteration = 0;
  while (iteration < std::min(bound, config.max_iterations)) {
    ++iteration;
    const auto idx = detail::sample_distinct(rng, pairs.size(), config.sample_size);
    const auto sample = detail::gather(pairs, idx);
    std::optional<FundamentalMatrix> model;
    try {
      model = eight_point(sample, config.normalize);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateConfiguration && e.kind() != ErrorKind::SingularInput) throw;
      continue;
    }
    auto consensus = detail::score(*model, pairs, config.threshold);
    if (consensus.count < config.sample_size) continue;
    if (!best_model || consensus.count > best.count ||
        (consensus.count == best.count && consensus.mean_error < best.mean_error)) {
      best_model = model;
      best = std::move(consensus);
      bound = required_iterations(config.confidence, static_cast<double>(best.count) / n, config.sample_size);
    }
  }
  if (!best_model) {
    throw Error(ErrorKind::NoConsensus, "no sample reached 8 inliers");
  }

  const auto refit_start = Clock::now();
  FundamentalMatrix final_model = *best_model;
  detail::Consensus final_consensus = best;
  try {
    const auto inliers = detail::masked(pairs, best.mask);
    auto refit = eight_point(inliers, config.normalize);
    auto refit_consensus = detail::score(refit, pairs, config.threshold);
    if (refit_consensus.count >= config.sample_size) {
      final_model = refit;
      final_consensus = std::move(refit_consensus);
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateConfiguration && e.kind() != ErrorKind::SingularInput) throw;
  }
  const auto end = Clock::now();

  return EstimateResult{final_model,
                        std::move(final_consensus.mask),
                        iteration,
                        final_consensus.mean_error,
                        end - start,
                        end - refit_start};
}

/// Floor on the LMedS robust scale so exact data keeps its inliers.
inline constexpr double kLmedsMinScale = 1e-6;

/// Least median of squares over 7-point minimal fits. Inliers are pairs with
/// squared distance <= (2.5 s)^2, s = 1.4826 (1 + 5 / (N - 7)) sqrt(min median);
/// the returned matrix is the 8-point refit on that set.
inline EstimateResult lmeds(std::span<const MatchPair> pairs, std::size_t trials, std::uint64_t seed,
                            bool normalize = true) {
  if (pairs.size() < 8) throw Error(ErrorKind::TooFewPoints, "lmeds needs at least 8 pairs");
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "lmeds needs at least one trial");
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);

  std::optional<FundamentalMatrix> best_model;
  double best_median = std::numeric_limits<double>::infinity();
  double best_total = std::numeric_limits<double>::infinity();
  std::vector<double> sq(pairs.size());
  for (std::size_t t = 0; t < trials; ++t) {
    const auto idx = detail::sample_distinct(rng, pairs.size(), 7);
    const auto sample = detail::gather(pairs, idx);
    std::vector<FundamentalMatrix> candidates;
    try {
      candidates = seven_point(sample, normalize);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateConfiguration && e.kind() != ErrorKind::SingularInput) throw;
      continue;
    }
    for (const auto& f : candidates) {
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double d = symmetric_epipolar_distance_or_inf(f, pairs[i]);
        sq[i] = d * d;
      }
      // medians under the scale floor count as equal (exact data); the total
      // squared residual breaks such ties
      const double total = std::accumulate(sq.begin(), sq.end(), 0.0);
      const auto mid = sq.begin() + static_cast<std::ptrdiff_t>(sq.size() / 2);
      std::nth_element(sq.begin(), mid, sq.end());
      const double median = std::max(*mid, kLmedsMinScale * kLmedsMinScale);
      if (median < best_median || (median == best_median && total < best_total)) {
        best_median = median;
        best_total = total;
        best_model = f;
      }
    }
  }
  if (!best_model) throw Error(ErrorKind::NoConsensus, "every LMedS trial was degenerate");

  const double n = static_cast<double>(pairs.size());
  const double scale =
      std::max(kLmedsMinScale, 1.4826 * (1.0 + 5.0 / (n - 7.0)) * std::sqrt(best_median));
  const double cut = (2.5 * scale) * (2.5 * scale);
  std::vector<bool> mask(pairs.size(), false);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double d = symmetric_epipolar_distance_or_inf(*best_model, pairs[i]);
    mask[i] = d * d <= cut;
  }

  const auto refit_start = Clock::now();
  FundamentalMatrix final_model = *best_model;
  const auto inliers = detail::masked(pairs, mask);
  if (inliers.size() >= 8) {
    try {
      final_model = eight_point(inliers, normalize);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateConfiguration && e.kind() != ErrorKind::SingularInput) throw;
    }
  }
  const auto end = Clock::now();
  const double mean_error = detail::mean_masked_error(final_model, pairs, mask);
  return EstimateResult{final_model, std::move(mask), trials, mean_error, end - start, end - refit_start};
}

/// Plain 8-point fit over every pair, wrapped as an estimate (all pairs
/// counted as inliers).
inline EstimateResult eight_point_estimate(std::span<const MatchPair> pairs, bool normalize = true) {
  const auto start = Clock::now();
  auto f = eight_point(pairs, normalize);
  std::vector<bool> mask(pairs.size(), true);
  const double mean_error = detail::mean_masked_error(f, pairs, mask);
  return EstimateResult{f, std::move(mask), 1, mean_error, Clock::now() - start, Seconds{0.0}};
}

/// 7-point fit on the first seven pairs; the candidate with the lowest mean
/// symmetric distance over all pairs wins.
inline EstimateResult seven_point_estimate(std::span<const MatchPair> pairs, bool normalize = true) {
  if (pairs.size() < 7) throw Error(ErrorKind::TooFewPoints, "seven_point needs at least 7 pairs");
  const auto start = Clock::now();
  const auto candidates = seven_point(pairs.first(7), normalize);
  std::vector<bool> mask(pairs.size(), true);
  std::optional<FundamentalMatrix> best;
  double best_error = std::numeric_limits<double>::infinity();
  for (const auto& f : candidates) {
    const double e = detail::mean_masked_error(f, pairs, mask);
    if (!best || e < best_error) {
      best = f;
      best_error = e;
    }
  }
  return EstimateResult{*best, std::move(mask), 1, best_error, Clock::now() - start, Seconds{0.0}};
}

}  // namespace epiclust
