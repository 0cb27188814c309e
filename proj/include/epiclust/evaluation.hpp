#pragma once

// Ground-truth comparison of two fundamental matrices by resampled
// point-to-epipolar-line distances, and a benchmark runner over several
// estimators.

#include <epiclust/error.hpp>
#include <epiclust/estimators.hpp>
#include <epiclust/geometry.hpp>
#include <epiclust/pipeline.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace epiclust {

struct EvaluationConfig {
  std::size_t trials = 1000;
  double width = 640.0;
  double height = 480.0;
  std::uint64_t seed = 0;
  std::size_t max_retries = 1000;  ///< consecutive rejected draws before giving up

  void validate() const {
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    if (!(width > 0.0 && height > 0.0)) throw Error(ErrorKind::InvalidArgument, "image bounds must be positive");
  }
};

struct EvaluationReport {
  double d1 = 0.0;
  std::vector<std::pair<double, double>> per_trial;  ///< (d_i, d'_i)
  std::size_t retries_used = 0;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

using Segment2 = std::pair<Eigen::Vector2d, Eigen::Vector2d>;

/// Portion of the line inside [0, width] x [0, height]; empty when the line
/// misses the rectangle or only touches a corner.
inline std::optional<Segment2> clip_line(const Line2& l, double width, double height) {
  std::vector<Eigen::Vector2d> hits;
  if (l.b != 0.0) {
    for (const double x : {0.0, width}) {
      const double y = -(l.a * x + l.c) / l.b;
      if (y >= 0.0 && y <= height) hits.emplace_back(x, y);
    }
  }
  if (l.a != 0.0) {
    for (const double y : {0.0, height}) {
      const double x = -(l.b * y + l.c) / l.a;
      if (x >= 0.0 && x <= width) hits.emplace_back(x, y);
    }
  }
  double best = 0.0;
  std::optional<Segment2> seg;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    for (std::size_t j = i + 1; j < hits.size(); ++j) {
      const double len = (hits[i] - hits[j]).norm();
      if (len > best) {
        best = len;
        seg = Segment2{hits[i], hits[j]};
      }
    }
  }
  if (best <= 1e-9) return std::nullopt;
  return seg;
}

/// Mean distance d1 between points consistent with f0 and the epipolar lines
/// of f1. Per trial: m uniform in the image, m' uniform along the in-image
/// part of F0 m, d' = d(m', F1 m), d = d(m, F1^T m'). Draws whose epipolar
/// lines miss the image are redrawn.
inline EvaluationReport zhang_error(const FundamentalMatrix& f0, const FundamentalMatrix& f1,
                                    const EvaluationConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  EvaluationReport report;
  report.per_trial.reserve(config.trials);
  double sum = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    std::size_t consecutive = 0;
    for (;;) {
      const HomogeneousPoint2 m{config.width * unit(rng), config.height * unit(rng), 1.0};
      const double s = unit(rng);
      const auto reject = [&] {
        ++report.retries_used;
        if (++consecutive > config.max_retries) {
          throw Error(ErrorKind::RetriesExhausted, "epipolar lines keep missing the image");
        }
      };
      try {
        const Line2 l0 = epipolar_line(f0, m, EpipolarSide::LeftToRight);
        const Line2 l1 = epipolar_line(f1, m, EpipolarSide::LeftToRight);
        const auto seg0 = clip_line(l0, config.width, config.height);
        if (!seg0 || !clip_line(l1, config.width, config.height)) {
          reject();
          continue;
        }
        const Eigen::Vector2d q = seg0->first + s * (seg0->second - seg0->first);
        const HomogeneousPoint2 m_prime{q.x(), q.y(), 1.0};
        const Line2 l0p = epipolar_line(f0, m_prime, EpipolarSide::RightToLeft);
        const Line2 l1p = epipolar_line(f1, m_prime, EpipolarSide::RightToLeft);
        if (!clip_line(l0p, config.width, config.height) || !clip_line(l1p, config.width, config.height)) {
          reject();
          continue;
        }
        const double d_prime = point_line_distance(l1, m_prime);
        const double d = point_line_distance(l1p, m);
        report.per_trial.emplace_back(d, d_prime);
        sum += d + d_prime;
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateLine) throw;
        reject();
      }
    }
  }
  report.d1 = sum / (2.0 * static_cast<double>(config.trials));
  return report;
}

enum class Method { EightPoint, SevenPoint, Lmeds, Ransac, Proposed };

inline constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::EightPoint: return "eight-point";
    case Method::SevenPoint: return "seven-point";
    case Method::Lmeds: return "lmeds";
    case Method::Ransac: return "ransac";
    case Method::Proposed: return "proposed";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
  for (const auto m : {Method::EightPoint, Method::SevenPoint, Method::Lmeds, Method::Ransac, Method::Proposed}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

inline bool uses_threshold(Method m) { return m == Method::Ransac || m == Method::Proposed; }

struct Dataset {
  std::vector<MatchPair> pairs;
  std::optional<FundamentalMatrix> f0;
};

struct BenchmarkConfig {
  std::vector<double> thresholds{2.2};
  /// One alpha per threshold, or a single alpha shared by all thresholds.
  std::vector<double> alphas{0.011};
  double confidence = 0.99;
  std::size_t max_iterations = 100000;
  std::size_t lmeds_trials = 1000;
  double dc_fraction = 0.02;
  bool normalize = true;
  std::uint64_t seed = 0;
  EvaluationConfig evaluation;

  double alpha_for(std::size_t threshold_index) const {
    if (alphas.empty()) throw Error(ErrorKind::InvalidArgument, "no alpha given");
    if (alphas.size() == 1) return alphas.front();
    if (alphas.size() != thresholds.size()) {
      throw Error(ErrorKind::InvalidArgument, "alpha list must match the threshold list");
    }
    return alphas[threshold_index];
  }
};

struct BenchmarkRow {
  Method method = Method::EightPoint;
  std::optional<double> threshold;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  double time_ms = 0.0;
  std::optional<double> mean_error_px;
  std::optional<double> d1_px;
  std::string status = "ok";
  std::optional<EstimateResult> estimate;
};

/// Equality of everything except the timing field.
inline bool same_outcome(const BenchmarkRow& a, const BenchmarkRow& b) {
  return a.method == b.method && a.threshold == b.threshold && a.alpha == b.alpha && a.seed == b.seed &&
         a.mean_error_px == b.mean_error_px && a.d1_px == b.d1_px && a.status == b.status;
}

namespace detail {

inline EstimateResult run_method(Method method, std::span<const MatchPair> pairs, const BenchmarkConfig& config,
                                 std::optional<double> threshold, std::optional<double> alpha) {
  RansacConfig rc;
  rc.threshold = threshold.value_or(1.0);
  rc.confidence = config.confidence;
  rc.max_iterations = config.max_iterations;
  rc.seed = config.seed;
  rc.normalize = config.normalize;
  switch (method) {
    case Method::EightPoint: return eight_point_estimate(pairs, config.normalize);
    case Method::SevenPoint: return seven_point_estimate(pairs, config.normalize);
    case Method::Lmeds: return lmeds(pairs, config.lmeds_trials, config.seed, config.normalize);
    case Method::Ransac: return ransac(pairs, rc);
    case Method::Proposed: {
      PipelineConfig pc;
      pc.alpha = alpha.value_or(0.0);
      pc.ransac = rc;
      pc.dc_fraction = config.dc_fraction;
      return clustering_assisted_estimate(pairs, pc).estimate;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown method");
}

}  // namespace detail

/// One row per (method, parameter set). Threshold-free methods get a single
/// row; RANSAC and the clustering pipeline get one per threshold. Failures
/// are recorded in the row status. Rows are ordered by method, then
/// threshold, then alpha.
inline std::vector<BenchmarkRow> benchmark(const Dataset& dataset, std::span<const Method> methods,
                                           const BenchmarkConfig& config) {
  std::vector<BenchmarkRow> rows;
  std::vector<Method> unique(methods.begin(), methods.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  const auto run = [&](Method method, std::optional<double> th, std::optional<double> alpha) {
    BenchmarkRow row;
    row.method = method;
    row.threshold = th;
    row.alpha = alpha;
    row.seed = config.seed;
    const auto start = Clock::now();
    try {
      auto est = detail::run_method(method, dataset.pairs, config, th, alpha);
      row.time_ms = Seconds(Clock::now() - start).count() * 1e3;
      row.mean_error_px = est.mean_inlier_error;
      if (dataset.f0) row.d1_px = zhang_error(*dataset.f0, est.f_matrix, config.evaluation).d1;
      row.estimate = std::move(est);
    } catch (const Error& e) {
      if (row.time_ms == 0.0) row.time_ms = Seconds(Clock::now() - start).count() * 1e3;
      row.status = std::string(to_string(e.kind()));
    }
    rows.push_back(std::move(row));
  };

  for (const auto method : unique) {
    if (!uses_threshold(method)) {
      run(method, std::nullopt, std::nullopt);
      continue;
    }
    for (std::size_t k = 0; k < config.thresholds.size(); ++k) {
      const std::optional<double> alpha =
          method == Method::Proposed ? std::optional<double>(config.alpha_for(k)) : std::nullopt;
      run(method, config.thresholds[k], alpha);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.threshold != b.threshold) return a.threshold < b.threshold;
    return a.alpha < b.alpha;
  });
  return rows;
}

}  // namespace epiclust
