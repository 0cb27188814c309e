#pragma once

// Clustering-assisted estimation: density-peaks selection over the 4D match
// vectors, then RANSAC restricted to the selected pairs.

#include <epiclust/density_peaks.hpp>
#include <epiclust/error.hpp>
#include <epiclust/estimators.hpp>
#include <epiclust/geometry.hpp>

#include <span>
#include <sstream>
#include <vector>

namespace epiclust {

struct PipelineConfig {
  double alpha = 0.011;
  RansacConfig ransac;
  double dc_fraction = 0.02;
  unsigned distance_threads = 1;

  void validate() const {
    if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be non-negative");
    if (!(dc_fraction > 0.0 && dc_fraction < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "dc_fraction must lie in (0, 1)");
    }
    ransac.validate();
  }
};

struct StageTimings {
  Seconds cluster{0.0};
  Seconds ransac{0.0};
  Seconds refit{0.0};
};

struct PipelineReport {
  EstimateResult estimate;  ///< mask indexed over the original pairs
  ClusterSelection cluster_selection;
  DensityPeaksResult density;
  StageTimings stage_timings;
};

struct ClusterStage {
  DensityPeaksResult density;
  ClusterSelection selection;
};

inline ClusterStage cluster_stage(std::span<const MatchPair> pairs, const PipelineConfig& config) {
  const auto vectors = build_match_vectors(pairs);
  const auto distances = pairwise_distances(vectors, config.distance_threads);
  const double d_c = select_dc(distances, config.dc_fraction);
  auto density = density_peaks(distances, d_c);
  auto selection = select_inliers(density, config.alpha);
  return {std::move(density), std::move(selection)};
}

inline PipelineReport clustering_assisted_estimate(std::span<const MatchPair> pairs,
                                                   const PipelineConfig& config) {
  config.validate();
  if (pairs.size() < 8) throw Error(ErrorKind::TooFewPoints, "pipeline needs at least 8 pairs");

  const auto start = Clock::now();
  auto stage = cluster_stage(pairs, config);
  const auto clustered = Clock::now();

  const auto& selected = stage.selection.inlier_indices;
  if (selected.size() < 8) {
    std::ostringstream msg;
    msg << "alpha = " << config.alpha << " keeps only " << selected.size() << " pairs";
    throw Error(ErrorKind::TooFewClusterInliers, msg.str());
  }
  const auto subset = detail::gather(pairs, selected);
  auto inner = ransac(subset, config.ransac);
  const auto end = Clock::now();

  std::vector<bool> mask(pairs.size(), false);
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (inner.inlier_mask[k]) mask[selected[k]] = true;
  }

  StageTimings timings;
  timings.cluster = clustered - start;
  timings.ransac = inner.elapsed - inner.refit_elapsed;
  timings.refit = inner.refit_elapsed;

  EstimateResult estimate{inner.f_matrix,          std::move(mask), inner.iterations_used,
                          inner.mean_inlier_error, end - start,     inner.refit_elapsed};
  return {std::move(estimate), std::move(stage.selection), std::move(stage.density), timings};
}

struct DecisionRecord {
  std::size_t index = 0;
  int rho = 0;
  double delta = 0.0;
  double gamma = 0.0;
  bool inlier = false;
  std::size_t nearest_higher = kNoParent;
};

struct DecisionFigure {
  std::vector<DecisionRecord> records;
  double d_c = 0.0;
  double alpha = 0.0;
  double curve_constant = 0.0;  ///< alpha * rho_max * delta_max
};

/// Per-point (rho, delta, gamma) with the selection flag and the constant of
/// the rho * delta = const curve.
inline DecisionFigure decision_figure(std::span<const MatchPair> pairs, const PipelineConfig& config) {
  if (pairs.size() < 2) throw Error(ErrorKind::TooFewPoints, "decision figure needs at least 2 pairs");
  const auto stage = cluster_stage(pairs, config);
  const auto mask = stage.selection.mask(pairs.size());
  DecisionFigure fig;
  fig.d_c = stage.density.d_c;
  fig.alpha = config.alpha;
  fig.curve_constant = stage.selection.threshold_value;
  fig.records.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    fig.records.push_back({i, stage.density.rho[i], stage.density.delta[i], stage.density.gamma[i], mask[i],
                           stage.density.nearest_higher[i]});
  }
  return fig;
}

}  // namespace epiclust
