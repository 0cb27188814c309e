#pragma once

// Density-peaks clustering over 4D match vectors q = (x, y, x', y').
//
// rho_i counts neighbours strictly closer than the cutoff d_c (self
// excluded). Points are ranked by (rho desc, index asc); delta_i is the
// distance to the nearest higher-ranked point, or the row maximum for the
// top-ranked point. gamma_i = rho_i * delta_i.

#include <epiclust/error.hpp>
#include <epiclust/geometry.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

namespace epiclust {

struct MatchVector4 {
  std::array<double, 4> q{};

  static MatchVector4 from(const MatchPair& p) {
    return {{p.m.x / p.m.w, p.m.y / p.m.w, p.m_prime.x / p.m_prime.w, p.m_prime.y / p.m_prime.w}};
  }
  MatchPair to_pair() const { return MatchPair::from_pixels(q[0], q[1], q[2], q[3]); }

  friend bool operator==(const MatchVector4&, const MatchVector4&) = default;
};

inline std::vector<MatchVector4> build_match_vectors(std::span<const MatchPair> pairs) {
  std::vector<MatchVector4> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(MatchVector4::from(p));
  return out;
}

inline double euclidean_distance(const MatchVector4& a, const MatchVector4& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double d = a.q[k] - b.q[k];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Symmetric N x N Euclidean distance matrix with zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(Eigen::MatrixXd d) : d_(std::move(d)) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(d_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const noexcept { return d_; }

 private:
  Eigen::MatrixXd d_;
};

/// O(N^2) distances. With `threads > 1` the rows are split across workers;
/// every entry is computed by the same expression, so the output does not
/// depend on the thread count.
inline DistanceMatrix pairwise_distances(std::span<const MatchVector4> vectors, unsigned threads = 1) {
  const std::size_t n = vectors.size();
  if (n < 2) throw Error(ErrorKind::TooFewPoints, "pairwise distances need at least 2 vectors");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        // Evaluate with the smaller index first so d(i,j) and d(j,i) are the same bits.
        const double v = i < j ? euclidean_distance(vectors[i], vectors[j])
                               : euclidean_distance(vectors[j], vectors[i]);
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    fill_rows(0, n);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      workers.emplace_back(fill_rows, begin, std::min(n, begin + chunk));
    }
  }
  return DistanceMatrix(std::move(d));
}

/// Cutoff distance: the order statistic of rank ceil(f * N (N - 1) / 2)
/// (1-based) over the unique-pair distances, with the rank raised to at
/// least ceil(N / 2) so the mean neighbour count is not driven below one.
inline double select_dc(const DistanceMatrix& d, double target_fraction = 0.02) {
  const std::size_t n = d.size();
  if (n < 2) throw Error(ErrorKind::TooFewPoints, "select_dc needs at least 2 points");
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "target_fraction must lie in (0, 1)");
  }
  std::vector<double> pair_distances;
  pair_distances.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pair_distances.push_back(d(i, j));
  }
  const std::size_t m = pair_distances.size();
  // The relative nudge keeps products such as 0.4 * 10 from rounding up a rank.
  auto rank = static_cast<std::size_t>(std::ceil(target_fraction * static_cast<double>(m) * (1.0 - 1e-12)));
  rank = std::max(rank, (n + 1) / 2);
  rank = std::clamp<std::size_t>(rank, 1, m);
  const auto nth = pair_distances.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(pair_distances.begin(), nth, pair_distances.end());
  return *nth;
}

/// rho_i = #{ j != i : d_ij < d_c }.
inline std::vector<int> local_density(const DistanceMatrix& d, double d_c) {
  if (!(d_c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cutoff distance must be non-negative");
  const std::size_t n = d.size();
  std::vector<int> rho(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && d(i, j) < d_c) ++rho[i];
    }
  }
  return rho;
}

inline constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

struct DeltaAndParents {
  std::vector<double> delta;
  std::vector<std::size_t> nearest_higher;  ///< kNoParent for the top-ranked point
};

/// Indices sorted by density rank: rho descending, then index ascending.
inline std::vector<std::size_t> density_order(std::span<const int> rho) {
  std::vector<std::size_t> order(rho.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rho[a] > rho[b]; });
  return order;
}

inline DeltaAndParents delta_and_parents(const DistanceMatrix& d, std::span<const int> rho) {
  const std::size_t n = d.size();
  if (rho.size() != n) throw Error(ErrorKind::InvalidArgument, "rho size does not match the distance matrix");
  DeltaAndParents out{std::vector<double>(n, 0.0), std::vector<std::size_t>(n, kNoParent)};
  if (n == 0) return out;
  const auto order = density_order(rho);

  const std::size_t top = order.front();
  out.delta[top] = d.matrix().row(static_cast<Eigen::Index>(top)).maxCoeff();

  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t i = order[k];
    double best = std::numeric_limits<double>::infinity();
    std::size_t parent = kNoParent;
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t j = order[r];
      const double dij = d(i, j);
      if (dij < best || (dij == best && j < parent)) {
        best = dij;
        parent = j;
      }
    }
    out.delta[i] = best;
    out.nearest_higher[i] = parent;
  }
  return out;
}

struct DensityPeaksResult {
  std::vector<int> rho;
  std::vector<double> delta;
  std::vector<std::size_t> nearest_higher;
  std::vector<double> gamma;
  double d_c = 0.0;

  std::size_t size() const noexcept { return rho.size(); }
};

inline DensityPeaksResult density_peaks(const DistanceMatrix& d, double d_c) {
  DensityPeaksResult r;
  r.d_c = d_c;
  r.rho = local_density(d, d_c);
  auto dp = delta_and_parents(d, r.rho);
  r.delta = std::move(dp.delta);
  r.nearest_higher = std::move(dp.nearest_higher);
  r.gamma.resize(r.rho.size());
  for (std::size_t i = 0; i < r.rho.size(); ++i) {
    r.gamma[i] = static_cast<double>(r.rho[i]) * r.delta[i];
  }
  return r;
}

struct ClusterSelection {
  double alpha = 0.0;
  std::vector<std::size_t> inlier_indices;  ///< ascending
  double threshold_value = 0.0;

  std::vector<bool> mask(std::size_t n) const {
    std::vector<bool> m(n, false);
    for (const auto i : inlier_indices) m[i] = true;
    return m;
  }
};

/// Keeps points with gamma_i >= alpha * rho_max * delta_max. A zero threshold
/// keeps everything.
inline ClusterSelection select_inliers(const DensityPeaksResult& result, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be non-negative");
  ClusterSelection sel;
  sel.alpha = alpha;
  const std::size_t n = result.size();
  if (n == 0) return sel;
  const int rho_max = *std::max_element(result.rho.begin(), result.rho.end());
  const double delta_max = *std::max_element(result.delta.begin(), result.delta.end());
  sel.threshold_value = alpha * static_cast<double>(rho_max) * delta_max;
  for (std::size_t i = 0; i < n; ++i) {
    if (sel.threshold_value == 0.0 || result.gamma[i] >= sel.threshold_value) {
      sel.inlier_indices.push_back(i);
    }
  }
  return sel;
}

/// Cluster label per point: selected points are their own centres, every
/// other point inherits the label of its nearest higher-density neighbour.
/// The top-ranked point always labels itself.
inline std::vector<std::size_t> assign_clusters(const DensityPeaksResult& result,
                                                const ClusterSelection& selection) {
  const std::size_t n = result.size();
  std::vector<std::size_t> label(n, kNoParent);
  const auto centres = selection.mask(n);
  for (const auto i : density_order(result.rho)) {
    const std::size_t parent = result.nearest_higher[i];
    label[i] = centres[i] || parent == kNoParent ? i : label[parent];
  }
  return label;
}

}  // namespace epiclust
