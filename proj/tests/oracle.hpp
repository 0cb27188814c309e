#pragma once

// Straightforward reference implementations of the density-peaks quantities,
// written directly from their definitions and used to cross-check the
// library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace epiclust::oracle {

struct Peaks {
  std::vector<int> rho;
  std::vector<double> delta;
  std::vector<long> parent;  // -1 for the top point
  std::vector<double> gamma;
};

using Points = std::vector<std::vector<double>>;

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

/// j outranks i: denser, or equally dense with a smaller index.
inline bool outranks(const std::vector<int>& rho, std::size_t j, std::size_t i) {
  return rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
}

inline Peaks peaks(const Points& pts, double d_c) {
  const std::size_t n = pts.size();
  Peaks r;
  r.rho.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dist(pts[i], pts[j]) < d_c) ++r.rho[i];
    }
  }
  r.delta.assign(n, 0.0);
  r.parent.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    bool has_higher = false;
    double best = std::numeric_limits<double>::infinity();
    long parent = -1;
    double farthest = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist(pts[i], pts[j]);
      farthest = std::max(farthest, d);
      if (j == i || !outranks(r.rho, j, i)) continue;
      has_higher = true;
      if (d < best) {  // j ascending, so the first minimum has the smallest index
        best = d;
        parent = static_cast<long>(j);
      }
    }
    r.delta[i] = has_higher ? best : farthest;
    r.parent[i] = parent;
  }
  for (std::size_t i = 0; i < n; ++i) r.gamma.push_back(r.rho[i] * r.delta[i]);
  return r;
}

inline std::vector<std::size_t> select(const Peaks& p, double alpha) {
  const int rho_max = *std::max_element(p.rho.begin(), p.rho.end());
  const double delta_max = *std::max_element(p.delta.begin(), p.delta.end());
  const double threshold = alpha * rho_max * delta_max;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.rho.size(); ++i) {
    if (threshold == 0.0 || p.gamma[i] >= threshold) out.push_back(i);
  }
  return out;
}

/// Smallest pair distance v with #{pairs : d <= v} >= rank, where rank is
/// ceil(f * M) raised to ceil(N / 2) and capped at M.
inline double select_dc(const Points& pts, long rank_numerator, long rank_denominator) {
  std::vector<double> all;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) all.push_back(dist(pts[i], pts[j]));
  }
  const long m = static_cast<long>(all.size());
  const long n = static_cast<long>(pts.size());
  long rank = (rank_numerator * m + rank_denominator - 1) / rank_denominator;
  rank = std::max(rank, (n + 1) / 2);
  rank = std::clamp(rank, 1L, m);
  double best = std::numeric_limits<double>::infinity();
  for (const double v : all) {
    const long count = std::count_if(all.begin(), all.end(), [&](double d) { return d <= v; });
    if (count >= rank) best = std::min(best, v);
  }
  return best;
}

}  // namespace epiclust::oracle
