#include "oracle.hpp"

#include <epiclust/density_peaks.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace epiclust;

namespace {

std::vector<MatchVector4> line_points(std::initializer_list<double> xs) {
  std::vector<MatchVector4> out;
  for (const double x : xs) out.push_back({{x, 0.0, 0.0, 0.0}});
  return out;
}

oracle::Points to_points(const std::vector<MatchVector4>& v) {
  oracle::Points out;
  for (const auto& q : v) out.emplace_back(q.q.begin(), q.q.end());
  return out;
}

std::vector<MatchVector4> random_vectors(std::mt19937_64& rng, std::size_t n, double span) {
  std::uniform_real_distribution<double> u(0.0, span);
  std::vector<MatchVector4> out(n);
  for (auto& v : out) {
    for (auto& c : v.q) c = u(rng);
  }
  return out;
}

const auto kFive = line_points({0.0, 0.1, 0.2, 5.0, 5.1});

}  // namespace

TEST(MatchVectors, Concatenation) {
  const std::vector<MatchPair> pairs{MatchPair::from_pixels(1, 2, 3, 4)};
  const auto v = build_match_vectors(pairs);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].q, (std::array<double, 4>{1, 2, 3, 4}));
  EXPECT_EQ(v[0].to_pair(), pairs[0]);
  EXPECT_TRUE(build_match_vectors({}).empty());
}

TEST(PairwiseDistances, Examples) {
  const std::vector<MatchVector4> v{{{0, 0, 0, 0}}, {{3, 4, 0, 0}}, {{3, 4, 0, 0}}};
  const auto d = pairwise_distances(v);
  EXPECT_EQ(d(0, 1), 5.0);
  EXPECT_EQ(d(1, 0), 5.0);
  EXPECT_EQ(d(1, 2), 0.0);
  EXPECT_EQ(d(2, 2), 0.0);
  try {
    pairwise_distances(std::span(v).first(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewPoints);
  }
}

TEST(PairwiseDistances, ThreadCountDoesNotChangeBits) {
  std::mt19937_64 rng(1);
  const auto v = random_vectors(rng, 50, 640.0);
  const auto seq = pairwise_distances(v, 1);
  for (const unsigned t : {2u, 3u, 4u, 8u, 64u}) {
    EXPECT_EQ(pairwise_distances(v, t).matrix(), seq.matrix()) << t;
  }
  EXPECT_EQ(seq.matrix(), seq.matrix().transpose());
}

TEST(SelectDc, Examples) {
  const std::vector<MatchVector4> two{{{0, 0, 0, 0}}, {{1, 2, 2, 0}}};
  EXPECT_EQ(select_dc(pairwise_distances(two), 0.02), 3.0);
  EXPECT_EQ(select_dc(pairwise_distances(two), 0.9), 3.0);
  EXPECT_NEAR(select_dc(pairwise_distances(kFive), 0.4), 0.2, 1e-15);
}

TEST(SelectDc, MatchesOracleAndCountProperty) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    const auto v = random_vectors(rng, n, 100.0);
    const auto d = pairwise_distances(v);
    const long num = 1 + static_cast<long>(rng() % 49);  // f = num / 50
    const double f = static_cast<double>(num) / 50.0;
    const double dc = select_dc(d, f);
    EXPECT_EQ(dc, oracle::select_dc(to_points(v), num, 50)) << n << ' ' << f;

    // #pairs within d_c reaches the rank; the next smaller distance does not
    std::vector<double> all;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) all.push_back(d(i, j));
    }
    const auto m = static_cast<long>(all.size());
    const long rank = std::clamp(std::max((num * m + 49) / 50, static_cast<long>(n + 1) / 2), 1L, m);
    EXPECT_GE(std::count_if(all.begin(), all.end(), [&](double x) { return x <= dc; }), rank);
    EXPECT_LT(std::count_if(all.begin(), all.end(), [&](double x) { return x < dc; }), rank);
  }
}

TEST(SelectDc, RejectsBadFraction) {
  const auto d = pairwise_distances(kFive);
  EXPECT_THROW(select_dc(d, 0.0), Error);
  EXPECT_THROW(select_dc(d, 1.0), Error);
}

TEST(LocalDensity, Examples) {
  const auto d = pairwise_distances(kFive);
  EXPECT_EQ(local_density(d, 0.5), (std::vector<int>{2, 2, 2, 1, 1}));
  EXPECT_EQ(local_density(d, 0.05), (std::vector<int>{0, 0, 0, 0, 0}));
  // equality does not count
  EXPECT_EQ(local_density(pairwise_distances(line_points({0, 1})), 1.0), (std::vector<int>{0, 0}));
  const auto same = pairwise_distances(line_points({3, 3, 3, 3}));
  EXPECT_EQ(local_density(same, 0.7), (std::vector<int>{3, 3, 3, 3}));
}

TEST(DeltaAndParents, FivePointExample) {
  const auto d = pairwise_distances(kFive);
  const auto r = delta_and_parents(d, local_density(d, 0.5));
  const std::vector<double> delta{5.1, 0.1, 0.1, 4.8, 0.1};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.delta[i], delta[i], 1e-12) << i;
  EXPECT_EQ(r.nearest_higher, (std::vector<std::size_t>{kNoParent, 0, 1, 2, 3}));
}

TEST(DeltaAndParents, TwoPointsTie) {
  const auto d = pairwise_distances(line_points({0, 2.5}));
  const auto r = delta_and_parents(d, std::vector<int>{0, 0});
  EXPECT_EQ(r.delta, (std::vector<double>{2.5, 2.5}));
  EXPECT_EQ(r.nearest_higher, (std::vector<std::size_t>{kNoParent, 0}));
}

TEST(DeltaAndParents, DecreasingRhoPointsBackwards) {
  std::mt19937_64 rng(3);
  const auto v = random_vectors(rng, 12, 10.0);
  const auto d = pairwise_distances(v);
  std::vector<int> rho(12);
  std::iota(rho.rbegin(), rho.rend(), 0);
  const auto r = delta_and_parents(d, rho);
  for (std::size_t i = 1; i < 12; ++i) EXPECT_LT(r.nearest_higher[i], i);
}

TEST(SelectInliers, Examples) {
  const auto d = pairwise_distances(kFive);
  const auto r = density_peaks(d, 0.5);
  const std::vector<double> gamma{10.2, 0.2, 0.2, 4.8, 0.1};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.gamma[i], gamma[i], 1e-12);
  const auto half = select_inliers(r, 0.5);
  EXPECT_NEAR(half.threshold_value, 5.1, 1e-12);
  EXPECT_EQ(half.inlier_indices, (std::vector<std::size_t>{0}));
  EXPECT_EQ(select_inliers(r, 0.0).inlier_indices.size(), 5u);
  EXPECT_THROW(select_inliers(r, -1.0), Error);
}

TEST(SelectInliers, DegenerateThresholdKeepsAll) {
  const auto d = pairwise_distances(line_points({1, 1, 1}));
  const auto r = density_peaks(d, 0.0);
  const auto sel = select_inliers(r, 0.5);
  EXPECT_EQ(sel.threshold_value, 0.0);
  EXPECT_EQ(sel.inlier_indices.size(), 3u);
}

TEST(DensityPeaks, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 14;
    // a coarse grid makes equal densities and equal distances common
    std::uniform_int_distribution<int> grid(0, 4);
    std::vector<MatchVector4> v(n);
    for (auto& q : v) {
      for (auto& c : q.q) c = grid(rng);
    }
    const auto d = pairwise_distances(v);
    const double dc = select_dc(d, 0.1);
    const auto got = density_peaks(d, dc);
    const auto want = oracle::peaks(to_points(v), dc);
    ASSERT_EQ(got.rho, want.rho);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(got.delta[i], want.delta[i], 1e-12);
      EXPECT_EQ(got.nearest_higher[i] == kNoParent ? -1L : static_cast<long>(got.nearest_higher[i]),
                want.parent[i]);
    }
    for (const double alpha : {0.0, 0.05, 0.2, 0.5, 1.0}) {
      EXPECT_EQ(select_inliers(got, alpha).inlier_indices, oracle::select(want, alpha));
    }
  }
}

TEST(DensityPeaks, ForestAndBounds) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = random_vectors(rng, 40, 50.0);
    const auto d = pairwise_distances(v);
    const auto r = density_peaks(d, select_dc(d));
    const double dmax = d.matrix().maxCoeff();
    std::size_t roots = 0;
    for (std::size_t i = 0; i < 40; ++i) {
      EXPECT_LE(r.delta[i], dmax);
      if (r.nearest_higher[i] == kNoParent) {
        ++roots;
        EXPECT_EQ(r.delta[i], d.matrix().row(static_cast<Eigen::Index>(i)).maxCoeff());
      }
      std::size_t at = i;
      std::size_t steps = 0;
      while (r.nearest_higher[at] != kNoParent && steps <= 40) {
        at = r.nearest_higher[at];
        ++steps;
      }
      EXPECT_LE(steps, 39u);
    }
    EXPECT_EQ(roots, 1u);
  }
}

TEST(DensityPeaks, AlphaMonotone) {
  std::mt19937_64 rng(6);
  const auto v = random_vectors(rng, 80, 100.0);
  const auto d = pairwise_distances(v);
  const auto r = density_peaks(d, select_dc(d));
  std::vector<bool> prev(80, true);
  for (double alpha = 0.0; alpha <= 1.0; alpha += 0.01) {
    const auto mask = select_inliers(r, alpha).mask(80);
    for (std::size_t i = 0; i < 80; ++i) {
      if (mask[i]) EXPECT_TRUE(prev[i]);
    }
    prev = mask;
  }
}

TEST(DensityPeaks, PermutationEquivariance) {
  // Equal densities are unavoidable (any graph has two vertices of equal
  // degree), so permutations keep the relative order inside each tie class.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 30;
    const auto v = random_vectors(rng, n, 100.0);
    const auto d = pairwise_distances(v);
    const double dc = select_dc(d, 0.1);
    const auto base = density_peaks(d, dc);

    std::vector<std::size_t> perm(n);  // perm[new] = old
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int level = 0; level < static_cast<int>(n); ++level) {
      std::vector<std::size_t> slots;
      std::vector<std::size_t> olds;
      for (std::size_t k = 0; k < n; ++k) {
        if (base.rho[perm[k]] == level) {
          slots.push_back(k);
          olds.push_back(perm[k]);
        }
      }
      std::sort(olds.begin(), olds.end());
      for (std::size_t k = 0; k < slots.size(); ++k) perm[slots[k]] = olds[k];
    }
    std::vector<std::size_t> inverse(n);
    for (std::size_t k = 0; k < n; ++k) inverse[perm[k]] = k;

    std::vector<MatchVector4> moved(n);
    for (std::size_t k = 0; k < n; ++k) moved[k] = v[perm[k]];
    const auto r = density_peaks(pairwise_distances(moved), dc);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_EQ(r.rho[k], base.rho[perm[k]]);
      EXPECT_EQ(r.delta[k], base.delta[perm[k]]);
      const auto parent = base.nearest_higher[perm[k]];
      if (parent == kNoParent) {
        EXPECT_EQ(r.nearest_higher[k], kNoParent);
      } else {
        // distance ties between parents may resolve differently; the distance cannot
        EXPECT_EQ(d(perm[k], perm[r.nearest_higher[k]]), d(perm[k], parent));
      }
    }
    std::vector<std::size_t> mapped;
    for (const auto i : select_inliers(r, 0.1).inlier_indices) mapped.push_back(perm[i]);
    std::sort(mapped.begin(), mapped.end());
    EXPECT_EQ(mapped, select_inliers(base, 0.1).inlier_indices);
  }
}

TEST(DensityPeaks, SeparatedBlobs) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<MatchVector4> v;
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 40; ++k) v.push_back({{b * 1000.0 + g(rng), g(rng), g(rng), b * 500.0 + g(rng)}});
    }
    const auto d = pairwise_distances(v);
    const auto r = density_peaks(d, select_dc(d));
    std::vector<std::size_t> idx(80);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(),
                      [&](std::size_t a, std::size_t b) { return r.gamma[a] > r.gamma[b]; });
    EXPECT_NE(idx[0] / 40, idx[1] / 40);
  }
}

TEST(AssignClusters, FollowsParents) {
  const auto d = pairwise_distances(kFive);
  const auto r = density_peaks(d, 0.5);
  ClusterSelection centres;
  centres.inlier_indices = {0, 3};
  EXPECT_EQ(assign_clusters(r, centres), (std::vector<std::size_t>{0, 0, 0, 3, 3}));
}
