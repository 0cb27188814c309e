#include "support.hpp"

#include <epiclust/evaluation.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace epiclust;
using namespace epiclust::test;

namespace {

Matrix3 fixed_perturbation() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  Matrix3 e;
  for (int i = 0; i < 9; ++i) e(i / 3, i % 3) = g(rng);
  return e / e.norm();
}

EvaluationConfig quick(std::uint64_t seed = 0) {
  EvaluationConfig c;
  c.trials = 500;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(ClipLine, Basics) {
  // y = 100 across the whole width
  const auto s = clip_line({0, 1, -100}, 640, 480);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR((s->first - s->second).norm(), 640.0, 1e-12);
  EXPECT_FALSE(clip_line({0, 1, -500}, 640, 480).has_value());
  // touches only the corner (0, 0)
  EXPECT_FALSE(clip_line({1, 1, 0}, 640, 480).has_value());
  // diagonal
  const auto d = clip_line({480, -640, 0}, 640, 480);
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR((d->first - d->second).norm(), 800.0, 1e-9);
}

TEST(ZhangError, Reflexive) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = scene(8, 0.0, 0.0, seed);
    const auto r = zhang_error(s.f0, s.f0, quick(seed));
    EXPECT_LE(r.d1, 1e-9);
    EXPECT_EQ(r.per_trial.size(), 500u);
  }
}

TEST(ZhangError, ScaleInvariant) {
  const auto s = scene(8, 0.0, 0.0, 1);
  const auto f1 = perturb_in_image_frame(s.f0, fixed_perturbation(), 0.05);
  const auto base = zhang_error(s.f0, f1, quick());
  for (const double c : {0.001, 3.0, 1e6}) {
    EXPECT_LE(zhang_error(s.f0, canonicalize(c * s.f0.matrix()), quick()).d1, 1e-9);
    EXPECT_NEAR(zhang_error(s.f0, canonicalize(c * f1.matrix()), quick()).d1, base.d1, 1e-9 * base.d1);
    EXPECT_NEAR(zhang_error(canonicalize(c * s.f0.matrix()), f1, quick()).d1, base.d1, 1e-9 * base.d1);
  }
}

TEST(ZhangError, MonotoneInPerturbation) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = scene(8, 0.0, 0.0, seed + 10);
    const Matrix3 e = fixed_perturbation();
    double prev = 0.0;
    for (const double scale : {0.01, 0.05, 0.1}) {
      const auto f1 = perturb_in_image_frame(s.f0, e, scale);
      const double d1 = zhang_error(s.f0, f1, quick(seed)).d1;
      EXPECT_GT(d1, 0.0);
      EXPECT_GE(d1, prev) << seed << ' ' << scale;
      prev = d1;
    }
  }
}

TEST(ZhangError, AggregateAndDeterminism) {
  const auto s = scene(8, 0.0, 0.0, 2);
  const auto f1 = perturb_in_image_frame(s.f0, fixed_perturbation(), 0.02);
  const auto a = zhang_error(s.f0, f1, quick(5));
  EXPECT_EQ(a, zhang_error(s.f0, f1, quick(5)));
  double sum = 0.0;
  for (const auto& [d, dp] : a.per_trial) {
    EXPECT_GE(d, 0.0);
    EXPECT_GE(dp, 0.0);
    sum += d + dp;
  }
  EXPECT_NEAR(a.d1, sum / 1000.0, 1e-12);
  EXPECT_NE(a.d1, zhang_error(s.f0, f1, quick(6)).d1);
}

TEST(ZhangError, RetriesExhausted) {
  // every epipolar line is far outside a 640 x 480 image
  Matrix3 f;
  f << 0, 0, 0, 0, 0, -1, 0, 1, -1e6;
  const auto g = canonicalize(f);
  EvaluationConfig c = quick();
  c.max_retries = 20;
  try {
    zhang_error(g, g, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RetriesExhausted);
  }
  c.trials = 0;
  EXPECT_THROW(zhang_error(g, g, c), Error);
}

TEST(Methods, Names) {
  for (const auto m : {Method::EightPoint, Method::SevenPoint, Method::Lmeds, Method::Ransac, Method::Proposed}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_FALSE(parse_method("ransac2").has_value());
}

TEST(Benchmark, FiveMethodsOrdering) {
  const auto s = scene(400, 1.0, 0.4, 3);
  const Dataset data{s.pairs, s.f0};
  const std::vector<Method> methods{Method::Proposed, Method::Ransac, Method::Lmeds, Method::SevenPoint,
                                    Method::EightPoint};
  BenchmarkConfig c;
  c.evaluation.trials = 300;
  c.lmeds_trials = 300;
  const auto rows = benchmark(data, methods, c);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].status, "ok");
    ASSERT_TRUE(rows[i].d1_px.has_value());
  }
  EXPECT_EQ(rows[0].method, Method::EightPoint);
  EXPECT_EQ(rows[4].method, Method::Proposed);
  const double worst_robust = std::max({*rows[2].d1_px, *rows[3].d1_px, *rows[4].d1_px});
  const double best_linear = std::min(*rows[0].d1_px, *rows[1].d1_px);
  EXPECT_LT(worst_robust, best_linear);
  for (const auto& r : rows) {
    if (uses_threshold(r.method)) EXPECT_LE(*r.mean_error_px, *r.threshold);
  }
}

TEST(Benchmark, EmptyAndDeterministic) {
  const auto s = scene(200, 1.0, 0.3, 4);
  const Dataset data{s.pairs, s.f0};
  BenchmarkConfig c;
  c.thresholds = {2.2, 1.0};
  c.alphas = {0.011, 0.02};
  c.evaluation.trials = 200;
  EXPECT_TRUE(benchmark(data, {}, c).empty());
  const std::vector<Method> methods{Method::Ransac, Method::Proposed};
  const auto a = benchmark(data, methods, c);
  const auto b = benchmark(data, methods, c);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same_outcome(a[i], b[i]));
  EXPECT_EQ(*a[0].threshold, 1.0);
  EXPECT_FALSE(a[0].alpha.has_value());
  EXPECT_EQ(*a[2].threshold, 1.0);
  EXPECT_EQ(*a[2].alpha, 0.02);
}

TEST(Benchmark, FailuresBecomeStatus) {
  const auto s = scene(60, 1.0, 0.3, 5);
  BenchmarkConfig c;
  c.alphas = {1.0};
  const std::vector<Method> methods{Method::Proposed, Method::EightPoint};
  const auto rows = benchmark({s.pairs, std::nullopt}, methods, c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_FALSE(rows[0].d1_px.has_value());
  EXPECT_EQ(rows[1].status, "TooFewClusterInliers");
  EXPECT_FALSE(rows[1].mean_error_px.has_value());
}
