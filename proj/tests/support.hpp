#pragma once

#include <epiclust/geometry.hpp>
#include <epiclust/synthetic.hpp>

#include <random>
#include <vector>

namespace epiclust::test {

/// Rectified stereo: y' = y.
inline Matrix3 rectified_f() {
  Matrix3 f;
  f << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  return f;
}

inline std::vector<MatchPair> rectified_pairs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(0.0, 640.0);
  std::uniform_real_distribution<double> y(0.0, 480.0);
  std::uniform_real_distribution<double> disparity(5.0, 60.0);
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x(rng);
    const double yi = y(rng);
    out.push_back(MatchPair::from_pixels(xi, yi, xi + disparity(rng), yi));
  }
  return out;
}

inline double max_abs_diff(const FundamentalMatrix& a, const FundamentalMatrix& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

inline SyntheticScene scene(std::size_t n, double sigma, double outliers, std::uint64_t seed) {
  SyntheticSceneConfig c;
  c.num_points = n;
  c.noise_sigma = sigma;
  c.outlier_fraction = outliers;
  c.seed = seed;
  return generate_scene(c);
}

/// F + s E with ||E|| = 1, where the addition happens in an image frame
/// scaled to roughly [-1, 1] so that every entry of F carries comparable
/// weight; F is normalized to unit norm in that frame first.
inline FundamentalMatrix perturb_in_image_frame(const FundamentalMatrix& f, const Matrix3& e, double s,
                                               double width = 640.0, double height = 480.0) {
  Matrix3 t;
  t << 2.0 / width, 0.0, -1.0, 0.0, 2.0 / width, -height / width, 0.0, 0.0, 1.0;
  const Matrix3 t_inv = t.inverse();
  Matrix3 fn = t_inv.transpose() * f.matrix() * t_inv;
  fn /= fn.norm();
  return enforce_rank2(t.transpose() * (fn + s * e / e.norm()) * t);
}

}  // namespace epiclust::test
