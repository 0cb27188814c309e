#pragma once

// Synthetic two-view scenes with exact ground truth: random 3D points seen by
// two pinhole cameras, Gaussian pixel noise and planted gross mismatches.

#include <epiclust/error.hpp>
#include <epiclust/geometry.hpp>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace epiclust {

using ProjectionMatrix = Eigen::Matrix<double, 3, 4>;

struct CameraModel {
  double focal = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  Matrix3 intrinsics() const {
    Matrix3 k;
    k << focal, 0.0, cx,
         0.0, focal, cy,
         0.0, 0.0, 1.0;
    return k;
  }

  /// K [R | t]
  ProjectionMatrix projection() const {
    ProjectionMatrix rt;
    rt.leftCols<3>() = rotation;
    rt.col(3) = translation;
    return intrinsics() * rt;
  }

  Vector3 center() const { return -rotation.transpose() * translation; }

  /// Pixel projection of a world point; z of the result is the depth.
  Vector3 project(const Vector3& world) const {
    const Vector3 p = intrinsics() * (rotation * world + translation);
    return {p.x() / p.z(), p.y() / p.z(), p.z()};
  }
};

/// F = [e']_x P' P^+ with e' = P' C and C the camera centre of P.
inline FundamentalMatrix f_from_cameras(const ProjectionMatrix& p, const ProjectionMatrix& p_prime) {
  const Eigen::JacobiSVD<ProjectionMatrix> svd(p, Eigen::ComputeFullV);
  const Eigen::Vector4d centre = svd.matrixV().col(3);
  const Vector3 epipole = p_prime * centre;
  if (epipole.norm() <= 1e-12 * p_prime.norm()) {
    throw Error(ErrorKind::CoincidentCenters, "camera centres coincide");
  }
  const Eigen::Matrix<double, 4, 3> pinv = p.transpose() * (p * p.transpose()).inverse();
  return enforce_rank2(cross_product_matrix(epipole) * p_prime * pinv);
}

inline FundamentalMatrix f_from_cameras(const CameraModel& left, const CameraModel& right) {
  return f_from_cameras(left.projection(), right.projection());
}

struct SyntheticSceneConfig {
  std::size_t num_points = 200;
  double noise_sigma = 0.0;       ///< pixels, per coordinate
  double outlier_fraction = 0.0;  ///< share of right-image points replaced
  double width = 640.0;
  double height = 480.0;
  double focal = 500.0;
  double depth_min = 5.0;
  double depth_max = 15.0;
  double baseline_ratio = 0.2;    ///< baseline / mean scene depth
  double max_rotation_deg = 5.0;  ///< per axis
  double min_outlier_distance = 5.0;  ///< planted outliers sit farther than this from their epipolar lines
  std::uint64_t seed = 0;

  void validate() const {
    if (num_points < 8) throw Error(ErrorKind::InvalidArgument, "a scene needs at least 8 points");
    if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "outlier fraction must lie in [0, 1)");
    }
    if (!(width > 0.0 && height > 0.0)) throw Error(ErrorKind::InvalidArgument, "image size must be positive");
    if (!(focal > 0.0)) throw Error(ErrorKind::InvalidArgument, "focal length must be positive");
    if (!(depth_min > 0.0 && depth_max >= depth_min)) {
      throw Error(ErrorKind::InvalidArgument, "depth range must satisfy 0 < min <= max");
    }
    if (!(baseline_ratio >= 0.0) || !(max_rotation_deg >= 0.0) || !(min_outlier_distance >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "geometry parameters must be non-negative");
    }
  }
};

struct SyntheticScene {
  std::vector<MatchPair> pairs;
  std::vector<bool> truth_mask;  ///< true for genuine correspondences
  FundamentalMatrix f0;
  std::pair<CameraModel, CameraModel> cameras;
};

inline SyntheticScene generate_scene(const SyntheticSceneConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  CameraModel left;
  left.focal = config.focal;
  left.cx = config.width / 2.0;
  left.cy = config.height / 2.0;

  CameraModel right = left;
  const double max_angle = config.max_rotation_deg * std::numbers::pi / 180.0;
  const double rx = uniform(-max_angle, max_angle);
  const double ry = uniform(-max_angle, max_angle);
  const double rz = uniform(-max_angle, max_angle);
  right.rotation = (Eigen::AngleAxisd(rz, Vector3::UnitZ()) * Eigen::AngleAxisd(ry, Vector3::UnitY()) *
                    Eigen::AngleAxisd(rx, Vector3::UnitX()))
                       .toRotationMatrix();
  // Baseline direction uniform on the sphere.
  const double cos_theta = uniform(-1.0, 1.0);
  const double phi = uniform(0.0, 2.0 * std::numbers::pi);
  const double sin_theta = std::sqrt(1.0 - cos_theta * cos_theta);
  const Vector3 direction(sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta);
  const double baseline = config.baseline_ratio * 0.5 * (config.depth_min + config.depth_max);
  right.translation = -right.rotation * (baseline * direction);

  SyntheticScene scene{{}, {}, f_from_cameras(left, right), {left, right}};

  const std::size_t n = config.num_points;
  const Matrix3 k_inv = left.intrinsics().inverse();
  const auto inside = [&](double x, double y) {
    return x >= 0.0 && x <= config.width && y >= 0.0 && y <= config.height;
  };
  scene.pairs.reserve(n);
  const std::size_t max_attempts = 1000 * n + 1000;
  std::size_t attempts = 0;
  while (scene.pairs.size() < n) {
    if (++attempts > max_attempts) {
      throw Error(ErrorKind::FrustumEmpty, "cameras share too little of the scene");
    }
    const double u = uniform(0.0, config.width);
    const double v = uniform(0.0, config.height);
    const double depth = uniform(config.depth_min, config.depth_max);
    const Vector3 world = depth * (k_inv * Vector3(u, v, 1.0));
    const Vector3 q = right.project(world);
    if (!(q.z() > 0.0) || !inside(q.x(), q.y())) continue;
    scene.pairs.push_back(MatchPair::from_pixels(u, v, q.x(), q.y()));
  }

  if (config.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    for (auto& p : scene.pairs) {
      p.m.x += noise(rng);
      p.m.y += noise(rng);
      p.m_prime.x += noise(rng);
      p.m_prime.y += noise(rng);
    }
  }

  scene.truth_mask.assign(n, true);
  const auto outliers = static_cast<std::size_t>(std::llround(config.outlier_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(outliers);
  std::sort(order.begin(), order.end());
  for (const auto i : order) {
    auto& p = scene.pairs[i];
    for (int tries = 0;; ++tries) {
      if (tries == 10000) throw Error(ErrorKind::FrustumEmpty, "could not place an outlier");
      const MatchPair candidate{p.m, {uniform(0.0, config.width), uniform(0.0, config.height), 1.0}};
      if (symmetric_epipolar_distance_or_inf(scene.f0, candidate) > config.min_outlier_distance) {
        p = candidate;
        break;
      }
    }
    scene.truth_mask[i] = false;
  }
  return scene;
}

}  // namespace epiclust
