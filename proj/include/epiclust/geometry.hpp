#pragma once

// Two-view epipolar primitives: homogeneous points and lines, the bilinear
// epipolar constraint, point/line distances and the canonical form of a
// fundamental matrix.

#include <epiclust/error.hpp>

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace epiclust {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

struct HomogeneousPoint2 {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;

  static HomogeneousPoint2 from(const Vector3& v) { return {v.x(), v.y(), v.z()}; }
  Vector3 vec() const { return {x, y, w}; }

  friend bool operator==(const HomogeneousPoint2&, const HomogeneousPoint2&) = default;
};

/// Line a*x + b*y + c = 0.
struct Line2 {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  static Line2 from(const Vector3& v) { return {v.x(), v.y(), v.z()}; }
  Vector3 vec() const { return {a, b, c}; }

  friend bool operator==(const Line2&, const Line2&) = default;
};

/// A correspondence: `m` in the left image, `m_prime` in the right image.
struct MatchPair {
  HomogeneousPoint2 m;
  HomogeneousPoint2 m_prime;

  static MatchPair from_pixels(double x, double y, double xp, double yp) {
    return {{x, y, 1.0}, {xp, yp, 1.0}};
  }

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

enum class EpipolarSide { LeftToRight, RightToLeft };

class FundamentalMatrix;
FundamentalMatrix canonicalize(const Matrix3& f);

/// A 3x3 fundamental matrix held in canonical scale: unit Frobenius norm,
/// and the entry of largest magnitude (first in row-major order among near
/// ties) is positive. Instances only come out of `canonicalize` and
/// `enforce_rank2`.
class FundamentalMatrix {
 public:
  const Matrix3& matrix() const noexcept { return f_; }
  double operator()(int row, int col) const { return f_(row, col); }

  FundamentalMatrix transposed() const { return canonicalize(f_.transpose()); }

  friend bool operator==(const FundamentalMatrix& a, const FundamentalMatrix& b) {
    return a.f_ == b.f_;
  }

 private:
  explicit FundamentalMatrix(const Matrix3& f) : f_(f) {}
  friend FundamentalMatrix canonicalize(const Matrix3& f);

  Matrix3 f_;
};

/// Relative band inside which two entries count as tied for "largest
/// magnitude" when fixing the sign. Keeps the sign choice stable under
/// rounding noise for matrices with structurally equal entries.
inline constexpr double kSignTieTolerance = 1e-8;

/// |(a, b)| below this fraction of ||F|| * ||m|| marks an epipolar line as the
/// line at infinity (the point is the epipole).
inline constexpr double kLineDegeneracyTolerance = 1e-13;

inline FundamentalMatrix canonicalize(const Matrix3& f) {
  if (!f.allFinite()) {
    throw Error(ErrorKind::SingularInput, "matrix has non-finite entries");
  }
  const double norm = f.norm();
  if (norm == 0.0) {
    throw Error(ErrorKind::SingularInput, "cannot canonicalize the zero matrix");
  }
  Matrix3 g = f / norm;
  const double max_abs = g.cwiseAbs().maxCoeff();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(g(r, c)) >= max_abs * (1.0 - kSignTieTolerance)) {
        if (g(r, c) < 0.0) g = -g;
        return FundamentalMatrix(g);
      }
    }
  }
  return FundamentalMatrix(g);
}

/// Closest rank-2 matrix in Frobenius norm (smallest singular value zeroed),
/// returned in canonical scale.
inline FundamentalMatrix enforce_rank2(const Matrix3& f) {
  if (!f.allFinite() || f.norm() == 0.0) {
    throw Error(ErrorKind::SingularInput, "rank-2 projection needs a finite nonzero matrix");
  }
  const Eigen::JacobiSVD<Matrix3> svd(f / f.norm(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector3 sigma = svd.singularValues();
  sigma(2) = 0.0;
  return canonicalize(svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose());
}

/// Algebraic residual m'^T F m.
inline double epipolar_residual(const FundamentalMatrix& f, const MatchPair& pair) {
  return pair.m_prime.vec().dot(f.matrix() * pair.m.vec());
}

inline double epipolar_residual(const Matrix3& f, const MatchPair& pair) {
  return pair.m_prime.vec().dot(f * pair.m.vec());
}

/// l' = F m for LeftToRight, l = F^T m' for RightToLeft.
inline Line2 epipolar_line(const FundamentalMatrix& f, const HomogeneousPoint2& point,
                           EpipolarSide side) {
  const Vector3 p = point.vec();
  const Vector3 l =
      side == EpipolarSide::LeftToRight ? Vector3(f.matrix() * p) : Vector3(f.matrix().transpose() * p);
  if (std::sqrt(l.x() * l.x() + l.y() * l.y()) <= kLineDegeneracyTolerance * p.norm()) {
    throw Error(ErrorKind::DegenerateLine, "point maps to the line at infinity");
  }
  return Line2::from(l);
}

inline double point_line_distance(const Line2& l, const HomogeneousPoint2& p) {
  const double n = std::sqrt(l.a * l.a + l.b * l.b);
  if (n == 0.0) {
    throw Error(ErrorKind::DegenerateLine, "line has a = b = 0");
  }
  return std::abs(l.a * (p.x / p.w) + l.b * (p.y / p.w) + l.c) / n;
}

/// Symmetric distance, or +inf when either epipolar line is degenerate. Used
/// by scoring loops that must rank every pair.
inline double symmetric_epipolar_distance_or_inf(const Matrix3& f, const MatchPair& pair) {
  const double x = pair.m.x / pair.m.w;
  const double y = pair.m.y / pair.m.w;
  const double xp = pair.m_prime.x / pair.m_prime.w;
  const double yp = pair.m_prime.y / pair.m_prime.w;
  // l' = F m and l = F^T m'
  const double ra = f(0, 0) * x + f(0, 1) * y + f(0, 2);
  const double rb = f(1, 0) * x + f(1, 1) * y + f(1, 2);
  const double rc = f(2, 0) * x + f(2, 1) * y + f(2, 2);
  const double la = f(0, 0) * xp + f(1, 0) * yp + f(2, 0);
  const double lb = f(0, 1) * xp + f(1, 1) * yp + f(2, 1);
  const double lc = f(0, 2) * xp + f(1, 2) * yp + f(2, 2);
  const double rn = std::sqrt(ra * ra + rb * rb);
  const double ln = std::sqrt(la * la + lb * lb);
  const double scale = kLineDegeneracyTolerance * f.norm();
  if (rn <= scale * std::sqrt(x * x + y * y + 1.0) || ln <= scale * std::sqrt(xp * xp + yp * yp + 1.0)) {
    return std::numeric_limits<double>::infinity();
  }
  const double right = std::abs(ra * xp + rb * yp + rc) / rn;
  const double left = std::abs(la * x + lb * y + lc) / ln;
  return 0.5 * (right + left);
}

inline double symmetric_epipolar_distance_or_inf(const FundamentalMatrix& f, const MatchPair& pair) {
  return symmetric_epipolar_distance_or_inf(f.matrix(), pair);
}

/// Mean of d(m', F m) and d(m, F^T m').
inline double symmetric_epipolar_distance(const FundamentalMatrix& f, const MatchPair& pair) {
  const double d = symmetric_epipolar_distance_or_inf(f, pair);
  if (d == std::numeric_limits<double>::infinity()) {
    throw Error(ErrorKind::DegenerateLine, "point maps to the line at infinity");
  }
  return d;
}

inline Matrix3 cross_product_matrix(const Vector3& v) {
  Matrix3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace epiclust
