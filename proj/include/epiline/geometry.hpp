#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "epiline/errors.hpp"

namespace epiline {

/// Homogeneous 2D point (pixels when dehomogenized). Equality is up to scale;
/// a zero third coordinate is a legal ideal point (direction).
struct HomPoint {
  Eigen::Vector3d v{0.0, 0.0, 1.0};

  HomPoint() = default;
  HomPoint(double x, double y, double w = 1.0) : v(x, y, w) {}
  explicit HomPoint(const Eigen::Vector3d& u) : v(u) {}

  double x() const { return v.x(); }
  double y() const { return v.y(); }
  double w() const { return v.z(); }

  bool is_ideal(double tol = 1e-12) const {
    return std::abs(v.z()) <= tol * v.head<2>().norm();
  }

  /// Pixel coordinates; throws DegenerateInput for ideal points.
  Eigen::Vector2d dehom() const;

  /// Unit-norm copy with the largest-magnitude coordinate made positive.
  HomPoint normalized() const;
};

/// Homogeneous 2D line a*x + b*y + c = 0. Equality is up to scale.
struct HomLine {
  Eigen::Vector3d v{0.0, 0.0, 0.0};

  HomLine() = default;
  HomLine(double a, double b, double c) : v(a, b, c) {}
  explicit HomLine(const Eigen::Vector3d& u) : v(u) {}

  double a() const { return v.x(); }
  double b() const { return v.y(); }
  double c() const { return v.z(); }

  /// Signed incidence value a*x + b*y + c*w.
  double eval(const HomPoint& p) const { return v.dot(p.v); }

  bool valid() const { return v.head<2>().norm() > 0.0; }

  /// Copy scaled so hypot(a, b) = 1. eval() of a finite point with w=1 is
  /// then the signed perpendicular distance in pixels.
  HomLine normal_form() const;

  /// Unit-norm copy (3-vector), largest-magnitude coordinate positive.
  HomLine normalized() const;

  /// Unit direction vector of the line, (b, -a) normalized.
  Eigen::Vector2d direction() const;
};

/// sin of the angle between two 3-vectors, scale-invariant. Zero iff equal
/// up to scale.
double cross_gap(const Eigen::Vector3d& u, const Eigen::Vector3d& w);

bool same_up_to_scale(const HomPoint& p, const HomPoint& q, double tol = 1e-9);
bool same_up_to_scale(const HomLine& l, const HomLine& m, double tol = 1e-9);

/// Pixel dimensions of an image; also the rectangle [0,w]x[0,h] for the
/// area measure.
struct ImageBounds {
  int width = 0;
  int height = 0;

  ImageBounds() = default;
  ImageBounds(int w, int h);
};

enum class MapRole { line_homography, point_homography, skew };

/// 3x3 projective map. With role line_homography it maps line coordinates
/// (the epipolar line homographies H and G); with role skew it is [e]x.
struct ProjectiveMap {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  MapRole role = MapRole::line_homography;

  ProjectiveMap() = default;
  ProjectiveMap(const Eigen::Matrix3d& mat, MapRole r) : m(mat), role(r) {}

  HomLine map_line(const HomLine& l) const { return HomLine(m * l.v); }
  HomPoint map_point(const HomPoint& p) const { return HomPoint(m * p.v); }
};

/// Join of two distinct points (cross product). Incidence is exact by
/// construction.
HomLine line_through(const HomPoint& p, const HomPoint& q);

/// Meet of two distinct lines; may be an ideal point for parallel lines.
HomPoint intersect(const HomLine& l1, const HomLine& l2);

/// [e]x, the antisymmetric matrix with [e]x * x = e cross x.
ProjectiveMap skew(const HomPoint& e);

/// Closest rank-2 matrix in Frobenius norm.
Eigen::Matrix3d enforce_rank2(const Eigen::Matrix3d& m);

struct LinePair {
  HomLine l1;  // image 1
  HomLine l2;  // image 2
};

struct DltOptions {
  // Residual per pair, measured as the cross-product norm of the target
  // line vs. the mapped source line, both in normal form (mixed px units).
  double residual_tol = 1e-6;
  // Pencil consistency: sin-angle between H^T e2 and e1.
  double pencil_tol = 1e-6;
};

/// Line homography from three corresponding line pairs, each side a pencil.
/// Least-squares smallest-singular-vector solution of the stacked 2-rows-
/// per-pair system, solved in a conditioned frame. Throws DegenerateInput
/// when two lines on one side coincide, PencilViolation when the fitted map
/// does not carry the source pencil center to the target one.
ProjectiveMap line_homography_dlt(const std::array<LinePair, 3>& pairs,
                                  const DltOptions& opt = {});

/// Rank-2 fundamental matrix with cached epipoles: f * e1 = 0, f^T * e2 = 0.
/// Stored at unit Frobenius norm with the largest-magnitude entry positive.
class FundamentalMatrix {
 public:
  /// Normalizes and derives the epipoles from the null spaces. The input
  /// must already be (numerically) rank 2.
  static FundamentalMatrix from_matrix(const Eigen::Matrix3d& f);

  const Eigen::Matrix3d& matrix() const { return f_; }
  const HomPoint& epipole1() const { return e1_; }
  const HomPoint& epipole2() const { return e2_; }

  /// Epipolar line of an image-1 point in image 2: F * x1.
  HomLine line_in_2(const HomPoint& x1) const { return HomLine(f_ * x1.v); }
  /// Epipolar line of an image-2 point in image 1: F^T * x2.
  HomLine line_in_1(const HomPoint& x2) const {
    return HomLine(f_.transpose() * x2.v);
  }

  friend FundamentalMatrix fundamental_from_line_homography(
      const ProjectiveMap& H, const HomPoint& e1, const HomPoint& e2,
      double tol);

 private:
  FundamentalMatrix() = default;
  Eigen::Matrix3d f_ = Eigen::Matrix3d::Zero();
  HomPoint e1_;
  HomPoint e2_;
};

/// F = H * [e1]x for a line homography H mapping image-1 epipolar lines to
/// image-2 ones. Throws PencilViolation when the epipole null-space
/// residuals exceed tol after normalization.
FundamentalMatrix fundamental_from_line_homography(const ProjectiveMap& H,
                                                   const HomPoint& e1,
                                                   const HomPoint& e2,
                                                   double tol = 1e-6);

/// Mean over matches of the average perpendicular distance of each point to
/// the epipolar line transferred from its correspondence, in pixels.
double symmetric_epipolar_distance(
    const FundamentalMatrix& F,
    const std::vector<std::pair<HomPoint, HomPoint>>& matches);

/// Image area enclosed between two lines: the part of [0,w]x[0,h] lying
/// between them (sign-aligned normals). +infinity when either line misses
/// the rectangle. Symmetric in (l, lt); zero iff they coincide inside.
double area_between_lines(const HomLine& l, const HomLine& lt,
                          const ImageBounds& b);

}  // namespace epiline
