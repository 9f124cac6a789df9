#pragma once

#include <vector>

#include "epiline/geometry.hpp"

namespace epiline {

struct PointMatchSet {
  std::vector<std::pair<HomPoint, HomPoint>> matches;
};

/// 3x4 projective camera.
struct CameraMatrix {
  Eigen::Matrix<double, 3, 4> p = Eigen::Matrix<double, 3, 4>::Zero();

  /// Camera center as the homogeneous null vector of p.
  Eigen::Vector4d center() const;
  void check() const;  // throws DegenerateInput unless rank 3
};

/// Classical 7-point estimator: 2D null space of the stacked constraint
/// matrix, cubic det constraint, one fundamental matrix per real root
/// (1 to 3 of them). Input must be exactly 7 matches.
std::vector<FundamentalMatrix> seven_point(const PointMatchSet& m);

/// Normalized 8-point estimator (isotropic scaling to mean distance sqrt 2,
/// least-squares null vector, rank-2 projection in the normalized frame).
FundamentalMatrix eight_point(const PointMatchSet& m);

/// Ground-truth F from two camera matrices: F = [e2]x P2 P1^+ with
/// e2 = P2 C1. Throws DegenerateInput for coincident centers.
FundamentalMatrix truth_f_from_cameras(const CameraMatrix& c1,
                                       const CameraMatrix& c2);

}  // namespace epiline
