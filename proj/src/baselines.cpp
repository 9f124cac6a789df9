#include "epiline/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace epiline {

Eigen::Vector4d CameraMatrix::center() const {
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(p, Eigen::ComputeFullV);
  return svd.matrixV().col(3);
}

void CameraMatrix::check() const {
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(p);
  const auto& s = svd.singularValues();
  if (s(2) < 1e-10 * s(0))
    throw DegenerateInput("camera matrix is rank deficient");
}

namespace {

struct Normalization {
  std::vector<Eigen::Vector3d> pts;
  Eigen::Matrix3d t;
};

// Centroid to the origin, mean distance sqrt(2).
Normalization normalize_points(const std::vector<Eigen::Vector2d>& in) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : in) centroid += p;
  centroid /= double(in.size());
  double mean_dist = 0.0;
  for (const auto& p : in) mean_dist += (p - centroid).norm();
  mean_dist /= double(in.size());
  if (mean_dist < 1e-12)
    throw DegenerateConfiguration("all points coincide");
  double s = std::sqrt(2.0) / mean_dist;

  Normalization out;
  out.t << s, 0.0, -s * centroid.x(), 0.0, s, -s * centroid.y(), 0.0, 0.0,
      1.0;
  out.pts.reserve(in.size());
  for (const auto& p : in)
    out.pts.emplace_back(s * (p.x() - centroid.x()),
                         s * (p.y() - centroid.y()), 1.0);
  return out;
}

// Row of the epipolar constraint x2^T F x1 = 0 with F flattened row-major.
Eigen::Matrix<double, 1, 9> constraint_row(const Eigen::Vector3d& x1,
                                           const Eigen::Vector3d& x2) {
  Eigen::Matrix<double, 1, 9> row;
  row << x2.x() * x1.x(), x2.x() * x1.y(), x2.x() * x1.z(),
      x2.y() * x1.x(), x2.y() * x1.y(), x2.y() * x1.z(),
      x2.z() * x1.x(), x2.z() * x1.y(), x2.z() * x1.z();
  return row;
}

Eigen::Matrix3d unflatten(const Eigen::Matrix<double, 9, 1>& v) {
  Eigen::Matrix3d m;
  m << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  return m;
}

struct Dehom {
  std::vector<Eigen::Vector2d> p1, p2;
};

Dehom dehomogenize(const PointMatchSet& m) {
  Dehom d;
  d.p1.reserve(m.matches.size());
  d.p2.reserve(m.matches.size());
  for (const auto& [a, b] : m.matches) {
    d.p1.push_back(a.dehom());
    d.p2.push_back(b.dehom());
  }
  return d;
}

// Real roots of c3 a^3 + c2 a^2 + c1 a + c0 = 0, degree-degraded as needed.
std::vector<double> real_roots(double c3, double c2, double c1, double c0) {
  double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1),
                           std::abs(c0), 1e-300});
  c3 /= scale;
  c2 /= scale;
  c1 /= scale;
  c0 /= scale;
  std::vector<double> roots;
  auto keep_real = [&](std::complex<double> r) {
    if (std::abs(r.imag()) <= 1e-8 * std::max(1.0, std::abs(r.real())))
      roots.push_back(r.real());
  };
  if (std::abs(c3) > 1e-12) {
    Eigen::Matrix3d companion;
    companion << 0.0, 0.0, -c0 / c3, 1.0, 0.0, -c1 / c3, 0.0, 1.0, -c2 / c3;
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
    for (int i = 0; i < 3; ++i) keep_real(es.eigenvalues()(i));
  } else if (std::abs(c2) > 1e-12) {
    std::complex<double> disc = std::sqrt(std::complex<double>(
        c1 * c1 - 4.0 * c2 * c0));
    keep_real((-c1 + disc) / (2.0 * c2));
    keep_real((-c1 - disc) / (2.0 * c2));
  } else if (std::abs(c1) > 1e-12) {
    roots.push_back(-c0 / c1);
  }
  // collapse near-identical roots
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || std::abs(r - out.back()) > 1e-8 * (1.0 + std::abs(r)))
      out.push_back(r);
  return out;
}

}  // namespace

std::vector<FundamentalMatrix> seven_point(const PointMatchSet& m) {
  if (m.matches.size() != 7)
    throw InsufficientPoints("seven_point: need exactly 7 matches");
  Dehom d = dehomogenize(m);
  Normalization n1 = normalize_points(d.p1);
  Normalization n2 = normalize_points(d.p2);

  Eigen::Matrix<double, 7, 9> a;
  for (int i = 0; i < 7; ++i) a.row(i) = constraint_row(n1.pts[i], n2.pts[i]);

  Eigen::JacobiSVD<Eigen::Matrix<double, 7, 9>> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s(6) < 1e-9 * s(0))
    throw DegenerateConfiguration(
        "seven_point: constraint null space exceeds dimension 2");
  Eigen::Matrix3d f1 = unflatten(svd.matrixV().col(7));
  Eigen::Matrix3d f2 = unflatten(svd.matrixV().col(8));

  // det(a f1 + (1 - a) f2) is cubic in a; fit its coefficients from four
  // evaluations (exact for a cubic) and take the real roots.
  Eigen::Matrix3d diff = f1 - f2;
  auto g = [&](double alpha) {
    return Eigen::Matrix3d(f2 + alpha * diff).determinant();
  };
  double c0 = g(0.0);
  Eigen::Matrix3d vand;
  vand << 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 2.0, 4.0, 8.0;
  Eigen::Vector3d rhs(g(1.0) - c0, g(-1.0) - c0, g(2.0) - c0);
  Eigen::Vector3d c123 = vand.fullPivLu().solve(rhs);

  std::vector<FundamentalMatrix> out;
  for (double alpha : real_roots(c123(2), c123(1), c123(0), c0)) {
    Eigen::Matrix3d fn = alpha * f1 + (1.0 - alpha) * f2;
    Eigen::Matrix3d f = n2.t.transpose() * fn * n1.t;
    try {
      out.push_back(FundamentalMatrix::from_matrix(enforce_rank2(f)));
    } catch (const DegenerateInput&) {
      // a root collapsing to rank < 2 carries no usable geometry
    }
  }
  if (out.empty())
    throw DegenerateConfiguration("seven_point: no usable real root");
  return out;
}

FundamentalMatrix eight_point(const PointMatchSet& m) {
  if (m.matches.size() < 8)
    throw InsufficientPoints("eight_point: need at least 8 matches");
  Dehom d = dehomogenize(m);
  Normalization n1 = normalize_points(d.p1);
  Normalization n2 = normalize_points(d.p2);

  const int n = int(m.matches.size());
  Eigen::MatrixXd a(n, 9);
  for (int i = 0; i < n; ++i) a.row(i) = constraint_row(n1.pts[i], n2.pts[i]);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s(7) < 1e-9 * s(0))
    throw DegenerateConfiguration(
        "eight_point: degenerate configuration (rank below 8)");

  Eigen::Matrix3d fn = unflatten(svd.matrixV().col(8));
  fn = enforce_rank2(fn);  // rank-2 projection in the normalized frame
  Eigen::Matrix3d f = n2.t.transpose() * fn * n1.t;
  return FundamentalMatrix::from_matrix(f);
}

FundamentalMatrix truth_f_from_cameras(const CameraMatrix& c1,
                                       const CameraMatrix& c2) {
  c1.check();
  c2.check();
  Eigen::Vector4d z1 = c1.center().normalized();
  Eigen::Vector4d z2 = c2.center().normalized();
  if (std::min((z1 - z2).norm(), (z1 + z2).norm()) < 1e-9)
    throw DegenerateInput("truth_f_from_cameras: coincident camera centers");

  Eigen::Vector3d e2 = c2.p * c1.center();
  Eigen::Matrix3d e2x;
  e2x << 0.0, -e2.z(), e2.y(), e2.z(), 0.0, -e2.x(), -e2.y(), e2.x(), 0.0;
  Eigen::Matrix<double, 4, 3> pinv =
      c1.p.completeOrthogonalDecomposition().pseudoInverse();
  Eigen::Matrix3d f = e2x * (c2.p * pinv);
  return FundamentalMatrix::from_matrix(enforce_rank2(f));
}

}  // namespace epiline
