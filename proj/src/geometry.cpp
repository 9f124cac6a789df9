#include "epiline/geometry.hpp"

#include <cmath>
#include <limits>

namespace epiline {

namespace {

Eigen::Vector3d fix_sign(const Eigen::Vector3d& u) {
  int imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  return u[imax] < 0.0 ? Eigen::Vector3d(-u) : u;
}

Eigen::Matrix3d fix_sign(const Eigen::Matrix3d& m) {
  int r = 0, c = 0;
  m.cwiseAbs().maxCoeff(&r, &c);
  return m(r, c) < 0.0 ? Eigen::Matrix3d(-m) : m;
}

}  // namespace

Eigen::Vector2d HomPoint::dehom() const {
  if (is_ideal())
    throw DegenerateInput("cannot dehomogenize an ideal point");
  return v.head<2>() / v.z();
}

HomPoint HomPoint::normalized() const {
  double n = v.norm();
  if (n == 0.0) throw DegenerateInput("zero homogeneous point");
  return HomPoint(fix_sign(Eigen::Vector3d(v / n)));
}

HomLine HomLine::normal_form() const {
  double n = v.head<2>().norm();
  if (n == 0.0) throw DegenerateInput("line with zero normal");
  return HomLine(Eigen::Vector3d(v / n));
}

HomLine HomLine::normalized() const {
  double n = v.norm();
  if (n == 0.0) throw DegenerateInput("zero line");
  return HomLine(fix_sign(Eigen::Vector3d(v / n)));
}

Eigen::Vector2d HomLine::direction() const {
  Eigen::Vector2d d(v.y(), -v.x());
  double n = d.norm();
  if (n == 0.0) throw DegenerateInput("line with zero normal");
  return d / n;
}

double cross_gap(const Eigen::Vector3d& u, const Eigen::Vector3d& w) {
  double nu = u.norm(), nw = w.norm();
  if (nu == 0.0 || nw == 0.0)
    throw DegenerateInput("zero vector in cross_gap");
  return (u / nu).cross(w / nw).norm();
}

bool same_up_to_scale(const HomPoint& p, const HomPoint& q, double tol) {
  return cross_gap(p.v, q.v) <= tol;
}

bool same_up_to_scale(const HomLine& l, const HomLine& m, double tol) {
  return cross_gap(l.v, m.v) <= tol;
}

ImageBounds::ImageBounds(int w, int h) : width(w), height(h) {
  if (w < 2 || h < 2) throw DomainError("image bounds must be at least 2x2");
}

HomLine line_through(const HomPoint& p, const HomPoint& q) {
  if (same_up_to_scale(p, q, 1e-12))
    throw DegenerateInput("line_through: coincident points");
  return HomLine(p.v.cross(q.v));
}

HomPoint intersect(const HomLine& l1, const HomLine& l2) {
  if (same_up_to_scale(l1, l2, 1e-12))
    throw DegenerateInput("intersect: coincident lines");
  return HomPoint(l1.v.cross(l2.v));
}

ProjectiveMap skew(const HomPoint& e) {
  Eigen::Matrix3d m;
  m << 0.0, -e.v.z(), e.v.y(),
       e.v.z(), 0.0, -e.v.x(),
       -e.v.y(), e.v.x(), 0.0;
  return ProjectiveMap(m, MapRole::skew);
}

Eigen::Matrix3d enforce_rank2(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd.singularValues();
  s.z() = 0.0;
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

namespace {

// Least-squares common point of three lines, solved in the given frame.
Eigen::Vector3d pencil_center(const std::array<Eigen::Vector3d, 3>& lines) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i) a.row(i) = lines[i].normalized();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().col(2);
}

}  // namespace

ProjectiveMap line_homography_dlt(const std::array<LinePair, 3>& pairs,
                                  const DltOptions& opt) {
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      if (same_up_to_scale(pairs[i].l1, pairs[j].l1, 1e-12))
        throw DegenerateInput("dlt: coincident source lines");
      if (same_up_to_scale(pairs[i].l2, pairs[j].l2, 1e-12))
        throw DegenerateInput("dlt: coincident target lines");
    }

  // Condition each side with the point map diag(1/s, 1/s, 1); lines pick up
  // diag(s, s, 1), which balances the normal against the offset coefficient.
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    s1 += std::abs(pairs[i].l1.normal_form().c());
    s2 += std::abs(pairs[i].l2.normal_form().c());
  }
  s1 = std::max(1.0, s1 / 3.0);
  s2 = std::max(1.0, s2 / 3.0);
  const Eigen::Vector3d scale1(s1, s1, 1.0), scale2(s2, s2, 1.0);

  std::array<Eigen::Vector3d, 3> src, dst;
  for (int i = 0; i < 3; ++i) {
    src[i] = pairs[i].l1.v.cwiseProduct(scale1).normalized();
    dst[i] = pairs[i].l2.v.cwiseProduct(scale2).normalized();
  }

  // Two independent rows of dst x (H~ src) = 0 per pair; the weakest of the
  // three cross-product rows is dropped.
  Eigen::Matrix<double, 6, 9> a = Eigen::Matrix<double, 6, 9>::Zero();
  int row = 0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d& l = src[i];
    const Eigen::Vector3d& lp = dst[i];
    Eigen::Matrix<double, 3, 9> rows = Eigen::Matrix<double, 3, 9>::Zero();
    rows.block<1, 3>(0, 3) = -lp.z() * l.transpose();
    rows.block<1, 3>(0, 6) = lp.y() * l.transpose();
    rows.block<1, 3>(1, 0) = lp.z() * l.transpose();
    rows.block<1, 3>(1, 6) = -lp.x() * l.transpose();
    rows.block<1, 3>(2, 0) = -lp.y() * l.transpose();
    rows.block<1, 3>(2, 3) = lp.x() * l.transpose();
    Eigen::Vector3d weight(std::hypot(lp.y(), lp.z()),
                           std::hypot(lp.x(), lp.z()),
                           std::hypot(lp.x(), lp.y()));
    int drop = 0;
    weight.minCoeff(&drop);
    for (int k = 0; k < 3; ++k)
      if (k != drop) a.row(row++) = rows.row(k);
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, 6, 9>> svd(a, Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hm;
  hm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  // Undo conditioning: H = S2^-1 * H~ * S1.
  Eigen::Matrix3d hfull =
      scale2.cwiseInverse().asDiagonal() * hm * scale1.asDiagonal();
  hfull /= hfull.norm();
  hfull = fix_sign(hfull);
  ProjectiveMap H(hfull, MapRole::line_homography);

  for (int i = 0; i < 3; ++i) {
    HomLine mapped = H.map_line(pairs[i].l1);
    if (!mapped.valid())
      throw PencilViolation("dlt: mapped line degenerate");
    Eigen::Vector3d r =
        pairs[i].l2.normal_form().v.cross(mapped.normal_form().v);
    if (r.norm() > opt.residual_tol)
      throw PencilViolation("dlt: residual above tolerance");
  }

  const Eigen::Vector3d e1 = pencil_center(src);
  const Eigen::Vector3d e2 = pencil_center(dst);
  // Map pencil centers back out of the conditioned frame (points scale by s).
  Eigen::Vector3d e1w(e1.x() * s1, e1.y() * s1, e1.z());
  Eigen::Vector3d e2w(e2.x() * s2, e2.y() * s2, e2.z());
  if (cross_gap(hfull.transpose() * e2w, e1w) > opt.pencil_tol)
    throw PencilViolation("dlt: pencil-to-pencil check failed");

  return H;
}

FundamentalMatrix FundamentalMatrix::from_matrix(const Eigen::Matrix3d& f) {
  double n = f.norm();
  if (n == 0.0) throw DegenerateInput("zero fundamental matrix");
  Eigen::Matrix3d fn = fix_sign(Eigen::Matrix3d(f / n));
  if (std::abs(fn.determinant()) > 1e-9)
    throw DegenerateInput("fundamental matrix is not rank 2");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 1e-12 * svd.singularValues()(0))
    throw DegenerateInput("fundamental matrix has rank below 2");

  FundamentalMatrix out;
  out.f_ = fn;
  out.e1_ = HomPoint(svd.matrixV().col(2)).normalized();
  out.e2_ = HomPoint(svd.matrixU().col(2)).normalized();
  return out;
}

FundamentalMatrix fundamental_from_line_homography(const ProjectiveMap& H,
                                                   const HomPoint& e1,
                                                   const HomPoint& e2,
                                                   double tol) {
  HomPoint e1n = e1.normalized();
  HomPoint e2n = e2.normalized();
  Eigen::Matrix3d f = H.m * skew(e1n).m;
  double n = f.norm();
  if (n == 0.0) throw DegenerateInput("assembled fundamental matrix is zero");
  Eigen::Matrix3d fn = fix_sign(Eigen::Matrix3d(f / n));

  if ((fn * e1n.v).norm() > tol || (fn.transpose() * e2n.v).norm() > tol)
    throw PencilViolation("epipole null-space residual above tolerance");

  FundamentalMatrix out;
  out.f_ = fn;
  out.e1_ = e1n;
  out.e2_ = e2n;
  return out;
}

double symmetric_epipolar_distance(
    const FundamentalMatrix& F,
    const std::vector<std::pair<HomPoint, HomPoint>>& matches) {
  if (matches.empty())
    throw DomainError("symmetric_epipolar_distance: no matches");
  double acc = 0.0;
  for (const auto& [x1, x2] : matches) {
    HomLine l2 = F.line_in_2(x1);
    HomLine l1 = F.line_in_1(x2);
    double n2 = l2.v.head<2>().norm();
    double n1 = l1.v.head<2>().norm();
    if (n1 == 0.0 || n2 == 0.0)
      throw DegenerateInput("transferred epipolar line has zero normal");
    Eigen::Vector2d p1 = x1.dehom(), p2 = x2.dehom();
    double d2 = std::abs(l2.a() * p2.x() + l2.b() * p2.y() + l2.c()) / n2;
    double d1 = std::abs(l1.a() * p1.x() + l1.b() * p1.y() + l1.c()) / n1;
    acc += 0.5 * (d1 + d2);
  }
  return acc / static_cast<double>(matches.size());
}

namespace {

using Poly = std::vector<Eigen::Vector2d>;

// Keep the part of poly with side * (a x + b y + c) >= 0.
Poly clip_halfplane(const Poly& poly, const Eigen::Vector3d& l, double side) {
  Poly out;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& nxt = poly[(i + 1) % n];
    double fc = side * (l.x() * cur.x() + l.y() * cur.y() + l.z());
    double fn = side * (l.x() * nxt.x() + l.y() * nxt.y() + l.z());
    if (fc >= 0.0) out.push_back(cur);
    if ((fc > 0.0 && fn < 0.0) || (fc < 0.0 && fn > 0.0)) {
      double t = fc / (fc - fn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

double poly_area(const Poly& p) {
  if (p.size() < 3) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Eigen::Vector2d& a = p[i];
    const Eigen::Vector2d& b = p[(i + 1) % p.size()];
    acc += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(acc);
}

bool line_hits_rect(const HomLine& l, const ImageBounds& b) {
  const double w = b.width, h = b.height;
  const Eigen::Vector3d& v = l.v;
  double f00 = v.z();
  double f10 = v.x() * w + v.z();
  double f11 = v.x() * w + v.y() * h + v.z();
  double f01 = v.y() * h + v.z();
  double lo = std::min(std::min(f00, f10), std::min(f11, f01));
  double hi = std::max(std::max(f00, f10), std::max(f11, f01));
  return lo <= 0.0 && hi >= 0.0;
}

}  // namespace

double area_between_lines(const HomLine& l, const HomLine& lt,
                          const ImageBounds& b) {
  if (!l.valid() || !lt.valid())
    throw DegenerateInput("area_between_lines: invalid line");
  if (!line_hits_rect(l, b) || !line_hits_rect(lt, b))
    return std::numeric_limits<double>::infinity();

  HomLine ln = l.normal_form();
  HomLine ltn = lt.normal_form();
  if (ln.a() * ltn.a() + ln.b() * ltn.b() < 0.0) ltn.v = -ltn.v;

  const Poly rect = {{0.0, 0.0},
                     {double(b.width), 0.0},
                     {double(b.width), double(b.height)},
                     {0.0, double(b.height)}};
  double a1 = poly_area(
      clip_halfplane(clip_halfplane(rect, ln.v, +1.0), ltn.v, -1.0));
  double a2 = poly_area(
      clip_halfplane(clip_halfplane(rect, ln.v, -1.0), ltn.v, +1.0));
  return a1 + a2;
}

}  // namespace epiline
