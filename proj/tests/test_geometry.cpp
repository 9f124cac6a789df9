#include "epiline/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace epiline;

namespace {

// Random invertible 3x3; resamples until comfortably conditioned.
Eigen::Matrix3d random_invertible(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = u(rng);
    if (std::abs(m.determinant()) > 0.05) return m;
  }
}

HomLine random_line_through(std::mt19937_64& rng, const HomPoint& p) {
  std::uniform_real_distribution<double> ang(0.0, M_PI);
  double t = ang(rng);
  // Direction (cos t, sin t) through p: normal is (sin t, -cos t).
  double a = std::sin(t), b = -std::cos(t);
  double c = -(a * p.x() + b * p.y()) / p.w();
  return HomLine(a, b, c);
}

Eigen::Matrix3d camera_k(double f, double cx, double cy) {
  Eigen::Matrix3d k;
  k << f, 0.0, cx, 0.0, f, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d small_rotation(double rx, double ry, double rz) {
  Eigen::AngleAxisd ax(rx, Eigen::Vector3d::UnitX());
  Eigen::AngleAxisd ay(ry, Eigen::Vector3d::UnitY());
  Eigen::AngleAxisd az(rz, Eigen::Vector3d::UnitZ());
  return (az * ay * ax).toRotationMatrix();
}

// F for cameras P1 = K1 [I | 0], P2 = K2 [R | t].
Eigen::Matrix3d truth_fundamental(const Eigen::Matrix3d& k1,
                                  const Eigen::Matrix3d& k2,
                                  const Eigen::Matrix3d& r,
                                  const Eigen::Vector3d& t) {
  Eigen::Matrix3d tx;
  tx << 0.0, -t.z(), t.y(), t.z(), 0.0, -t.x(), -t.y(), t.x(), 0.0;
  return k2.inverse().transpose() * tx * r * k1.inverse();
}

}  // namespace

TEST_CASE("homogeneous point basics") {
  HomPoint p(4.0, 6.0, 2.0);
  Eigen::Vector2d d = p.dehom();
  CHECK(d.x() == doctest::Approx(2.0));
  CHECK(d.y() == doctest::Approx(3.0));

  HomPoint ideal(1.0, 2.0, 0.0);
  CHECK(ideal.is_ideal());
  CHECK_THROWS_AS(ideal.dehom(), DegenerateInput);

  HomPoint n = HomPoint(-2.0, 0.0, 0.0).normalized();
  CHECK(n.v.x() == doctest::Approx(1.0));  // sign fixed on the largest entry
  CHECK(n.v.norm() == doctest::Approx(1.0));
}

TEST_CASE("line normal form gives signed pixel distances") {
  HomLine l(0.0, 2.0, -20.0);  // y = 10, doubled scale
  HomLine nf = l.normal_form();
  CHECK(nf.eval(HomPoint(5.0, 13.0)) == doctest::Approx(3.0));
  CHECK(nf.eval(HomPoint(5.0, 7.0)) == doctest::Approx(-3.0));
  Eigen::Vector2d dir = l.direction();
  CHECK(std::abs(dir.x()) == doctest::Approx(1.0));
  CHECK(dir.y() == doctest::Approx(0.0));
  CHECK_THROWS_AS(HomLine(0.0, 0.0, 5.0).normal_form(), DegenerateInput);
}

TEST_CASE("join and meet") {
  HomPoint p(0.0, 0.0), q(2.0, 2.0);
  HomLine l = line_through(p, q);
  CHECK(l.eval(p) == 0.0);
  CHECK(l.eval(q) == 0.0);
  CHECK(l.eval(HomPoint(5.0, 5.0)) == doctest::Approx(0.0));

  HomPoint m = intersect(HomLine(1.0, 0.0, -1.0), HomLine(0.0, 1.0, -2.0));
  Eigen::Vector2d d = m.dehom();
  CHECK(d.x() == doctest::Approx(1.0));
  CHECK(d.y() == doctest::Approx(2.0));

  // Parallel lines meet at an ideal point along their direction.
  HomPoint at_inf = intersect(HomLine(0.0, 1.0, -1.0), HomLine(0.0, 1.0, -5.0));
  CHECK(at_inf.is_ideal());

  CHECK_THROWS_AS(line_through(p, HomPoint(0.0, 0.0, 2.0)), DegenerateInput);
  CHECK_THROWS_AS(intersect(HomLine(1.0, 1.0, 1.0), HomLine(2.0, 2.0, 2.0)),
                  DegenerateInput);
}

TEST_CASE("cross gap measures angular separation") {
  Eigen::Vector3d u(1.0, 0.0, 0.0);
  CHECK(cross_gap(u, Eigen::Vector3d(-3.0, 0.0, 0.0)) == doctest::Approx(0.0));
  CHECK(cross_gap(u, Eigen::Vector3d(0.0, 2.0, 0.0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cross_gap(u, Eigen::Vector3d::Zero()), DegenerateInput);
}

TEST_CASE("skew matrix implements the cross product") {
  HomPoint e(3.0, -1.0, 2.0);
  ProjectiveMap s = skew(e);
  CHECK(s.role == MapRole::skew);
  Eigen::Vector3d v(0.5, 4.0, -2.5);
  CHECK((s.m * v - e.v.cross(v)).norm() == doctest::Approx(0.0));
  CHECK((s.m + s.m.transpose()).norm() == doctest::Approx(0.0));
  CHECK((s.m * e.v).norm() == doctest::Approx(0.0));
}

TEST_CASE("rank-2 projection keeps the leading singular values") {
  std::mt19937_64 rng(11);
  Eigen::Matrix3d m = random_invertible(rng);
  Eigen::Matrix3d r2 = enforce_rank2(m);
  CHECK(std::abs(r2.determinant()) < 1e-12);
  Eigen::JacobiSVD<Eigen::Matrix3d> before(m);
  Eigen::JacobiSVD<Eigen::Matrix3d> after(r2);
  CHECK(after.singularValues()(0) ==
        doctest::Approx(before.singularValues()(0)));
  CHECK(after.singularValues()(1) ==
        doctest::Approx(before.singularValues()(1)));
  CHECK(after.singularValues()(2) == doctest::Approx(0.0));
}

TEST_CASE("image bounds validate") {
  CHECK_THROWS_AS(ImageBounds(1, 100), DomainError);
  CHECK_THROWS_AS(ImageBounds(100, 0), DomainError);
  ImageBounds b(768, 576);
  CHECK(b.width == 768);
}

TEST_CASE("line homography recovery generalizes to held-out lines") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> px(50.0, 700.0);
  std::uniform_real_distribution<double> py(50.0, 520.0);
  std::uniform_real_distribution<double> sc(0.2, 5.0);
  int accepted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Matrix3d h_true = random_invertible(rng);
    HomPoint e1(px(rng), py(rng));

    std::array<LinePair, 3> pairs;
    bool distinct = true;
    std::array<HomLine, 3> srcs;
    for (int i = 0; i < 3; ++i) {
      srcs[i] = random_line_through(rng, e1);
      Eigen::Vector2d di = srcs[i].direction();
      for (int j = 0; j < i; ++j) {
        Eigen::Vector2d dj = srcs[j].direction();
        if (std::abs(di.x() * dj.y() - di.y() * dj.x()) < 1e-3)
          distinct = false;
      }
    }
    if (!distinct) continue;
    for (int i = 0; i < 3; ++i) {
      double s = sc(rng) * (rng() % 2 ? 1.0 : -1.0);
      pairs[i] = LinePair{srcs[i], HomLine(Eigen::Vector3d(
                                       s * (h_true * srcs[i].v)))};
    }

    ProjectiveMap h = line_homography_dlt(pairs);
    ++accepted;

    HomLine held_out = random_line_through(rng, e1);
    HomLine expect(Eigen::Vector3d(h_true * held_out.v));
    HomLine got = h.map_line(held_out);
    CAPTURE(trial);
    CHECK(cross_gap(expect.v, got.v) < 1e-7);
  }
  CHECK(accepted > 150);
}

TEST_CASE("line homography rejects degenerate and non-pencil input") {
  HomPoint e1(100.0, 100.0);
  HomLine a(1.0, 0.0, -100.0), b(0.0, 1.0, -100.0), c(1.0, 1.0, -200.0);

  std::array<LinePair, 3> dup = {LinePair{a, a}, LinePair{a, b},
                                 LinePair{b, c}};
  CHECK_THROWS_AS(line_homography_dlt(dup), DegenerateInput);

  // Sources share the pencil through (100, 100) but the targets are not
  // concurrent, so no line homography can carry pencil to pencil.
  std::array<LinePair, 3> skewed = {
      LinePair{a, HomLine(1.0, 0.0, -10.0)},
      LinePair{b, HomLine(0.0, 1.0, -200.0)},
      LinePair{c, HomLine(1.0, 2.0, -55.0)}};
  CHECK_THROWS_AS(line_homography_dlt(skewed), PencilViolation);
}

TEST_CASE("fundamental matrix from synthetic cameras") {
  Eigen::Matrix3d k1 = camera_k(800.0, 384.0, 288.0);
  Eigen::Matrix3d k2 = camera_k(820.0, 384.0, 288.0);
  Eigen::Matrix3d r = small_rotation(0.02, -0.25, 0.01);
  Eigen::Vector3d t(0.6, 0.05, 0.1);
  Eigen::Matrix3d f = truth_fundamental(k1, k2, r, t);

  FundamentalMatrix F = FundamentalMatrix::from_matrix(f);
  CHECK(F.matrix().norm() == doctest::Approx(1.0));
  CHECK(std::abs(F.matrix().determinant()) < 1e-12);
  CHECK((F.matrix() * F.epipole1().v).norm() < 1e-9);
  CHECK((F.matrix().transpose() * F.epipole2().v).norm() < 1e-9);

  // Epipoles are the projected camera centers.
  Eigen::Vector3d c2 = -r.transpose() * t;  // center of camera 2 in world
  HomPoint e1_expected(Eigen::Vector3d(k1 * c2));
  HomPoint e2_expected(Eigen::Vector3d(k2 * t));  // image of origin
  CHECK(same_up_to_scale(F.epipole1(), e1_expected, 1e-9));
  CHECK(same_up_to_scale(F.epipole2(), e2_expected, 1e-9));

  // Projected world points satisfy the epipolar constraint.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector3d x(u(rng) * 2.0, u(rng) * 1.5, 4.0 + u(rng));
    Eigen::Vector3d x1 = k1 * x;
    Eigen::Vector3d x2 = k2 * (r * x + t);
    double resid = std::abs(x2.dot(F.matrix() * x1)) / (x1.norm() * x2.norm());
    CHECK(resid < 1e-12);
    HomLine l2 = F.line_in_2(HomPoint(x1));
    CHECK(std::abs(l2.normal_form().eval(HomPoint(x2).normalized()) /
                   HomPoint(x2).normalized().w()) < 1e-6);
  }
}

TEST_CASE("from_matrix rejects full-rank and rank-1 input") {
  CHECK_THROWS_AS(FundamentalMatrix::from_matrix(Eigen::Matrix3d::Identity()),
                  DegenerateInput);
  Eigen::Vector3d a(1.0, 2.0, 3.0), b(4.0, 5.0, 6.0);
  Eigen::Matrix3d rank1 = a * b.transpose();
  CHECK_THROWS_AS(FundamentalMatrix::from_matrix(rank1), DegenerateInput);
  CHECK_THROWS_AS(FundamentalMatrix::from_matrix(Eigen::Matrix3d::Zero()),
                  DegenerateInput);
}

TEST_CASE("line homography assembles back into the fundamental matrix") {
  Eigen::Matrix3d k1 = camera_k(780.0, 384.0, 288.0);
  Eigen::Matrix3d k2 = camera_k(800.0, 380.0, 290.0);
  Eigen::Matrix3d r = small_rotation(-0.03, 0.2, 0.05);
  Eigen::Vector3d t(0.5, -0.1, 0.15);
  FundamentalMatrix F =
      FundamentalMatrix::from_matrix(truth_fundamental(k1, k2, r, t));

  // Three epipolar line pairs generated from image-1 points.
  std::array<HomPoint, 3> xs = {HomPoint(100.0, 80.0), HomPoint(650.0, 300.0),
                                HomPoint(300.0, 500.0)};
  std::array<LinePair, 3> pairs;
  for (int i = 0; i < 3; ++i)
    pairs[i] = LinePair{line_through(F.epipole1(), xs[i]),
                        F.line_in_2(xs[i])};

  ProjectiveMap h = line_homography_dlt(pairs);
  FundamentalMatrix rebuilt =
      fundamental_from_line_homography(h, F.epipole1(), F.epipole2());
  CHECK((rebuilt.matrix() - F.matrix()).norm() < 1e-6);
  CHECK(same_up_to_scale(rebuilt.epipole1(), F.epipole1(), 1e-9));
  CHECK(same_up_to_scale(rebuilt.epipole2(), F.epipole2(), 1e-9));
}

TEST_CASE("mismatched epipole makes the assembly throw") {
  Eigen::Matrix3d k = camera_k(800.0, 384.0, 288.0);
  Eigen::Matrix3d r = small_rotation(0.0, 0.3, 0.0);
  Eigen::Vector3d t(0.7, 0.0, 0.1);
  FundamentalMatrix F =
      FundamentalMatrix::from_matrix(truth_fundamental(k, k, r, t));
  std::array<HomPoint, 3> xs = {HomPoint(100.0, 80.0), HomPoint(650.0, 300.0),
                                HomPoint(300.0, 500.0)};
  std::array<LinePair, 3> pairs;
  for (int i = 0; i < 3; ++i)
    pairs[i] = LinePair{line_through(F.epipole1(), xs[i]), F.line_in_2(xs[i])};
  ProjectiveMap h = line_homography_dlt(pairs);
  HomPoint wrong(50.0, 50.0);
  CHECK_THROWS_AS(fundamental_from_line_homography(h, wrong, F.epipole2()),
                  PencilViolation);
}

TEST_CASE("symmetric epipolar distance on a rectified pair") {
  Eigen::Matrix3d f;
  f << 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0;
  FundamentalMatrix F = FundamentalMatrix::from_matrix(f);
  CHECK(F.epipole1().is_ideal());

  std::vector<std::pair<HomPoint, HomPoint>> exact = {
      {HomPoint(10.0, 20.0), HomPoint(200.0, 20.0)},
      {HomPoint(45.0, 100.0), HomPoint(90.0, 100.0)}};
  CHECK(symmetric_epipolar_distance(F, exact) == doctest::Approx(0.0));

  std::vector<std::pair<HomPoint, HomPoint>> off = {
      {HomPoint(10.0, 20.0), HomPoint(200.0, 24.0)}};  // 4 px vertical error
  CHECK(symmetric_epipolar_distance(F, off) == doctest::Approx(4.0));

  std::vector<std::pair<HomPoint, HomPoint>> both = {
      {HomPoint(10.0, 20.0), HomPoint(200.0, 24.0)},
      {HomPoint(45.0, 100.0), HomPoint(90.0, 100.0)}};
  CHECK(symmetric_epipolar_distance(F, both) == doctest::Approx(2.0));

  CHECK_THROWS_AS(symmetric_epipolar_distance(F, {}), DomainError);
}

TEST_CASE("area between known line pairs") {
  ImageBounds b(768, 576);
  // Horizontal pair three pixels apart spanning the full width.
  double band = area_between_lines(HomLine(0.0, 1.0, -10.0),
                                   HomLine(0.0, 1.0, -13.0), b);
  CHECK(band == doctest::Approx(3.0 * 768.0));

  // Perpendicular pair through (100, 100) in a 200x200 box: the region with
  // opposite signs is two 100x100 squares.
  ImageBounds sq(200, 200);
  double quads = area_between_lines(HomLine(0.0, 1.0, -100.0),
                                    HomLine(1.0, 0.0, -100.0), sq);
  CHECK(quads == doctest::Approx(20000.0));

  // Coincident lines enclose nothing.
  CHECK(area_between_lines(HomLine(1.0, 2.0, -300.0),
                           HomLine(2.0, 4.0, -600.0),
                           b) == doctest::Approx(0.0));

  // A line outside the rectangle yields an infinite sentinel.
  CHECK(std::isinf(area_between_lines(HomLine(0.0, 1.0, 10.0),
                                      HomLine(0.0, 1.0, -13.0), b)));
  CHECK(std::isinf(area_between_lines(HomLine(0.0, 1.0, -13.0),
                                      HomLine(0.0, 1.0, 10.0), b)));

  // Opposite-sign scaling of one line does not change the area.
  double flipped = area_between_lines(HomLine(0.0, -2.0, 20.0),
                                      HomLine(0.0, 1.0, -13.0), b);
  CHECK(flipped == doctest::Approx(3.0 * 768.0));

  CHECK_THROWS_AS(
      area_between_lines(HomLine(0.0, 0.0, 1.0), HomLine(0.0, 1.0, -13.0), b),
      DegenerateInput);
}

TEST_CASE("area between lines agrees with Monte Carlo") {
  std::mt19937_64 rng(777);
  ImageBounds b(320, 240);
  std::uniform_real_distribution<double> ux(-60.0, 380.0);
  std::uniform_real_distribution<double> uy(-60.0, 300.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int samples = 200000;
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 12; ++trial) {
    HomPoint p1(ux(rng), uy(rng)), p2(ux(rng), uy(rng));
    HomPoint p3(ux(rng), uy(rng)), p4(ux(rng), uy(rng));
    if (same_up_to_scale(p1, p2, 1e-6) || same_up_to_scale(p3, p4, 1e-6))
      continue;
    HomLine l = line_through(p1, p2);
    HomLine lt = line_through(p3, p4);
    double area = area_between_lines(l, lt, b);
    if (std::isinf(area)) continue;
    ++tested;

    // Monte Carlo of the sign-opposite region, normals aligned first.
    HomLine ln = l.normal_form(), ltn = lt.normal_form();
    if (ln.a() * ltn.a() + ln.b() * ltn.b() < 0.0) ltn.v = -ltn.v;
    int inside = 0;
    for (int s = 0; s < samples; ++s) {
      double x = unit(rng) * b.width, y = unit(rng) * b.height;
      double fa = ln.a() * x + ln.b() * y + ln.c();
      double fb = ltn.a() * x + ltn.b() * y + ltn.c();
      if (fa * fb <= 0.0) ++inside;
    }
    double total = double(b.width) * double(b.height);
    double frac = double(inside) / samples;
    double est = frac * total;
    double sigma = total * std::sqrt(frac * (1.0 - frac) / samples) + 1.0;
    CAPTURE(trial);
    CHECK(std::abs(est - area) < 5.0 * sigma);
  }
  CHECK(tested >= 8);
}
