#include "epiline/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace epiline {

GrayImage::GrayImage(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw DomainError("empty image");
  data_.assign(size_t(width) * height, fill);
}

std::optional<LineSegment> clip_line(const HomLine& l, const ImageBounds& b) {
  if (!l.valid()) return std::nullopt;
  const double xmax = b.width - 1.0;
  const double ymax = b.height - 1.0;

  HomLine ln = l.normal_form();
  Eigen::Vector2d dir = ln.direction();
  // Anchor: foot of the perpendicular from the rectangle center.
  Eigen::Vector2d center(0.5 * xmax, 0.5 * ymax);
  double off = ln.a() * center.x() + ln.b() * center.y() + ln.c();
  Eigen::Vector2d p0 = center - off * Eigen::Vector2d(ln.a(), ln.b());

  // Liang-Barsky on p(t) = p0 + t * dir.
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  auto clip_axis = [&](double p, double q0, double lo, double hi) {
    if (std::abs(p) < 1e-15) return q0 >= lo - 1e-12 && q0 <= hi + 1e-12;
    double ta = (lo - q0) / p;
    double tb = (hi - q0) / p;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return true;
  };
  if (!clip_axis(dir.x(), p0.x(), 0.0, xmax)) return std::nullopt;
  if (!clip_axis(dir.y(), p0.y(), 0.0, ymax)) return std::nullopt;
  if (t0 >= t1) return std::nullopt;
  if (t1 - t0 < 2.0) return std::nullopt;

  auto snap = [&](Eigen::Vector2d p) {
    p.x() = std::clamp(p.x(), 0.0, xmax);
    p.y() = std::clamp(p.y(), 0.0, ymax);
    return p;
  };
  Eigen::Vector2d a = snap(p0 + t0 * dir);
  Eigen::Vector2d bb = snap(p0 + t1 * dir);
  if (a.x() > bb.x() || (a.x() == bb.x() && a.y() > bb.y())) std::swap(a, bb);
  return LineSegment{a, bb, l};
}

double bilinear(const GrayImage& img, const Eigen::Vector2d& p) {
  const double xmax = img.width() - 1.0;
  const double ymax = img.height() - 1.0;
  if (p.x() < 0.0 || p.y() < 0.0 || p.x() > xmax || p.y() > ymax)
    throw OutOfBounds("bilinear: sample outside image");
  int x0 = std::min(int(std::floor(p.x())), img.width() - 2);
  int y0 = std::min(int(std::floor(p.y())), img.height() - 2);
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  double fx = p.x() - x0;
  double fy = p.y() - y0;
  double w00 = img.at(x0, y0), w10 = img.at(x0 + 1, y0);
  double w01 = img.at(x0, y0 + 1), w11 = img.at(x0 + 1, y0 + 1);
  return (1.0 - fy) * ((1.0 - fx) * w00 + fx * w10) +
         fy * ((1.0 - fx) * w01 + fx * w11);
}

IntensityProfile resample(const GrayImage& img, const LineSegment& seg,
                          int n) {
  if (n < 2) throw DomainError("resample: need at least 2 samples");
  IntensityProfile prof;
  prof.samples.resize(n);
  prof.points.resize(n);
  const Eigen::Vector2d d = seg.b - seg.a;
  prof.spacing = d.norm() / (n - 1);
  for (int i = 0; i < n; ++i) {
    double t = double(i) / (n - 1);
    Eigen::Vector2d p = seg.a + t * d;
    prof.points[i] = p;
    prof.samples[i] = bilinear(img, p);
  }
  return prof;
}

double texture_score(const IntensityProfile& prof) {
  const int n = prof.n();
  if (n < 2) throw DomainError("texture_score: need at least 2 samples");
  double mean = 0.0;
  for (double s : prof.samples) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : prof.samples) var += (s - mean) * (s - mean);
  return std::sqrt(var / n);
}

IntensityProfile reversed(const IntensityProfile& prof) {
  IntensityProfile out;
  out.samples.assign(prof.samples.rbegin(), prof.samples.rend());
  out.points.assign(prof.points.rbegin(), prof.points.rend());
  out.spacing = prof.spacing;
  return out;
}

}  // namespace epiline
