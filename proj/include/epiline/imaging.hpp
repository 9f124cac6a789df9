#pragma once

#include <optional>
#include <vector>

#include "epiline/geometry.hpp"

namespace epiline {

/// Grayscale raster, row-major, intensities in [0, 255] (real-valued after
/// decoding color input). Immutable in spirit: fill it once, then share.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  ImageBounds bounds() const { return ImageBounds(width_, height_); }

  float at(int x, int y) const { return data_[size_t(y) * width_ + x]; }
  void set(int x, int y, float v) { data_[size_t(y) * width_ + x] = v; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Chord of a line clipped to the sampling domain [0,w-1]x[0,h-1].
/// Endpoint a has the smaller x (ties: smaller y), so profiles taken along
/// the segment have a canonical direction.
struct LineSegment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
  HomLine parent;

  double length() const { return (b - a).norm(); }
};

/// Equidistant intensity samples along a clipped line.
struct IntensityProfile {
  std::vector<double> samples;
  std::vector<Eigen::Vector2d> points;
  double spacing = 0.0;

  int n() const { return static_cast<int>(samples.size()); }
};

/// Maximal chord of l inside [0,w-1]x[0,h-1], or nullopt when the line
/// misses the rectangle or the chord is shorter than 2 px.
std::optional<LineSegment> clip_line(const HomLine& l, const ImageBounds& b);

/// Bilinear interpolation; exact at integer coordinates. Throws OutOfBounds
/// outside [0,w-1]x[0,h-1].
double bilinear(const GrayImage& img, const Eigen::Vector2d& p);

/// n equidistant samples from seg.a to seg.b inclusive.
IntensityProfile resample(const GrayImage& img, const LineSegment& seg, int n);

/// Population standard deviation of the sample values; lines with little
/// texture score near zero and are filtered from candidate generation.
double texture_score(const IntensityProfile& prof);

IntensityProfile reversed(const IntensityProfile& prof);

}  // namespace epiline
