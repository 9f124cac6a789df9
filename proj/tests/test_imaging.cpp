#include "epiline/imaging.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "epiline/image_io.hpp"

using namespace epiline;

namespace {

// I(x, y) = 2x + 3y + 7: bilinear interpolation reproduces affine images
// exactly, which gives a closed-form oracle at fractional coordinates.
GrayImage affine_image(int w, int h) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, float(2 * x + 3 * y + 7));
  return img;
}

std::filesystem::path temp_file(const char* stem) {
  return std::filesystem::temp_directory_path() /
         (std::string("epiline_test_") + stem);
}

}  // namespace

TEST_CASE("clip of axis-aligned lines") {
  ImageBounds b(100, 50);

  auto horizontal = clip_line(HomLine(0.0, 1.0, -5.0), b);
  REQUIRE(horizontal.has_value());
  CHECK(horizontal->a.x() == doctest::Approx(0.0));
  CHECK(horizontal->a.y() == doctest::Approx(5.0));
  CHECK(horizontal->b.x() == doctest::Approx(99.0));
  CHECK(horizontal->b.y() == doctest::Approx(5.0));
  CHECK(horizontal->length() == doctest::Approx(99.0));

  auto vertical = clip_line(HomLine(1.0, 0.0, -7.0), b);
  REQUIRE(vertical.has_value());
  CHECK(vertical->a.x() == doctest::Approx(7.0));
  CHECK(vertical->a.y() == doctest::Approx(0.0));  // tie on x: smaller y first
  CHECK(vertical->b.y() == doctest::Approx(49.0));

  auto diagonal = clip_line(HomLine(1.0, -1.0, 0.0), b);  // y = x
  REQUIRE(diagonal.has_value());
  CHECK(diagonal->a.x() == doctest::Approx(0.0));
  CHECK(diagonal->a.y() == doctest::Approx(0.0));
  CHECK(diagonal->b.x() == doctest::Approx(49.0));
  CHECK(diagonal->b.y() == doctest::Approx(49.0));
}

TEST_CASE("clip rejects misses and slivers") {
  ImageBounds b(100, 50);
  CHECK(!clip_line(HomLine(0.0, 1.0, 3.0), b).has_value());     // y = -3
  CHECK(!clip_line(HomLine(0.0, 1.0, -80.0), b).has_value());   // below
  CHECK(!clip_line(HomLine(1.0, 0.0, -200.0), b).has_value());  // right
  // Corner sliver: x + y = 0.5 has a chord of ~0.7 px.
  CHECK(!clip_line(HomLine(1.0, 1.0, -0.5), b).has_value());
  CHECK(!clip_line(HomLine(0.0, 0.0, 1.0), b).has_value());  // not a line
}

TEST_CASE("clip endpoints satisfy the line equation") {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ImageBounds b(320, 240);
  int hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    HomLine l(u(rng), u(rng), 150.0 * u(rng));
    if (!l.valid()) continue;
    auto seg = clip_line(l, b);
    if (!seg) continue;
    ++hits;
    HomLine nf = l.normal_form();
    for (const Eigen::Vector2d& p : {seg->a, seg->b}) {
      CHECK(std::abs(nf.eval(HomPoint(p.x(), p.y()))) < 1e-9);
      CHECK(p.x() >= 0.0);
      CHECK(p.x() <= 319.0);
      CHECK(p.y() >= 0.0);
      CHECK(p.y() <= 239.0);
    }
    bool ordered = seg->a.x() < seg->b.x() ||
                   (seg->a.x() == seg->b.x() && seg->a.y() <= seg->b.y());
    CHECK(ordered);
  }
  CHECK(hits > 50);
}

TEST_CASE("bilinear interpolation is exact on affine images") {
  GrayImage img = affine_image(32, 24);
  CHECK(bilinear(img, {5.0, 7.0}) == doctest::Approx(2 * 5 + 3 * 7 + 7));
  CHECK(bilinear(img, {5.5, 7.0}) == doctest::Approx(2 * 5.5 + 3 * 7 + 7));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(0.0, 31.0), uy(0.0, 23.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector2d p(ux(rng), uy(rng));
    CHECK(bilinear(img, p) == doctest::Approx(2 * p.x() + 3 * p.y() + 7));
  }
  // Edges included, outside rejected.
  CHECK(bilinear(img, {31.0, 23.0}) == doctest::Approx(2 * 31 + 3 * 23 + 7));
  CHECK_THROWS_AS(bilinear(img, {31.01, 5.0}), OutOfBounds);
  CHECK_THROWS_AS(bilinear(img, {-0.01, 5.0}), OutOfBounds);
}

TEST_CASE("bilinear mixes the four neighbours") {
  GrayImage img(2, 2);
  img.set(0, 0, 10.0f);
  img.set(1, 0, 20.0f);
  img.set(0, 1, 30.0f);
  img.set(1, 1, 40.0f);
  CHECK(bilinear(img, {0.5, 0.5}) == doctest::Approx(25.0));
  CHECK(bilinear(img, {0.25, 0.0}) == doctest::Approx(12.5));
}

TEST_CASE("resample walks the segment uniformly") {
  GrayImage img = affine_image(64, 48);
  LineSegment seg{{2.0, 3.0}, {42.0, 33.0}, HomLine(3.0, -4.0, 6.0)};
  IntensityProfile prof = resample(img, seg, 11);
  REQUIRE(prof.n() == 11);
  CHECK(prof.points.front() == seg.a);
  CHECK(prof.points.back() == seg.b);
  CHECK(prof.spacing == doctest::Approx(5.0));  // length 50 over 10 gaps
  for (int i = 0; i < prof.n(); ++i) {
    const Eigen::Vector2d& p = prof.points[i];
    CHECK(prof.samples[i] == doctest::Approx(2 * p.x() + 3 * p.y() + 7));
  }
  CHECK_THROWS_AS(resample(img, seg, 1), DomainError);
}

TEST_CASE("texture score is the population deviation") {
  IntensityProfile flat;
  flat.samples = {9.0, 9.0, 9.0, 9.0};
  CHECK(texture_score(flat) == doctest::Approx(0.0));
  IntensityProfile alt;
  alt.samples = {0.0, 2.0, 0.0, 2.0};
  CHECK(texture_score(alt) == doctest::Approx(1.0));
  IntensityProfile tiny;
  tiny.samples = {1.0};
  CHECK_THROWS_AS(texture_score(tiny), DomainError);
}

TEST_CASE("profile reversal") {
  IntensityProfile prof;
  prof.samples = {1.0, 2.0, 3.0};
  prof.points = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
  prof.spacing = 1.0;
  IntensityProfile rev = reversed(prof);
  CHECK(rev.samples == std::vector<double>{3.0, 2.0, 1.0});
  CHECK(rev.points.front() == Eigen::Vector2d(2.0, 0.0));
  IntensityProfile back = reversed(rev);
  CHECK(back.samples == prof.samples);
}

TEST_CASE("png round trip preserves gray values") {
  GrayImage img(17, 9);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 255);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x) img.set(x, y, float(u(rng)));

  auto path = temp_file("roundtrip.png");
  save_png_gray(path.string(), img);
  GrayImage back = load_image(path.string());
  REQUIRE(back.width() == 17);
  REQUIRE(back.height() == 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x) CHECK(back.at(x, y) == img.at(x, y));
  std::filesystem::remove(path);
}

TEST_CASE("pgm round trip preserves gray values") {
  GrayImage img(5, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) img.set(x, y, float((x * 31 + y * 57) % 256));
  auto path = temp_file("roundtrip.pgm");
  save_pgm(path.string(), img);
  GrayImage back = load_image(path.string());
  REQUIRE(back.width() == 5);
  REQUIRE(back.height() == 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) CHECK(back.at(x, y) == img.at(x, y));
  std::filesystem::remove(path);
}

TEST_CASE("rgb png decodes to ITU 601 luma") {
  std::vector<unsigned char> rgb = {255, 0, 0, 0, 255, 0,
                                    0,   0, 255, 255, 255, 255};
  auto path = temp_file("rgb.png");
  save_png_rgb(path.string(), 2, 2, rgb);
  GrayImage img = load_image(path.string());
  CHECK(img.at(0, 0) == doctest::Approx(0.299 * 255).epsilon(0.01));
  CHECK(img.at(1, 0) == doctest::Approx(0.587 * 255).epsilon(0.01));
  CHECK(img.at(0, 1) == doctest::Approx(0.114 * 255).epsilon(0.01));
  CHECK(img.at(1, 1) == doctest::Approx(255.0));
  std::filesystem::remove(path);
}

TEST_CASE("loader reports missing and malformed files") {
  CHECK_THROWS_AS(load_image("/nonexistent/image.png"), MissingFile);
  auto path = temp_file("garbage.pgm");
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    std::fputs("P5 not really a header", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_image(path.string()), ParseError);
  std::filesystem::remove(path);
}
