#include "epiline/synthetic.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace epiline {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double hash01(std::int64_t ix, std::int64_t iy, std::uint64_t salt) {
  std::uint64_t h = splitmix(splitmix(salt ^ std::uint64_t(ix) * 0x9e3779b9ull)
                             ^ std::uint64_t(iy) * 0x85ebca6bull);
  return double(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinearly interpolated lattice noise in [0, 1].
double value_noise(double u, double v, std::uint64_t salt) {
  double fu = std::floor(u), fv = std::floor(v);
  std::int64_t iu = std::int64_t(fu), iv = std::int64_t(fv);
  double tu = smoothstep(u - fu), tv = smoothstep(v - fv);
  double n00 = hash01(iu, iv, salt), n10 = hash01(iu + 1, iv, salt);
  double n01 = hash01(iu, iv + 1, salt), n11 = hash01(iu + 1, iv + 1, salt);
  return (1.0 - tv) * ((1.0 - tu) * n00 + tu * n10) +
         tv * ((1.0 - tu) * n01 + tu * n11);
}

// Multi-octave texture in intensity units [20, 235]. The finest octave has
// a period of several pixels at these depths, so bilinear resampling along
// a line reconstructs it faithfully in both views.
double texture_at(double u, double v, std::uint64_t salt) {
  double acc = 0.0, amp = 1.0, freq = 1.0, norm = 0.0;
  for (int o = 0; o < 4; ++o) {
    acc += amp * value_noise(u * freq, v * freq, salt + o * 1013ull);
    norm += amp;
    amp *= 0.55;
    freq *= 2.0;
  }
  return 20.0 + 215.0 * (acc / norm);
}

struct Plane {
  Eigen::Vector3d n;       // unit normal
  double d;                // plane: n . x = d
  Eigen::Vector3d origin;  // point on the plane
  Eigen::Vector3d b1, b2;  // in-plane orthonormal basis
  std::uint64_t salt;
  // Half-size of the visible patch in plane coordinates; the backdrop plane
  // is unbounded so every ray terminates somewhere.
  double extent = std::numeric_limits<double>::infinity();
};

Eigen::Matrix3d intrinsics(const ImageBounds& b) {
  double f = 0.9 * b.width;
  Eigen::Matrix3d k;
  k << f, 0.0, 0.5 * b.width, 0.0, f, 0.5 * b.height, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d rotation_xyz(double rx, double ry, double rz) {
  return (Eigen::AngleAxisd(rz, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(ry, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rx, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

struct Raycaster {
  Eigen::Matrix3d kinv_rt;  // R^T K^-1: pixel to world direction
  Eigen::Vector3d c;        // camera center
  const std::vector<Plane>* planes;

  // World point seen at (pixel) p, or nullopt when no plane is hit.
  std::optional<std::pair<Eigen::Vector3d, const Plane*>> cast(
      const Eigen::Vector2d& p) const {
    Eigen::Vector3d dir = kinv_rt * Eigen::Vector3d(p.x(), p.y(), 1.0);
    double best = std::numeric_limits<double>::infinity();
    const Plane* hit = nullptr;
    for (const Plane& pl : *planes) {
      double denom = pl.n.dot(dir);
      if (std::abs(denom) < 1e-12) continue;
      double lambda = (pl.d - pl.n.dot(c)) / denom;
      if (lambda <= 0.1 || lambda >= best) continue;
      Eigen::Vector3d rel = c + lambda * dir - pl.origin;
      if (std::abs(rel.dot(pl.b1)) > pl.extent ||
          std::abs(rel.dot(pl.b2)) > pl.extent)
        continue;
      best = lambda;
      hit = &pl;
    }
    if (!hit) return std::nullopt;
    return std::make_pair(Eigen::Vector3d(c + best * dir), hit);
  }
};

double shade(const Eigen::Vector3d& x, const Plane& pl) {
  Eigen::Vector3d rel = x - pl.origin;
  return texture_at(rel.dot(pl.b1), rel.dot(pl.b2), pl.salt);
}

}  // namespace

SyntheticScene make_synthetic_scene(std::uint64_t seed, const ImageBounds& b,
                                    const SceneParams& g) {
  if (g.planes < 1 || g.planes > 3)
    throw DomainError("make_synthetic_scene: plane count must be 1..3");
  std::mt19937_64 rng(splitmix(seed ^ 0x51e9a17ull));
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  const Eigen::Matrix3d k = intrinsics(b);
  const Eigen::Matrix3d r1 = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d c1 = Eigen::Vector3d::Zero();
  const Eigen::Vector3d c2(g.baseline,
                           g.rectified ? 0.0 : 0.05 * g.baseline * u(rng),
                           g.rectified ? 0.0 : 0.04 * g.baseline * u(rng));
  // Second camera verges toward the scene so the shared field of view stays
  // large; small jitters keep the epipolar geometry generic. Rectified mode
  // keeps the axes parallel so epipolar lines stay horizontal.
  const double mid_depth = 7.5;
  const Eigen::Matrix3d r2 =
      g.rectified ? Eigen::Matrix3d::Identity()
                  : rotation_xyz(0.02 * u(rng),
                                 -std::atan2(c2.x(), mid_depth) + 0.02 * u(rng),
                                 0.02 * u(rng));
  const Eigen::Vector3d t2 = -r2 * c2;

  CameraMatrix cam1, cam2;
  cam1.p.leftCols<3>() = k * r1;
  cam1.p.col(3) = Eigen::Vector3d::Zero();
  cam2.p.leftCols<3>() = k * r2;
  cam2.p.col(3) = k * t2;

  Eigen::Matrix3d t2x;
  t2x << 0.0, -t2.z(), t2.y(), t2.z(), 0.0, -t2.x(), -t2.y(), t2.x(), 0.0;
  Eigen::Matrix3d kinv = k.inverse();
  FundamentalMatrix truth = FundamentalMatrix::from_matrix(
      enforce_rank2(kinv.transpose() * t2x * r2 * kinv));

  // 1-3 nearly fronto-parallel layers: finite patches floating in front of
  // an unbounded backdrop, so depth actually varies across the image and
  // point matches are never all coplanar.
  std::vector<Plane> planes;
  for (int i = 0; i < g.planes; ++i) {
    Plane pl;
    double depth = 5.5 + 2.5 * i + 0.5 * u(rng);
    Eigen::Vector3d n(0.12 * u(rng), 0.12 * u(rng), -1.0);
    pl.n = n.normalized();
    pl.origin = Eigen::Vector3d(1.0 * u(rng), 0.8 * u(rng), depth);
    if (i == g.planes - 1) {
      pl.origin = Eigen::Vector3d(0.0, 0.0, depth + 3.0);
    } else {
      pl.extent = 0.35 * depth;
    }
    pl.d = pl.n.dot(pl.origin);
    pl.b1 = pl.n.cross(Eigen::Vector3d::UnitY()).normalized();
    pl.b2 = pl.n.cross(pl.b1).normalized();
    pl.salt = splitmix(seed ^ (0xabcdull + i));
    planes.push_back(pl);
  }

  Raycaster rc1{r1.transpose() * kinv, c1, &planes};
  Raycaster rc2{r2.transpose() * kinv, c2, &planes};

  GrayImage img1(b.width, b.height);
  GrayImage img2(b.width, b.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < b.height; ++y) {
    for (int x = 0; x < b.width; ++x) {
      auto h1 = rc1.cast({double(x), double(y)});
      img1.set(x, y, h1 ? float(shade(h1->first, *h1->second)) : 0.0f);
      auto h2 = rc2.cast({double(x), double(y)});
      img2.set(x, y, h2 ? float(shade(h2->first, *h2->second)) : 0.0f);
    }
  }

  // Ground-truth matches: cast from image 1, reproject into image 2.
  std::uniform_real_distribution<double> px(g.margin, b.width - 1.0 - g.margin);
  std::uniform_real_distribution<double> py(g.margin,
                                            b.height - 1.0 - g.margin);
  PointMatchSet matches;
  int attempts = 0;
  while (int(matches.matches.size()) < g.match_count &&
         attempts < 50 * g.match_count) {
    ++attempts;
    Eigen::Vector2d p1(px(rng), py(rng));
    auto hit = rc1.cast(p1);
    if (!hit) continue;
    const Eigen::Vector3d& xw = hit->first;
    // The point must be visible (same plane nearest) in camera 2 as well.
    Eigen::Vector3d proj = cam2.p * xw.homogeneous();
    if (proj.z() <= 0.0) continue;
    Eigen::Vector2d p2 = proj.hnormalized();
    if (p2.x() < g.margin || p2.x() > b.width - 1.0 - g.margin ||
        p2.y() < g.margin || p2.y() > b.height - 1.0 - g.margin)
      continue;
    auto hit2 = rc2.cast(p2);
    if (!hit2 || hit2->second != hit->second) continue;
    if ((hit2->first - xw).norm() > 1e-6) continue;
    matches.matches.emplace_back(HomPoint(p1.x(), p1.y()),
                                 HomPoint(p2.x(), p2.y()));
  }
  return SyntheticScene{cam1, cam2, std::move(img1), std::move(img2), truth,
                        std::move(matches)};
}

}  // namespace epiline
