#pragma once

#include <cstdint>

#include "epiline/baselines.hpp"
#include "epiline/imaging.hpp"

namespace epiline {

struct SceneParams {
  int planes = 2;            // 1..3 textured planes
  double baseline = 0.35;    // camera separation in scene units
  int match_count = 120;     // ground-truth matches to sample
  int margin = 8;            // keep matches this far from the border
  bool rectified = false;    // pure x-translation: ideal epipoles,
                             // horizontal epipolar lines
};

struct SyntheticScene {
  CameraMatrix cam1, cam2;
  GrayImage img1, img2;
  FundamentalMatrix truth;
  PointMatchSet matches;
};

/// Two pinhole cameras viewing 1-3 textured planes. Every pixel is rendered
/// by ray casting against the same procedural texture, so corresponding
/// epipolar lines really do see the same intensity profile. Ground-truth F
/// comes from the closed-form K/R/C relation; sampled matches satisfy it to
/// machine precision. Deterministic per seed.
SyntheticScene make_synthetic_scene(std::uint64_t seed, const ImageBounds& b,
                                    const SceneParams& g = {});

}  // namespace epiline
