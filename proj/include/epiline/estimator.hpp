#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "epiline/candidates.hpp"
#include "epiline/geometry.hpp"

namespace epiline {

/// Number of RANSAC draws needed to see one all-inlier sample of the given
/// size with the requested confidence.
int ransac_trials(double inlier_ratio, double confidence, int sample_size);

struct PencilDefaults {
  int angle_count = 180;
  double min_chord = 32.0;
  double min_texture = 4.0;
  int samples = 256;
};

struct EstimateConfig {
  StereoParams stereo;
  PencilDefaults pencil;
  int k_mutual = 2;          // mutual-best depth for candidate pairs
  int max_hypotheses = 2000; // cap on cross-combinations, cheapest first
  int screen_lines = 9;      // 3 defining lines + uniform pencil samples
  int validation_lines = 100;
  double top_fraction = 0.05; // share of screened hypotheses fully validated
  double inlier_area = 0.0;   // <= 0 picks 3 * image width (px^2)
  std::uint64_t seed = 0;
  int line_trials = 500; // iterations of the point-free RANSAC

  void check() const;
  double inlier_area_for(const ImageBounds& b) const;
};

struct Hypothesis {
  CandidatePair pair_p, pair_q;
  HomPoint e1, e2; // pencil centers: intersections of the generating lines
  std::pair<HomLine, HomLine> third;
  ProjectiveMap h; // epipolar line homography, image 1 -> image 2
  ProjectiveMap g; // independently fitted reverse map, image 2 -> image 1
  double screen_score = 0.0; // mean forward-backward area, lower is better
  std::optional<double> full_score; // set for fully validated hypotheses
};

struct EstimateDiagnostics {
  int candidates1 = 0; // surviving candidate pairs (or grid lines) per side
  int candidates2 = 0;
  int hypotheses = 0; // combinations that produced a hypothesis
  int screened = 0;   // hypotheses with a finite screen score
  int validated = 0;  // hypotheses given a full validation / best consensus
  // Wall-clock milliseconds per stage. Informational only; serialization
  // omits them so identical runs produce identical bytes.
  double candidate_ms = 0.0;
  double hypothesis_ms = 0.0;
  double validation_ms = 0.0;
};

struct EstimateResult {
  FundamentalMatrix f;
  Hypothesis hypothesis;
  EstimateDiagnostics diagnostics;
};

/// Lines through e that can intersect the image: angular samples of the
/// visible sub-pencil for a finite center, parallel lines stepped across
/// the image for an ideal one. Every returned line passes through e.
std::vector<HomLine> sample_pencil_through(const HomPoint& e,
                                           const ImageBounds& b, int count);

/// Line through e whose direction is the sum of the unit directions of la
/// and lb, each oriented from e toward the midpoint of its clipped chord.
/// For an ideal e (parallel generators) it is the parallel line halfway
/// between the two chords.
HomLine bisector_line(const HomPoint& e, const HomLine& la, const HomLine& lb,
                      const ImageBounds& b);

/// The member of the pencil through e minimizing the stereo cost against
/// target, with the cost. Samples cfg.validation_lines angles; lines whose
/// chord or texture fail the pencil gates are skipped.
std::pair<HomLine, double> best_line_through_epipole(
    const HomPoint& e, const IntensityProfile& target, const GrayImage& img,
    const ImageBounds& b, const EstimateConfig& cfg);

/// Mean area between l and G*H*l over the 3 defining lines plus uniform
/// pencil samples (cfg.screen_lines total). +infinity when any transfer
/// misses the image.
double screen_hypothesis(const Hypothesis& h, const ImageBounds& b,
                         const EstimateConfig& cfg);

/// Mean normalized stereo cost over transferred line pairs (l, H*l)
/// sampled through e1; pairs failing the chord/texture gates are skipped
/// and the mean runs over survivors. +infinity when none survive.
double full_validate(const Hypothesis& h, const GrayImage& img1,
                     const GrayImage& img2, const EstimateConfig& cfg);

/// Two-point fundamental matrix estimation: candidate epipolar lines
/// through each point, mutual-best pairing, epipoles from intersections, a
/// bisector third line matched across views, line-homography fit, forward-
/// backward screening, and full validation of the best fraction.
EstimateResult two_point_estimate(const GrayImage& img1, const GrayImage& img2,
                                  const std::pair<HomPoint, HomPoint>& p,
                                  const std::pair<HomPoint, HomPoint>& q,
                                  const EstimateConfig& cfg);

/// Same pipeline with the third line pair fixed to (r1 x e1, r2 x e2), so
/// no per-hypothesis pencil search is needed. Throws DegenerateInput when
/// r is unusable (coincides with p/q or lies on the generating lines of
/// every otherwise-viable hypothesis).
EstimateResult three_point_accelerated(const GrayImage& img1,
                                       const GrayImage& img2,
                                       const std::pair<HomPoint, HomPoint>& p,
                                       const std::pair<HomPoint, HomPoint>& q,
                                       const std::pair<HomPoint, HomPoint>& r3,
                                       const EstimateConfig& cfg);

/// Point-free variant: candidate pairs from a dense angle/offset grid of
/// lines in both images, epipoles hypothesized from two pairs sampled with
/// probability proportional to 1/rank, scored by consensus: the number of
/// candidate pairs (l, l') with area between l' and H*l under inlier_area.
/// The winner maximizes that consensus; its count is reported in
/// diagnostics.validated and full_score stays unset.
EstimateResult line_ransac_estimate(const GrayImage& img1,
                                    const GrayImage& img2,
                                    const EstimateConfig& cfg);

}  // namespace epiline
