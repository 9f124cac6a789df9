#pragma once

#include <vector>

#include "epiline/imaging.hpp"
#include "epiline/stereo.hpp"

namespace epiline {

/// A pencil of lines through one point: one line per angle, with short or
/// textureless chords filtered out.
struct PencilSpec {
  HomPoint center;
  std::vector<double> angles;  // strictly increasing, each in [0, pi)
  double min_chord = 32.0;     // px
  double min_texture = 4.0;    // intensity std along the chord
  int samples = 256;           // profile resolution
};

/// count angles uniformly covering [0, pi).
std::vector<double> uniform_angles(int count);

struct PencilLine {
  HomLine line;
  IntensityProfile profile;
  double angle = 0.0;
  int index = 0;  // position in the spec's angle list
};

using Pencil = std::vector<PencilLine>;

/// Line at each spec angle through spec.center (direction (cos a, sin a)),
/// clipped to the image; drops chords shorter than min_chord or with
/// texture below min_texture. Throws EmptyPencil when nothing survives and
/// DegenerateInput for an ideal center.
Pencil pencil_lines(const PencilSpec& spec, const ImageBounds& b,
                    const GrayImage& img);

/// All cross-pair stereo costs between two pencils.
struct ScoreMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> costs;  // row-major
  std::vector<int> row_index, col_index;  // original angle indices

  double at(int i, int j) const { return costs[size_t(i) * cols + j]; }
  double& at(int i, int j) { return costs[size_t(i) * cols + j]; }
};

/// costs[i][j] = best of the two profile orientations of the normalized DP
/// cost. Entries are pure per-(i,j) computations, so the parallel loop is
/// bit-identical to the serial one.
ScoreMatrix score_all(const Pencil& p1, const Pencil& p2,
                      const StereoParams& sp);
ScoreMatrix score_all_serial(const Pencil& p1, const Pencil& p2,
                             const StereoParams& sp);

struct CandidatePair {
  HomLine l1, l2;
  double cost = 0.0;
  int rank1 = 0, rank2 = 0;  // 1-based mutual ranks
  int i = 0, j = 0;          // positions within the two pencils
};

/// Pairs (i, j) where j is among the k cheapest entries of row i and i is
/// among the k cheapest of column j; ties broken by index. Sorted by cost
/// ascending.
std::vector<CandidatePair> mutual_best(const ScoreMatrix& m, const Pencil& p1,
                                       const Pencil& p2, int k);

}  // namespace epiline
