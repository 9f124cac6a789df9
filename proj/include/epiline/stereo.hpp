#pragma once

#include <span>
#include <vector>

#include "epiline/errors.hpp"
#include "epiline/imaging.hpp"

namespace epiline {

/// Scanline matching cost parameters: truncated-L2 data term, truncated
/// quadratic smoothness, disparity window, and the order constraint.
struct StereoParams {
  double r = 2500.0;      // data truncation, intensity^2
  double lambda = 2.0;    // smoothness weight
  double alpha = 3.0;     // smoothness truncation
  int d_max = 32;         // window: |d_i| <= d_max samples
  bool monotonic = true;  // require d_{i+1} >= d_i

  void check() const;
};

using DisparityVector = std::vector<int>;

struct MatchCost {
  double total = 0.0;       // intensity^2 units
  double normalized = 0.0;  // total / n
  DisparityVector disparities;
};

inline double data_term(double i1, double i2, const StereoParams& p) {
  double d = i1 - i2;
  double sq = d * d;
  return sq < p.r ? sq : p.r;
}

inline double smooth_term(int di, int dprev, const StereoParams& p) {
  double step = double(di) - double(dprev);
  double sq = p.lambda * step * step;
  return sq < p.alpha ? sq : p.alpha;
}

/// Cost of one disparity assignment: sum of data terms plus smoothness
/// terms, with the second profile index clamped at the ends. The canonical
/// summation order; DP totals are recomputed through this.
double match_cost(std::span<const double> a, std::span<const double> b,
                  const DisparityVector& d, const StereoParams& p);

/// Exact global minimum over the admissible disparity set, with the argmin.
MatchCost line_match(const IntensityProfile& p1, const IntensityProfile& p2,
                     const StereoParams& p);

/// Same minimum, no backtracking. This is the hot path for scoring.
double line_match_cost_only(const IntensityProfile& p1,
                            const IntensityProfile& p2,
                            const StereoParams& p);

/// Span core used by the scoring loops; reverse_b scans b backwards
/// without copying.
double line_match_cost_only(std::span<const double> a,
                            std::span<const double> b, const StereoParams& p,
                            bool reverse_b = false);

/// Plain O(n * D^2) transition scan. Serial correctness baseline for the
/// amortized path; the suite asserts bit-identical totals.
MatchCost line_match_reference(const IntensityProfile& p1,
                               const IntensityProfile& p2,
                               const StereoParams& p);

}  // namespace epiline
