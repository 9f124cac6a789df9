#include "epiline/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epiline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Scratch buffers reused across calls; one set per thread.
struct Workspace {
  std::vector<double> padded;  // profile b, clamped-extended by d_max
  std::vector<double> prev, cur, pmin, smin;
  std::vector<int> parg, sarg;
  std::vector<int16_t> bp;
};

thread_local Workspace ws;

// padded[k] = b[clamp(k - d_max)], optionally with b reversed, so the DP can
// index i + d without branching.
void fill_padded(std::span<const double> b, int d_max, bool reverse) {
  const int n = int(b.size());
  ws.padded.resize(size_t(n) + 2 * d_max);
  for (int k = 0; k < n + 2 * d_max; ++k) {
    int idx = std::clamp(k - d_max, 0, n - 1);
    ws.padded[k] = reverse ? b[n - 1 - idx] : b[idx];
  }
}

struct DpResult {
  double best;
  int best_state;
};

// One forward pass of the amortized DP. When bp is non-null it records, for
// every (i, state), the chosen predecessor state.
//
// The transition min over min(lambda*k^2, alpha) splits into explicit jumps
// below the saturation point (cost still quadratic) plus a single
// prefix/suffix-minimum lookup for every saturated jump (flat cost alpha).
// Candidates are examined in ascending predecessor order with strict-<
// updates, which is exactly the tie-breaking of the O(D^2) reference scan,
// and jump costs come from the same smooth_term inline — so totals and
// backpointers agree bit for bit.
DpResult dp_run(std::span<const double> a, const StereoParams& p,
                int16_t* bp) {
  const int n = int(a.size());
  const int dm = p.d_max;
  const int D = 2 * dm + 1;
  const double* pb = ws.padded.data();

  // Every transition is free when either term of min(lambda*k^2, alpha)
  // vanishes; then a plain running minimum suffices.
  const bool free_jumps = (p.lambda == 0.0 || p.alpha == 0.0);

  // Smallest jump whose cost saturates to alpha, found by the same
  // comparison smooth_term performs. D+1 if no in-window jump saturates.
  int ks = D + 1;
  std::vector<double> jump_cost(1, 0.0);
  if (!free_jumps) {
    for (int k = 1; k <= D; ++k) {
      double c = smooth_term(k, 0, p);
      if (c == p.alpha) {
        ks = k;
        break;
      }
      jump_cost.push_back(c);
    }
  }

  ws.prev.resize(D);
  ws.cur.resize(D);
  ws.pmin.resize(D);
  ws.parg.resize(D);
  if (!p.monotonic) {
    ws.smin.resize(D);
    ws.sarg.resize(D);
  }

  for (int j = 0; j < D; ++j)
    ws.prev[j] = data_term(a[0], pb[j], p);

  for (int i = 1; i < n; ++i) {
    // running minima of the previous row; ties keep the smallest state
    double m = ws.prev[0];
    int marg = 0;
    ws.pmin[0] = m;
    ws.parg[0] = 0;
    for (int j = 1; j < D; ++j) {
      if (ws.prev[j] < m) {
        m = ws.prev[j];
        marg = j;
      }
      ws.pmin[j] = m;
      ws.parg[j] = marg;
    }
    if (!p.monotonic) {
      m = ws.prev[D - 1];
      marg = D - 1;
      ws.smin[D - 1] = m;
      ws.sarg[D - 1] = marg;
      for (int j = D - 2; j >= 0; --j) {
        if (ws.prev[j] <= m) {
          m = ws.prev[j];
          marg = j;
        }
        ws.smin[j] = m;
        ws.sarg[j] = marg;
      }
    }

    for (int j = 0; j < D; ++j) {
      double best = kInf;
      int barg = 0;
      auto consider = [&](double cand, int arg) {
        if (cand < best) {
          best = cand;
          barg = arg;
        }
      };
      if (free_jumps) {
        consider(ws.pmin[p.monotonic ? j : D - 1], ws.parg[p.monotonic ? j : D - 1]);
      } else {
        if (j - ks >= 0) consider(ws.pmin[j - ks] + p.alpha, ws.parg[j - ks]);
        for (int k = std::min(ks - 1, j); k >= 1; --k)
          consider(ws.prev[j - k] + jump_cost[k], j - k);
        consider(ws.prev[j], j);
        if (!p.monotonic) {
          const int kmax = std::min(ks - 1, D - 1 - j);
          for (int k = 1; k <= kmax; ++k)
            consider(ws.prev[j + k] + jump_cost[k], j + k);
          if (j + ks < D) consider(ws.smin[j + ks] + p.alpha, ws.sarg[j + ks]);
        }
      }
      ws.cur[j] = data_term(a[i], pb[i + j], p) + best;
      if (bp) bp[size_t(i) * D + j] = int16_t(barg);
    }
    std::swap(ws.prev, ws.cur);
  }

  double best = kInf;
  int barg = 0;
  for (int j = 0; j < D; ++j)
    if (ws.prev[j] < best) {
      best = ws.prev[j];
      barg = j;
    }
  return {best, barg};
}

void validate(std::span<const double> a, std::span<const double> b,
              const StereoParams& p) {
  p.check();
  if (a.size() != b.size())
    throw LengthMismatch("line_match: profile lengths differ");
  if (a.size() < 2) throw DomainError("line_match: need at least 2 samples");
}

}  // namespace

void StereoParams::check() const {
  if (r <= 0.0 || lambda < 0.0 || alpha < 0.0 || d_max < 0)
    throw DomainError("invalid stereo parameters");
}

double match_cost(std::span<const double> a, std::span<const double> b,
                  const DisparityVector& d, const StereoParams& p) {
  validate(a, b, p);
  const int n = int(a.size());
  if (int(d.size()) != n)
    throw LengthMismatch("match_cost: disparity length differs");
  double data = 0.0;
  for (int i = 0; i < n; ++i) {
    int idx = std::clamp(i + d[i], 0, n - 1);
    data += data_term(a[i], b[idx], p);
  }
  double smooth = 0.0;
  for (int i = 1; i < n; ++i) smooth += smooth_term(d[i], d[i - 1], p);
  return data + smooth;
}

double line_match_cost_only(std::span<const double> a,
                            std::span<const double> b, const StereoParams& p,
                            bool reverse_b) {
  validate(a, b, p);
  fill_padded(b, p.d_max, reverse_b);
  DpResult r = dp_run(a, p, nullptr);
  return r.best / double(a.size());
}

double line_match_cost_only(const IntensityProfile& p1,
                            const IntensityProfile& p2,
                            const StereoParams& p) {
  return line_match_cost_only(std::span<const double>(p1.samples),
                              std::span<const double>(p2.samples), p, false);
}

MatchCost line_match(const IntensityProfile& p1, const IntensityProfile& p2,
                     const StereoParams& p) {
  std::span<const double> a(p1.samples), b(p2.samples);
  validate(a, b, p);
  const int n = int(a.size());
  const int D = 2 * p.d_max + 1;
  fill_padded(b, p.d_max, false);
  ws.bp.resize(size_t(n) * D);
  DpResult r = dp_run(a, p, ws.bp.data());

  MatchCost out;
  out.disparities.resize(n);
  int j = r.best_state;
  for (int i = n - 1; i >= 0; --i) {
    out.disparities[i] = j - p.d_max;
    if (i > 0) j = ws.bp[size_t(i) * D + j];
  }
  out.total = match_cost(a, b, out.disparities, p);
  out.normalized = out.total / n;
  return out;
}

MatchCost line_match_reference(const IntensityProfile& p1,
                               const IntensityProfile& p2,
                               const StereoParams& p) {
  std::span<const double> a(p1.samples), b(p2.samples);
  validate(a, b, p);
  const int n = int(a.size());
  const int dm = p.d_max;
  const int D = 2 * dm + 1;
  fill_padded(b, dm, false);
  const double* pb = ws.padded.data();

  std::vector<double> prev(D), cur(D);
  std::vector<int16_t> bp(size_t(n) * D);
  for (int j = 0; j < D; ++j) prev[j] = data_term(a[0], pb[j], p);

  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < D; ++j) {
      double best = kInf;
      int barg = 0;
      const int hi = p.monotonic ? j : D - 1;
      for (int k = 0; k <= hi; ++k) {
        double cand = prev[k] + smooth_term(j - dm, k - dm, p);
        if (cand < best) {
          best = cand;
          barg = k;
        }
      }
      cur[j] = data_term(a[i], pb[i + j], p) + best;
      bp[size_t(i) * D + j] = int16_t(barg);
    }
    std::swap(prev, cur);
  }

  double best = kInf;
  int barg = 0;
  for (int j = 0; j < D; ++j)
    if (prev[j] < best) {
      best = prev[j];
      barg = j;
    }

  MatchCost out;
  out.disparities.resize(n);
  int j = barg;
  for (int i = n - 1; i >= 0; --i) {
    out.disparities[i] = j - dm;
    if (i > 0) j = bp[size_t(i) * D + j];
  }
  out.total = match_cost(a, b, out.disparities, p);
  out.normalized = out.total / n;
  return out;
}

}  // namespace epiline
