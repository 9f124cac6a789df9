#include "epiline/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <tuple>

namespace epiline {

std::vector<double> uniform_angles(int count) {
  if (count < 1) throw DomainError("uniform_angles: count must be positive");
  std::vector<double> a(count);
  for (int i = 0; i < count; ++i) a[i] = std::numbers::pi * i / count;
  return a;
}

Pencil pencil_lines(const PencilSpec& spec, const ImageBounds& b,
                    const GrayImage& img) {
  if (spec.center.is_ideal())
    throw DegenerateInput("pencil_lines: center must be finite");
  if (spec.samples < 2)
    throw DomainError("pencil_lines: need at least 2 profile samples");
  for (size_t i = 0; i < spec.angles.size(); ++i) {
    double a = spec.angles[i];
    if (a < 0.0 || a >= std::numbers::pi ||
        (i > 0 && a <= spec.angles[i - 1]))
      throw DomainError("pencil_lines: angles must increase within [0, pi)");
  }
  Eigen::Vector2d c = spec.center.dehom();

  Pencil out;
  for (size_t i = 0; i < spec.angles.size(); ++i) {
    double a = spec.angles[i];
    // Normal (-sin a, cos a) gives direction (cos a, sin a); incidence with
    // the center is exact because the same products cancel.
    HomLine l(-std::sin(a), std::cos(a),
              std::sin(a) * c.x() - std::cos(a) * c.y());
    auto seg = clip_line(l, b);
    if (!seg || seg->length() < spec.min_chord) continue;
    IntensityProfile prof = resample(img, *seg, spec.samples);
    if (texture_score(prof) < spec.min_texture) continue;
    out.push_back(PencilLine{l, std::move(prof), a, int(i)});
  }
  if (out.empty()) throw EmptyPencil("pencil_lines: every line was filtered");
  return out;
}

namespace {

inline double pair_cost(const PencilLine& a, const PencilLine& bline,
                        const StereoParams& sp) {
  // Epipolar transfer may flip a line's traversal order between the views,
  // so score both orientations of the second profile and keep the better.
  double fwd = line_match_cost_only(a.profile, bline.profile, sp);
  double rev = line_match_cost_only(
      std::span<const double>(a.profile.samples),
      std::span<const double>(bline.profile.samples), sp, true);
  return std::min(fwd, rev);
}

ScoreMatrix scored_shell(const Pencil& p1, const Pencil& p2) {
  if (p1.empty() || p2.empty())
    throw EmptyPencil("score_all: empty pencil");
  ScoreMatrix m;
  m.rows = int(p1.size());
  m.cols = int(p2.size());
  m.costs.assign(size_t(m.rows) * m.cols, 0.0);
  m.row_index.reserve(p1.size());
  m.col_index.reserve(p2.size());
  for (const auto& l : p1) m.row_index.push_back(l.index);
  for (const auto& l : p2) m.col_index.push_back(l.index);
  return m;
}

}  // namespace

ScoreMatrix score_all(const Pencil& p1, const Pencil& p2,
                      const StereoParams& sp) {
  ScoreMatrix m = scored_shell(p1, p2);
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) m.at(i, j) = pair_cost(p1[i], p2[j], sp);
  return m;
}

ScoreMatrix score_all_serial(const Pencil& p1, const Pencil& p2,
                             const StereoParams& sp) {
  ScoreMatrix m = scored_shell(p1, p2);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) m.at(i, j) = pair_cost(p1[i], p2[j], sp);
  return m;
}

std::vector<CandidatePair> mutual_best(const ScoreMatrix& m, const Pencil& p1,
                                       const Pencil& p2, int k) {
  if (k < 1) throw DomainError("mutual_best: k must be at least 1");
  if (int(p1.size()) != m.rows || int(p2.size()) != m.cols)
    throw LengthMismatch("mutual_best: pencil sizes do not match the matrix");

  const int big = std::numeric_limits<int>::max();
  auto ranks = [&](int n, int stride0, int stride1, int count) {
    // rank[x * count + y] = 0-based position of y in the ascending order of
    // slice x; +infinity entries rank past the end.
    std::vector<int> rank(size_t(n) * count, big);
    std::vector<int> order(count);
    for (int x = 0; x < n; ++x) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int u, int v) {
        return m.costs[size_t(x) * stride0 + size_t(u) * stride1] <
               m.costs[size_t(x) * stride0 + size_t(v) * stride1];
      });
      for (int pos = 0; pos < count; ++pos) {
        double c = m.costs[size_t(x) * stride0 + size_t(order[pos]) * stride1];
        if (std::isfinite(c)) rank[size_t(x) * count + order[pos]] = pos;
      }
    }
    return rank;
  };
  std::vector<int> row_rank = ranks(m.rows, m.cols, 1, m.cols);
  std::vector<int> col_rank = ranks(m.cols, 1, m.cols, m.rows);

  std::vector<CandidatePair> out;
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) {
      int r1 = row_rank[size_t(i) * m.cols + j];
      int r2 = col_rank[size_t(j) * m.rows + i];
      if (r1 >= k || r2 >= k) continue;
      out.push_back(
          CandidatePair{p1[i].line, p2[j].line, m.at(i, j), r1 + 1, r2 + 1,
                        i, j});
    }
  std::sort(out.begin(), out.end(),
            [](const CandidatePair& a, const CandidatePair& b) {
              return std::tie(a.cost, a.i, a.j) < std::tie(b.cost, b.i, b.j);
            });
  return out;
}

}  // namespace epiline
