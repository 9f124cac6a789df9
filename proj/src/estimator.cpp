#include "epiline/estimator.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <tuple>

namespace epiline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int ransac_trials(double inlier_ratio, double confidence, int sample_size) {
  if (!(inlier_ratio > 0.0) || inlier_ratio > 1.0)
    throw DomainError("ransac_trials: inlier_ratio must be in (0, 1]");
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw DomainError("ransac_trials: confidence must be in (0, 1)");
  if (sample_size < 1)
    throw DomainError("ransac_trials: sample_size must be positive");
  double good = std::pow(inlier_ratio, sample_size);
  if (good >= 1.0) return 1;
  double n = std::ceil(std::log1p(-confidence) / std::log1p(-good));
  return std::max(1, int(n));
}

void EstimateConfig::check() const {
  stereo.check();
  if (pencil.angle_count < 1 || pencil.samples < 2 || pencil.min_chord < 2.0)
    throw DomainError("EstimateConfig: bad pencil defaults");
  if (k_mutual < 1 || max_hypotheses < 1 || screen_lines < 1 ||
      validation_lines < 1 || line_trials < 1)
    throw DomainError("EstimateConfig: counts must be at least 1");
  if (!(top_fraction > 0.0) || top_fraction > 1.0)
    throw DomainError("EstimateConfig: top_fraction must be in (0, 1]");
}

double EstimateConfig::inlier_area_for(const ImageBounds& b) const {
  return inlier_area > 0.0 ? inlier_area : 3.0 * b.width;
}

std::vector<HomLine> sample_pencil_through(const HomPoint& e,
                                           const ImageBounds& b, int count) {
  if (count < 1) throw DomainError("sample_pencil_through: count < 1");
  std::vector<HomLine> out;
  out.reserve(count);
  const double w = b.width - 1.0, h = b.height - 1.0;

  if (e.is_ideal()) {
    // Parallel lines in the direction of e, stepped across the image.
    Eigen::Vector2d d(e.x(), e.y());
    d.normalize();
    Eigen::Vector2d n(-d.y(), d.x());
    Eigen::Vector2d c(0.5 * w, 0.5 * h);
    double half = 0.5 * std::hypot(w, h);
    for (int i = 0; i < count; ++i) {
      Eigen::Vector2d p = c + (half * (2.0 * (i + 0.5) / count - 1.0)) * n;
      out.emplace_back(-d.y(), d.x(), d.y() * p.x() - d.x() * p.y());
    }
    return out;
  }

  Eigen::Vector2d c = e.dehom();
  double lo = 0.0, span = kPi;
  bool inside =
      c.x() >= 0.0 && c.x() <= w && c.y() >= 0.0 && c.y() <= h;
  if (!inside) {
    // Undirected directions from e to the corners; the visible sub-pencil
    // is the complement of the largest gap on the half-turn circle.
    std::array<double, 4> th;
    const double cx[4] = {0.0, w, w, 0.0};
    const double cy[4] = {0.0, 0.0, h, h};
    for (int i = 0; i < 4; ++i) {
      double a = std::atan2(cy[i] - c.y(), cx[i] - c.x());
      if (a < 0.0) a += kPi;
      if (a >= kPi) a -= kPi;
      th[i] = a;
    }
    std::sort(th.begin(), th.end());
    int cut = 3;
    double biggest = th[0] + kPi - th[3];
    for (int i = 0; i < 3; ++i)
      if (th[i + 1] - th[i] > biggest) {
        biggest = th[i + 1] - th[i];
        cut = i;
      }
    lo = cut == 3 ? th[0] : th[cut + 1];
    span = kPi - biggest;
  }
  for (int i = 0; i < count; ++i) {
    double a = lo + span * (i + 0.5) / count;
    if (a >= kPi) a -= kPi;
    double s = std::sin(a), co = std::cos(a);
    out.emplace_back(-s, co, s * c.x() - co * c.y());
  }
  return out;
}

HomLine bisector_line(const HomPoint& e, const HomLine& la, const HomLine& lb,
                      const ImageBounds& b) {
  if (same_up_to_scale(la, lb, 1e-9))
    throw DegenerateInput("bisector_line: generating lines coincide");
  auto sa = clip_line(la, b), sb = clip_line(lb, b);
  if (!sa || !sb)
    throw DegenerateInput("bisector_line: a generating line misses the image");
  Eigen::Vector2d ma = 0.5 * (sa->a + sa->b), mb = 0.5 * (sb->a + sb->b);

  if (e.is_ideal()) {
    Eigen::Vector2d d(e.x(), e.y());
    d.normalize();
    Eigen::Vector2d p = 0.5 * (ma + mb);
    return HomLine(-d.y(), d.x(), d.y() * p.x() - d.x() * p.y());
  }
  Eigen::Vector2d c = e.dehom();
  Eigen::Vector2d da = la.direction(), db = lb.direction();
  if (da.dot(ma - c) < 0.0) da = -da;
  if (db.dot(mb - c) < 0.0) db = -db;
  Eigen::Vector2d dir = da + db;
  if (dir.norm() < 1e-12)
    throw DegenerateInput("bisector_line: opposed generating directions");
  dir.normalize();
  return HomLine(-dir.y(), dir.x(), dir.y() * c.x() - dir.x() * c.y());
}

namespace {

std::optional<IntensityProfile> gated_profile(const GrayImage& img,
                                              const HomLine& l,
                                              const PencilDefaults& pd,
                                              const ImageBounds& b) {
  auto seg = clip_line(l, b);
  if (!seg || seg->length() < pd.min_chord) return std::nullopt;
  IntensityProfile prof = resample(img, *seg, pd.samples);
  if (texture_score(prof) < pd.min_texture) return std::nullopt;
  return prof;
}

double oriented_cost(const IntensityProfile& a, const IntensityProfile& bp,
                     const StereoParams& sp) {
  double fwd = line_match_cost_only(a, bp, sp);
  double rev =
      line_match_cost_only(std::span<const double>(a.samples),
                           std::span<const double>(bp.samples), sp, true);
  return std::min(fwd, rev);
}

}  // namespace

std::pair<HomLine, double> best_line_through_epipole(
    const HomPoint& e, const IntensityProfile& target, const GrayImage& img,
    const ImageBounds& b, const EstimateConfig& cfg) {
  std::vector<HomLine> lines =
      sample_pencil_through(e, b, cfg.validation_lines);
  HomLine best;
  double best_cost = kInf;
  for (const HomLine& l : lines) {
    auto prof = gated_profile(img, l, cfg.pencil, b);
    if (!prof) continue;
    double c = oriented_cost(target, *prof, cfg.stereo);
    if (c < best_cost) {
      best_cost = c;
      best = l;
    }
  }
  if (!std::isfinite(best_cost))
    throw EmptyPencil("best_line_through_epipole: pencil fully filtered");
  return {best, best_cost};
}

double screen_hypothesis(const Hypothesis& h, const ImageBounds& b,
                         const EstimateConfig& cfg) {
  std::vector<HomLine> lines;
  lines.push_back(h.pair_p.l1);
  if (int(lines.size()) < cfg.screen_lines) lines.push_back(h.pair_q.l1);
  if (int(lines.size()) < cfg.screen_lines) lines.push_back(h.third.first);
  if (int(lines.size()) < cfg.screen_lines) {
    auto extra = sample_pencil_through(h.e1, b,
                                       cfg.screen_lines - int(lines.size()));
    lines.insert(lines.end(), extra.begin(), extra.end());
  }
  double acc = 0.0;
  for (const HomLine& l : lines)
    acc += area_between_lines(l, h.g.map_line(h.h.map_line(l)), b);
  return acc / double(lines.size());
}

double full_validate(const Hypothesis& h, const GrayImage& img1,
                     const GrayImage& img2, const EstimateConfig& cfg) {
  const ImageBounds b1 = img1.bounds(), b2 = img2.bounds();
  std::vector<HomLine> lines =
      sample_pencil_through(h.e1, b1, cfg.validation_lines);
  double acc = 0.0;
  int used = 0;
  for (const HomLine& l : lines) {
    auto p1 = gated_profile(img1, l, cfg.pencil, b1);
    if (!p1) continue;
    auto p2 = gated_profile(img2, h.h.map_line(l), cfg.pencil, b2);
    if (!p2) continue;
    acc += oriented_cost(*p1, *p2, cfg.stereo);
    ++used;
  }
  return used > 0 ? acc / used : kInf;
}

namespace {

struct PipelineCtx {
  const GrayImage& img1;
  const GrayImage& img2;
  ImageBounds b1, b2;
  const EstimateConfig& cfg;
  std::vector<HomPoint> guard1, guard2; // generating points, may be empty
  const std::pair<HomPoint, HomPoint>* r3 = nullptr;
};

bool nearly_parallel(const HomLine& x, const HomLine& y) {
  Eigen::Vector2d nx(x.a(), x.b()), ny(y.a(), y.b());
  double s = std::abs(nx.x() * ny.y() - nx.y() * ny.x()) /
             (nx.norm() * ny.norm());
  return s < std::sin(2.0 * kPi / 180.0);
}

bool epipole_near_points(const HomPoint& e, const std::vector<HomPoint>& pts) {
  if (e.is_ideal()) return false;
  Eigen::Vector2d c = e.dehom();
  for (const HomPoint& p : pts)
    if ((c - p.dehom()).norm() < 1.0) return true;
  return false;
}

double point_line_gap(const HomLine& l, const HomPoint& p) {
  return std::abs(l.normal_form().eval(HomPoint(p.dehom().x(),
                                                p.dehom().y())));
}

enum class Build { ok, rejected, r_degenerate };

Build build_hypothesis(const CandidatePair& cp, const CandidatePair& cq,
                       const PipelineCtx& ctx, std::optional<Hypothesis>& out) {
  out.reset();
  if (nearly_parallel(cp.l1, cq.l1) || nearly_parallel(cp.l2, cq.l2))
    return Build::rejected;
  HomPoint e1, e2;
  try {
    e1 = intersect(cp.l1, cq.l1);
    e2 = intersect(cp.l2, cq.l2);
  } catch (const DegenerateInput&) {
    return Build::rejected;
  }
  if (epipole_near_points(e1, ctx.guard1) ||
      epipole_near_points(e2, ctx.guard2))
    return Build::rejected;

  HomLine l31, l32;
  try {
    if (ctx.r3) {
      const auto& [r1, r2] = *ctx.r3;
      if (point_line_gap(cp.l1, r1) < 1e-9 ||
          point_line_gap(cq.l1, r1) < 1e-9 ||
          point_line_gap(cp.l2, r2) < 1e-9 ||
          point_line_gap(cq.l2, r2) < 1e-9)
        return Build::r_degenerate;
      l31 = line_through(r1, e1);
      l32 = line_through(r2, e2);
    } else {
      l31 = bisector_line(e1, cp.l1, cq.l1, ctx.b1);
      auto prof1 = gated_profile(ctx.img1, l31, ctx.cfg.pencil, ctx.b1);
      if (!prof1) return Build::rejected;
      l32 = best_line_through_epipole(e2, *prof1, ctx.img2, ctx.b2, ctx.cfg)
                .first;
    }
    ProjectiveMap h = line_homography_dlt(
        {LinePair{cp.l1, cp.l2}, LinePair{cq.l1, cq.l2}, LinePair{l31, l32}});

    HomLine g31, g32; // third pair for the reverse fit, image 2 side first
    if (ctx.r3) {
      g32 = l32;
      g31 = l31;
    } else {
      g32 = bisector_line(e2, cp.l2, cq.l2, ctx.b2);
      auto prof2 = gated_profile(ctx.img2, g32, ctx.cfg.pencil, ctx.b2);
      if (!prof2) return Build::rejected;
      g31 = best_line_through_epipole(e1, *prof2, ctx.img1, ctx.b1, ctx.cfg)
                .first;
    }
    ProjectiveMap g = line_homography_dlt(
        {LinePair{cp.l2, cp.l1}, LinePair{cq.l2, cq.l1}, LinePair{g32, g31}});

    out.emplace(Hypothesis{cp, cq, e1, e2, {l31, l32}, h, g, 0.0, {}});
  } catch (const Error&) {
    return Build::rejected;
  }
  return Build::ok;
}

EstimateResult finish_pipeline(const std::vector<CandidatePair>& mp,
                               const std::vector<CandidatePair>& mq,
                               PipelineCtx& ctx, EstimateDiagnostics diag) {
  auto t0 = std::chrono::steady_clock::now();
  struct Combo {
    double cost;
    int ip, iq;
  };
  std::vector<Combo> combos;
  combos.reserve(mp.size() * mq.size());
  for (int i = 0; i < int(mp.size()); ++i)
    for (int j = 0; j < int(mq.size()); ++j)
      combos.push_back(Combo{mp[i].cost + mq[j].cost, i, j});
  std::sort(combos.begin(), combos.end(), [](const Combo& a, const Combo& b) {
    return std::tie(a.cost, a.ip, a.iq) < std::tie(b.cost, b.ip, b.iq);
  });
  if (int(combos.size()) > ctx.cfg.max_hypotheses)
    combos.resize(ctx.cfg.max_hypotheses);

  const int n = int(combos.size());
  std::vector<std::optional<Hypothesis>> hyp(n);
  std::vector<unsigned char> r_deg(n, 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    Build st =
        build_hypothesis(mp[combos[i].ip], mq[combos[i].iq], ctx, hyp[i]);
    if (st == Build::r_degenerate) r_deg[i] = 1;
    if (hyp[i])
      hyp[i]->screen_score = screen_hypothesis(*hyp[i], ctx.b1, ctx.cfg);
  }
  bool any_r_deg = std::find(r_deg.begin(), r_deg.end(), 1) != r_deg.end();

  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    if (!hyp[i]) continue;
    ++diag.hypotheses;
    if (std::isfinite(hyp[i]->screen_score)) order.push_back(i);
  }
  diag.screened = int(order.size());
  diag.hypothesis_ms = ms_since(t0);
  if (order.empty()) {
    if (any_r_deg && diag.hypotheses == 0)
      throw DegenerateInput(
          "three_point_accelerated: r lies on the generating lines");
    throw NoValidHypothesis("estimate: every hypothesis failed screening");
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::make_tuple(hyp[a]->screen_score,
                           hyp[a]->pair_p.cost + hyp[a]->pair_q.cost, a) <
           std::make_tuple(hyp[b]->screen_score,
                           hyp[b]->pair_p.cost + hyp[b]->pair_q.cost, b);
  });
  int finalists = std::max(
      1, int(std::ceil(ctx.cfg.top_fraction * double(order.size()))));
  finalists = std::min(finalists, int(order.size()));

  auto t1 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < finalists; ++k) {
    Hypothesis& h = *hyp[order[k]];
    h.full_score = full_validate(h, ctx.img1, ctx.img2, ctx.cfg);
  }
  diag.validated = finalists;
  diag.validation_ms = ms_since(t1);

  std::vector<int> ranked(order.begin(), order.begin() + finalists);
  std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    return std::make_tuple(*hyp[a]->full_score, a) <
           std::make_tuple(*hyp[b]->full_score, b);
  });
  for (int idx : ranked) {
    if (!std::isfinite(*hyp[idx]->full_score)) break;
    try {
      FundamentalMatrix f = fundamental_from_line_homography(
          hyp[idx]->h, hyp[idx]->e1, hyp[idx]->e2);
      return EstimateResult{std::move(f), std::move(*hyp[idx]), diag};
    } catch (const Error&) {
      continue; // fall through to the next-best validated hypothesis
    }
  }
  throw NoValidHypothesis(
      "estimate: no validated hypothesis produced a usable F");
}

Pencil pencil_at(const HomPoint& center, const GrayImage& img,
                 const EstimateConfig& cfg) {
  PencilSpec s;
  s.center = center;
  s.angles = uniform_angles(cfg.pencil.angle_count);
  s.min_chord = cfg.pencil.min_chord;
  s.min_texture = cfg.pencil.min_texture;
  s.samples = cfg.pencil.samples;
  return pencil_lines(s, img.bounds(), img);
}

EstimateResult point_pair_estimate(const GrayImage& img1,
                                   const GrayImage& img2,
                                   const std::pair<HomPoint, HomPoint>& p,
                                   const std::pair<HomPoint, HomPoint>& q,
                                   const std::pair<HomPoint, HomPoint>* r3,
                                   const EstimateConfig& cfg) {
  cfg.check();
  if ((p.first.dehom() - q.first.dehom()).norm() < 1.0 ||
      (p.second.dehom() - q.second.dehom()).norm() < 1.0)
    throw DegenerateInput("estimate: the two correspondences coincide");
  if (r3) {
    for (const auto* other : {&p, &q})
      if ((r3->first.dehom() - other->first.dehom()).norm() < 1.0 ||
          (r3->second.dehom() - other->second.dehom()).norm() < 1.0)
        throw DegenerateInput("estimate: third correspondence coincides");
  }

  EstimateDiagnostics diag;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<CandidatePair> mp, mq;
  try {
    Pencil pp1 = pencil_at(p.first, img1, cfg);
    Pencil pp2 = pencil_at(p.second, img2, cfg);
    Pencil pq1 = pencil_at(q.first, img1, cfg);
    Pencil pq2 = pencil_at(q.second, img2, cfg);
    mp = mutual_best(score_all(pp1, pp2, cfg.stereo), pp1, pp2, cfg.k_mutual);
    mq = mutual_best(score_all(pq1, pq2, cfg.stereo), pq1, pq2, cfg.k_mutual);
  } catch (const EmptyPencil& ex) {
    throw NoCandidates(std::string("estimate: ") + ex.what());
  }
  if (mp.empty() || mq.empty())
    throw NoCandidates("estimate: no mutual-best candidate pairs");
  diag.candidates1 = int(mp.size());
  diag.candidates2 = int(mq.size());
  diag.candidate_ms = ms_since(t0);

  PipelineCtx ctx{img1,
                  img2,
                  img1.bounds(),
                  img2.bounds(),
                  cfg,
                  {p.first, q.first},
                  {p.second, q.second},
                  r3};
  return finish_pipeline(mp, mq, ctx, diag);
}

}  // namespace

EstimateResult two_point_estimate(const GrayImage& img1, const GrayImage& img2,
                                  const std::pair<HomPoint, HomPoint>& p,
                                  const std::pair<HomPoint, HomPoint>& q,
                                  const EstimateConfig& cfg) {
  return point_pair_estimate(img1, img2, p, q, nullptr, cfg);
}

EstimateResult three_point_accelerated(const GrayImage& img1,
                                       const GrayImage& img2,
                                       const std::pair<HomPoint, HomPoint>& p,
                                       const std::pair<HomPoint, HomPoint>& q,
                                       const std::pair<HomPoint, HomPoint>& r3,
                                       const EstimateConfig& cfg) {
  return point_pair_estimate(img1, img2, p, q, &r3, cfg);
}

EstimateResult line_ransac_estimate(const GrayImage& img1,
                                    const GrayImage& img2,
                                    const EstimateConfig& cfg) {
  cfg.check();
  const ImageBounds b1 = img1.bounds(), b2 = img2.bounds();
  EstimateDiagnostics diag;
  auto t0 = std::chrono::steady_clock::now();

  // Dense line grid: kGridAngles directions x kGridOffsets perpendicular
  // offsets across the image, gated like any pencil line.
  constexpr int kGridAngles = 18;
  constexpr int kGridOffsets = 14;
  auto grid_pencil = [&](const GrayImage& img, const ImageBounds& b) {
    Pencil out;
    const double w = b.width - 1.0, h = b.height - 1.0;
    const double half = 0.5 * std::hypot(w, h);
    int idx = 0;
    for (int ai = 0; ai < kGridAngles; ++ai) {
      double a = kPi * ai / kGridAngles;
      double s = std::sin(a), co = std::cos(a);
      for (int oi = 0; oi < kGridOffsets; ++oi) {
        double t = half * (2.0 * (oi + 0.5) / kGridOffsets - 1.0);
        Eigen::Vector2d p(0.5 * w - t * s, 0.5 * h + t * co);
        HomLine l(-s, co, s * p.x() - co * p.y());
        ++idx;
        auto prof = gated_profile(img, l, cfg.pencil, b);
        if (!prof) continue;
        out.push_back(PencilLine{l, std::move(*prof), a, idx - 1});
      }
    }
    return out;
  };
  Pencil l1 = grid_pencil(img1, b1);
  Pencil l2 = grid_pencil(img2, b2);
  if (l1.empty() || l2.empty())
    throw NoCandidates("line_ransac: no grid lines survived filtering");
  std::vector<CandidatePair> cand =
      mutual_best(score_all(l1, l2, cfg.stereo), l1, l2, cfg.k_mutual);
  if (cand.size() < 2)
    throw NoCandidates("line_ransac: need at least two candidate pairs");
  diag.candidates1 = int(l1.size());
  diag.candidates2 = int(l2.size());
  diag.candidate_ms = ms_since(t0);

  // 1/rank sampling weights over the cost-sorted candidate list.
  std::vector<double> cum(cand.size());
  double total = 0.0;
  for (size_t i = 0; i < cand.size(); ++i) {
    total += 1.0 / double(i + 1);
    cum[i] = total;
  }
  std::mt19937_64 rng(cfg.seed);
  auto draw = [&]() {
    double u = double(rng() >> 11) * 0x1.0p-53 * total;
    return int(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
  };
  std::vector<std::pair<int, int>> trials;
  trials.reserve(cfg.line_trials);
  for (int t = 0; t < cfg.line_trials; ++t) {
    int a = draw(), b = a;
    for (int attempt = 0; attempt < 32 && b == a; ++attempt) b = draw();
    if (b != a) trials.emplace_back(a, b);
  }

  auto t1 = std::chrono::steady_clock::now();
  const double thresh = cfg.inlier_area_for(b2);
  const int n = int(trials.size());
  std::vector<std::optional<Hypothesis>> hyp(n);
  std::vector<int> consensus(n, -1);
  PipelineCtx ctx{img1, img2, b1, b2, cfg, {}, {}, nullptr};
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < n; ++t) {
    build_hypothesis(cand[trials[t].first], cand[trials[t].second], ctx,
                     hyp[t]);
    if (!hyp[t]) continue;
    int votes = 0;
    for (const CandidatePair& c : cand)
      if (area_between_lines(c.l2, hyp[t]->h.map_line(c.l1), b2) < thresh)
        ++votes;
    consensus[t] = votes;
    hyp[t]->screen_score = double(int(cand.size()) - votes);
  }
  std::vector<int> order;
  for (int t = 0; t < n; ++t)
    if (hyp[t]) order.push_back(t);
  diag.hypotheses = int(order.size());
  diag.screened = int(order.size());
  diag.hypothesis_ms = ms_since(t1);
  if (order.empty())
    throw NoValidHypothesis("line_ransac: no trial produced a hypothesis");
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::make_pair(-consensus[a], a) < std::make_pair(-consensus[b], b);
  });
  for (int idx : order) {
    try {
      FundamentalMatrix f = fundamental_from_line_homography(
          hyp[idx]->h, hyp[idx]->e1, hyp[idx]->e2);
      diag.validated = consensus[idx];
      return EstimateResult{std::move(f), std::move(*hyp[idx]), diag};
    } catch (const Error&) {
      continue;
    }
  }
  throw NoValidHypothesis("line_ransac: no hypothesis produced a usable F");
}

}  // namespace epiline
