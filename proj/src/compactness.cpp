#include "stableweb/compactness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stableweb/error.hpp"
#include "stableweb/parallel.hpp"

namespace stableweb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t grid_index(const std::vector<double>& grid, double t) {
  auto it = std::upper_bound(grid.begin(), grid.end(), t + 1e-12);
  if (it == grid.begin()) return 0;
  return static_cast<std::size_t>(it - grid.begin()) - 1;
}

// Jumps of a projection including one sitting exactly at b, which the restriction to
// [b, t] hides; the source path still has it.
std::vector<Jump> window_jumps(const TruncatedPath& tp, const PathCollection& G, bool gamma,
                               double min_size) {
  const PiecewisePath& f = gamma ? tp.gamma : tp.age;
  std::vector<Jump> out;
  if (tp.source != kNoSource && tp.source < G.size()) {
    const AgedPath& p = G.paths()[tp.source];
    const PiecewisePath& full = gamma ? p.gamma() : p.age();
    if (tp.b > full.lo()) {
      const double size = full.eval(tp.b) - full.eval_left(tp.b);
      if (std::fabs(size) > kBreakpointTol && std::fabs(size) >= min_size)
        out.push_back({tp.b, size});
    }
  }
  for (const Jump& j : jumps(f, min_size)) out.push_back(j);
  return out;
}

double closest_pair(const std::vector<Jump>& a, const std::vector<Jump>& b) {
  double best = kInf;
  std::size_t j = 0;
  for (const Jump& x : a) {
    while (j + 1 < b.size() && b[j + 1].time <= x.time) ++j;
    for (std::size_t k = j; k < b.size() && k <= j + 1; ++k)
      best = std::min(best, std::fabs(x.time - b[k].time));
  }
  return best;
}

// inf |gamma(s)| over s with age(s) in the open window (lo, hi).
double witness_cost(const AgedPath& p, double lo, double hi) {
  const PiecewisePath& g = p.gamma();
  const PiecewisePath& a = p.age();
  std::vector<double> knots;
  for (const Segment& s : g.segments()) knots.push_back(s.start);
  for (const Segment& s : a.segments()) knots.push_back(s.start);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  double best = kInf;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const double u = knots[k];
    const double v = k + 1 < knots.size() ? knots[k + 1] : p.horizon();
    const auto& as = a.segments()[a.segment_index(u)];
    const auto& gs = g.segments()[g.segment_index(u)];
    const double a0 = as.value + as.slope * (u - as.start);
    const double g0 = gs.value + gs.slope * (u - gs.start);
    double l = u, h = v;
    if (as.slope == 0.0) {
      if (!(a0 > lo && a0 < hi)) continue;
    } else {
      double s1 = u + (lo - a0) / as.slope, s2 = u + (hi - a0) / as.slope;
      if (s1 > s2) std::swap(s1, s2);
      l = std::max(l, s1);
      h = std::min(h, s2);
    }
    const bool point_piece = u == v;
    if (!(l < h) && !(point_piece && l <= h)) continue;
    const double gl = g0 + gs.slope * (l - u), gh = g0 + gs.slope * (h - u);
    best = std::min(best, (gl <= 0.0 && gh >= 0.0) || (gl >= 0.0 && gh <= 0.0)
                              ? 0.0
                              : std::min(std::fabs(gl), std::fabs(gh)));
  }
  return best;
}

double upper_quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = std::ceil(q * static_cast<double>(xs.size()) - 1e-9);
  const std::size_t idx = std::min(xs.size() - 1, static_cast<std::size_t>(std::max(1.0, pos)) - 1);
  return xs[idx];
}

}  // namespace

double Budget::M_at(double tt) const {
  if (t.empty()) throw ArgumentError("empty budget");
  return M[grid_index(t, tt)];
}

double Budget::delta_at(double tt, int n) const {
  if (t.empty()) throw ArgumentError("empty budget");
  if (n < 1 || n > n_max()) throw ArgumentError("budget has no delta for n = " + std::to_string(n));
  return delta[grid_index(t, tt)][static_cast<std::size_t>(n - 1)];
}

void Budget::check() const {
  if (t.empty() || M.size() != t.size() || delta.size() != t.size())
    throw ArgumentError("budget arrays must be nonempty and of equal length");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0 && !(t[k] > t[k - 1])) throw ArgumentError("budget t grid must increase");
    if (!(M[k] >= 1.0)) throw ArgumentError("budget M must be >= 1");
    if (k > 0 && M[k] < M[k - 1]) throw ArgumentError("budget M must be nondecreasing in t");
    if (delta[k].size() != delta[0].size() || delta[k].empty())
      throw ArgumentError("budget delta rows must share a nonzero length");
    for (std::size_t n = 0; n < delta[k].size(); ++n) {
      if (!(delta[k][n] > 0.0)) throw ArgumentError("budget delta entries must be positive");
      if (n > 0 && delta[k][n] > delta[k][n - 1])
        throw ArgumentError("budget delta must be nonincreasing in n");
      if (k > 0 && delta[k][n] < delta[k - 1][n])
        throw ArgumentError("budget delta must be nondecreasing in t");
    }
  }
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

double age_grid_step(const PathCollection& G) {
  double e = 0.0;
  for (const AgedPath& p : G.paths()) e = std::max(e, p.eps0());
  return 2.0 * e;
}

ConditionStats condition_stats(const PathCollection& G, double t, int n_max) {
  if (n_max < 1) throw ArgumentError("n_max must be >= 1");
  ConditionStats st;
  st.t = t;
  st.modulus.assign(static_cast<std::size_t>(n_max), 0.0);
  st.separation.assign(static_cast<std::size_t>(n_max), kInf);

  std::vector<TruncatedPath> all;
  for (std::size_t i = 0; i < G.size(); ++i)
    if (auto tp = project(G.paths()[i], t)) {
      tp->source = i;
      all.push_back(std::move(*tp));
    }
  const std::vector<TruncatedPath> top = maximal_elements(all);
  st.count = top.size();

  const double lo_w = std::exp2(-2.0 * t), hi_w = std::exp2(-1.5 * t);
  st.witness_resolvable = age_grid_step(G) <= hi_w - lo_w;

  for (const TruncatedPath& tp : top) {
    const Extrema g = tp.gamma.extrema(tp.b, tp.t);
    const Extrema a = tp.age.extrema(tp.b, tp.t);
    st.bound = std::max({st.bound, std::fabs(g.min), std::fabs(g.max), a.max});

    const auto [gx, ax] = canonical_extension(tp);
    const Interval I{-(t + 1.0), t + 1.0};
    for (int n = 1; n <= n_max; ++n) {
      const double d = std::exp2(-n);
      auto& m = st.modulus[static_cast<std::size_t>(n - 1)];
      m = std::max({m, oscillation(gx, d, I), oscillation(ax, d, I)});

      const auto gj = window_jumps(tp, G, true, d);
      auto aj = window_jumps(tp, G, false, d);
      aj.erase(std::remove_if(aj.begin(), aj.end(), [](const Jump& j) { return j.size < 0; }),
               aj.end());
      auto& sep = st.separation[static_cast<std::size_t>(n - 1)];
      sep = std::min(sep, closest_pair(gj, aj));
    }

    // witnesses: any path in G with the same projection, not only maximal ones
    double best = kInf;
    for (const TruncatedPath& other : all) {
      if (std::fabs(other.b - tp.b) > kBreakpointTol * std::max(1.0, std::fabs(tp.b))) continue;
      if (other.source != tp.source && !agrees_on(tp, other)) continue;
      best = std::min(best, witness_cost(G.paths()[other.source], lo_w, hi_w));
    }
    st.witness = std::max(st.witness, best);
  }
  return st;
}

bool passes_A(const ConditionStats& s, const Budget& B) {
  return static_cast<double>(s.count) <= B.M_at(s.t);
}

bool passes_B(const ConditionStats& s, const Budget& B) { return s.bound <= B.M_at(s.t); }

bool passes_C(const ConditionStats& s, const Budget& B, int n_max) {
  for (int n = 1; n <= n_max; ++n)
    if (s.modulus.at(static_cast<std::size_t>(n - 1)) > B.delta_at(s.t, n)) return false;
  return true;
}

bool passes_D(const ConditionStats& s, const Budget& B, int n_max) {
  for (int n = 1; n <= n_max; ++n)
    if (s.separation.at(static_cast<std::size_t>(n - 1)) < B.delta_at(s.t, n)) return false;
  return true;
}

Verdict verdict_E(const ConditionStats& s, const Budget& B) {
  if (!s.witness_resolvable) return Verdict::inconclusive;
  return s.witness <= B.M_at(s.t) ? Verdict::pass : Verdict::fail;
}

bool check_A(const PathCollection& G, const Budget& B, double t) {
  return static_cast<double>(project_collection(G, t).size()) <= B.M_at(t);
}

bool check_B(const PathCollection& G, const Budget& B, double t) {
  const double M = B.M_at(t);
  for (const TruncatedPath& tp : project_collection(G, t)) {
    const Extrema g = tp.gamma.extrema(tp.b, tp.t);
    const Extrema a = tp.age.extrema(tp.b, tp.t);
    if (std::fabs(g.min) > M || std::fabs(g.max) > M || a.max > M) return false;
  }
  return true;
}

bool check_C(const PathCollection& G, const Budget& B, double t, int n_max) {
  return passes_C(condition_stats(G, t, n_max), B, n_max);
}

bool check_D(const PathCollection& G, const Budget& B, double t, int n_max) {
  return passes_D(condition_stats(G, t, n_max), B, n_max);
}

Verdict check_E(const PathCollection& G, const Budget& B, double t) {
  return verdict_E(condition_stats(G, t, 1), B);
}

std::vector<double> default_t_grid() {
  const double nudge = (std::sqrt(2.0) - 1.0) * 1e-3;
  return {1.0 + nudge, 1.5 + nudge, 2.0 + nudge, 2.5 + nudge, 3.0 + nudge};
}

bool sample_passes(const std::vector<ConditionStats>& per_t, const Budget& B) {
  const int n_max = B.n_max();
  for (const ConditionStats& s : per_t)
    if (!passes_A(s, B) || !passes_B(s, B) || !passes_C(s, B, n_max) || !passes_D(s, B, n_max) ||
        verdict_E(s, B) == Verdict::fail)
      return false;
  return true;
}

std::vector<std::vector<ConditionStats>> collect_stats(const std::vector<PathCollection>& samples,
                                                       const std::vector<double>& t_grid,
                                                       int n_max) {
  std::vector<std::vector<ConditionStats>> stats(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    for (double t : t_grid) stats[i].push_back(condition_stats(samples[i], t, n_max));
  });
  return stats;
}

CalibrationReport evaluate_budget(const std::vector<std::vector<ConditionStats>>& stats,
                                  const Budget& B) {
  CalibrationReport rep;
  rep.budget = B;
  if (stats.empty()) return rep;
  const int n_max = B.n_max();
  const std::size_t T = stats.front().size();
  const double n = static_cast<double>(stats.size());
  std::size_t passed = 0;
  for (const auto& per_t : stats) passed += sample_passes(per_t, B) ? 1 : 0;
  rep.pass_rate = static_cast<double>(passed) / n;
  for (std::size_t k = 0; k < T; ++k) {
    std::size_t fa = 0, fb = 0, fc = 0, fd = 0, fe = 0, fi = 0;
    for (const auto& per_t : stats) {
      const ConditionStats& s = per_t[k];
      fa += passes_A(s, B) ? 0 : 1;
      fb += passes_B(s, B) ? 0 : 1;
      fc += passes_C(s, B, n_max) ? 0 : 1;
      fd += passes_D(s, B, n_max) ? 0 : 1;
      const Verdict e = verdict_E(s, B);
      fe += e == Verdict::fail ? 1 : 0;
      fi += e == Verdict::inconclusive ? 1 : 0;
    }
    const double t = stats.front()[k].t;
    rep.fail_rates.push_back({t, "A", fa / n});
    rep.fail_rates.push_back({t, "B", fb / n});
    rep.fail_rates.push_back({t, "C", fc / n});
    rep.fail_rates.push_back({t, "D", fd / n});
    rep.fail_rates.push_back({t, "E", fe / n});
    rep.fail_rates.push_back({t, "E_inconclusive", fi / n});
  }
  return rep;
}

CalibrationReport calibrate_stats(const std::vector<std::vector<ConditionStats>>& stats,
                                  double eps, const std::vector<double>& t_grid, int n_max) {
  if (stats.empty()) throw ArgumentError("calibration needs at least one sample");
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("eps must lie in (0, 1)");
  if (t_grid.empty()) throw ArgumentError("calibration needs a nonempty t grid");
  const std::size_t T = t_grid.size();

  auto budget_at = [&](double q) {
    Budget B;
    B.t = t_grid;
    B.M.assign(T, 1.0);
    B.delta.assign(T, std::vector<double>(static_cast<std::size_t>(n_max), 0.0));
    for (std::size_t k = 0; k < T; ++k) {
      std::vector<double> cnt, bnd, wit;
      for (const auto& per_t : stats) {
        cnt.push_back(static_cast<double>(per_t[k].count));
        bnd.push_back(per_t[k].bound);
        if (std::isfinite(per_t[k].witness)) wit.push_back(per_t[k].witness);
      }
      double M = std::max({1.0, upper_quantile(cnt, q), upper_quantile(bnd, q)});
      if (!wit.empty()) M = std::max(M, upper_quantile(wit, q));
      B.M[k] = M;
      for (int n = 1; n <= n_max; ++n) {
        std::vector<double> mod;
        for (const auto& per_t : stats) mod.push_back(per_t[k].modulus[static_cast<std::size_t>(n - 1)]);
        B.delta[k][static_cast<std::size_t>(n - 1)] = std::max(1e-9, upper_quantile(mod, q));
      }
    }
    // monotone envelopes only ever enlarge entries
    for (std::size_t k = 1; k < T; ++k) B.M[k] = std::max(B.M[k], B.M[k - 1]);
    for (std::size_t k = 0; k < T; ++k)
      for (std::size_t n = static_cast<std::size_t>(n_max) - 1; n-- > 0;)
        B.delta[k][n] = std::max(B.delta[k][n], B.delta[k][n + 1]);
    for (std::size_t k = 1; k < T; ++k)
      for (std::size_t n = 0; n < static_cast<std::size_t>(n_max); ++n)
        B.delta[k][n] = std::max(B.delta[k][n], B.delta[k - 1][n]);
    return B;
  };

  // the proof splits eps over five conditions; start there and tighten until enough
  // whole samples pass
  double q = 1.0 - eps / 5.0;
  CalibrationReport best;
  for (int iter = 0; iter < 64; ++iter) {
    CalibrationReport rep = evaluate_budget(stats, budget_at(q));
    rep.quantile_level = q;
    if (rep.pass_rate >= 1.0 - eps) return rep;
    if (rep.pass_rate > best.pass_rate || iter == 0) best = rep;
    if (q >= 1.0) break;
    q = std::min(1.0, q + (1.0 - q) / 2.0);
    if (1.0 - q < 0.5 / static_cast<double>(stats.size())) q = 1.0;
  }
  throw CalibrationError("no budget reaches pass rate " + std::to_string(1.0 - eps) +
                             "; best " + std::to_string(best.pass_rate),
                         best);
}

CalibrationReport calibrate(const std::vector<PathCollection>& samples, double eps,
                            const std::vector<double>& t_grid, int n_max) {
  if (samples.empty()) throw ArgumentError("calibration needs at least one sample");
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("eps must lie in (0, 1)");
  for (const PathCollection& G : samples)
    if (t_grid.empty() || t_grid.back() > G.horizon() + 1e-12)
      throw ArgumentError("t grid reaches beyond a sample horizon");
  return calibrate_stats(collect_stats(samples, t_grid, n_max), eps, t_grid, n_max);
}

}  // namespace stableweb
