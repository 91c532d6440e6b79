#include "stableweb/aged_path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stableweb/error.hpp"

namespace stableweb {

namespace {

constexpr double kValueTol = 1e-12;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Feasible s-range of y0 + m (s - u) >= c, intersected into [lo, hi].
bool clip_ge(double u, double y0, double m, double c, double& lo, double& hi) {
  if (m == 0.0) return y0 >= c - kValueTol;
  if (m > 0.0) {
    if (y0 < c - kValueTol) lo = std::max(lo, u + (c - y0) / m);
    return true;
  }
  if (y0 < c - kValueTol) return false;
  hi = std::min(hi, u + (y0 - c) / -m);
  return true;
}

struct Piece {
  double u, v;
  bool closed;
};

// Pieces of [lo, hi] on which both paths are linear. The last piece is closed.
std::vector<Piece> common_pieces(const PiecewisePath& f, const PiecewisePath& g, double lo,
                                 double hi) {
  std::vector<double> knots{lo};
  for (const Segment& s : f.segments())
    if (s.start > lo && s.start < hi) knots.push_back(s.start);
  for (const Segment& s : g.segments())
    if (s.start > lo && s.start < hi) knots.push_back(s.start);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<Piece> out;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const bool last = k + 1 == knots.size();
    out.push_back({knots[k], last ? hi : knots[k + 1], last});
  }
  return out;
}

double slope_at(const PiecewisePath& f, double u) {
  return f.segments()[f.segment_index(u)].slope;
}

}  // namespace

AgedPath::AgedPath(double sigma, PiecewisePath gamma, PiecewisePath age)
    : sigma_(sigma), gamma_(std::move(gamma)), age_(std::move(age)) {
  if (gamma_.empty() || age_.empty()) throw ArgumentError("aged path needs nonempty gamma and age");
  if (gamma_.lo() != age_.lo() || gamma_.hi() != age_.hi())
    throw ArgumentError("gamma and age must share a domain");
  if (!(gamma_.lo() >= sigma_)) throw ArgumentError("domain must start at or after sigma");
}

std::vector<Violation> validate(const AgedPath& p, double tol) {
  std::vector<Violation> out;
  const PiecewisePath& a = p.age();
  const double a0 = a.eval(p.start());
  if (a0 > p.eps0() + tol)
    out.push_back({"(i)", p.start(), "age " + fmt(a0) + " at start exceeds eps0 " + fmt(p.eps0())});

  const auto segs = a.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (segs[k].slope < 1.0 - tol && a.segment_end(k) > segs[k].start)
      out.push_back({"(ii)", segs[k].start, "age slope " + fmt(segs[k].slope) + " below 1"});
    if (k > 0) {
      const double size = segs[k].value - a.segment_end_value(k - 1);
      if (size < -tol) out.push_back({"(ii)", segs[k].start, "age jumps down by " + fmt(-size)});
    }
  }

  const auto gj = jumps(p.gamma(), 0.0);
  const auto aj = jumps(a, 0.0);
  std::size_t i = 0, j = 0;
  while (i < gj.size() && j < aj.size()) {
    const double d = gj[i].time - aj[j].time;
    if (std::fabs(d) <= kBreakpointTol * std::max(1.0, std::fabs(gj[i].time))) {
      out.push_back({"(iii)", gj[i].time, "gamma and age jump together"});
      ++i;
      ++j;
    } else if (d < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

std::optional<double> birth_window_h(const AgedPath& p, double t, double threshold) {
  if (!(t >= 1.0)) throw ArgumentError("birth window needs t >= 1, got " + fmt(t));
  if (!(threshold > 0.0)) throw ArgumentError("birth window threshold must be positive");
  if (t > p.horizon() + kBreakpointTol * std::max(1.0, t))
    throw ArgumentError("t = " + fmt(t) + " beyond horizon " + fmt(p.horizon()));
  t = std::min(t, p.horizon());
  const double lo = std::max(-t, p.start());
  if (lo > t) return std::nullopt;
  const PiecewisePath& g = p.gamma();
  const PiecewisePath& a = p.age();
  for (const Piece& pc : common_pieces(g, a, lo, t)) {
    double l = pc.u, h = pc.v;
    const double g0 = g.eval(pc.u), gm = slope_at(g, pc.u);
    const double a0 = a.eval(pc.u), am = slope_at(a, pc.u);
    if (!clip_ge(pc.u, g0, gm, -t, l, h)) continue;
    if (!clip_ge(pc.u, -g0, -gm, -t, l, h)) continue;
    if (!clip_ge(pc.u, a0, am, threshold, l, h)) continue;
    if (l > h) continue;
    if (l < pc.v || pc.closed) return l;
  }
  return std::nullopt;
}

std::optional<double> birth_window(const AgedPath& p, double t) {
  if (!(t >= 1.0)) throw ArgumentError("birth window needs t >= 1, got " + fmt(t));
  return birth_window_h(p, t, std::exp2(-t));
}

std::optional<TruncatedPath> project_h(const AgedPath& p, double t, double threshold) {
  const auto b = birth_window_h(p, t, threshold);
  if (!b) return std::nullopt;
  t = std::min(t, p.horizon());
  TruncatedPath tp;
  tp.b = *b;
  tp.t = t;
  tp.gamma = restrict_closed(p.gamma(), *b, t);
  tp.age = restrict_closed(p.age(), *b, t);
  return tp;
}

std::optional<TruncatedPath> project(const AgedPath& p, double t) {
  if (!(t >= 1.0)) throw ArgumentError("projection needs t >= 1, got " + fmt(t));
  return project_h(p, t, std::exp2(-t));
}

std::pair<PiecewisePath, PiecewisePath> canonical_extension(const TruncatedPath& tp) {
  if (tp.gamma.empty()) throw ArgumentError("canonical extension of an empty projection");
  const double lo = -(tp.t + 1.0), hi = tp.t + 1.0;
  return {extend_linear(tp.gamma, tp.b, tp.t, lo, hi, 0.0, 0.0),
          extend_linear(tp.age, tp.b, tp.t, lo, hi, 1.0, 1.0)};
}

std::optional<double> first_age_time(const AgedPath& p, double level) {
  if (!(level > 0.0)) throw ArgumentError("age level must be positive");
  const PiecewisePath& a = p.age();
  const auto segs = a.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const bool last = k + 1 == segs.size();
    double l = segs[k].start, h = a.segment_end(k);
    if (!clip_ge(segs[k].start, segs[k].value, segs[k].slope, level, l, h)) continue;
    if (l > h) continue;
    if (l < a.segment_end(k) || last) return l;
  }
  return std::nullopt;
}

}  // namespace stableweb
