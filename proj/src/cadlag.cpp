#include "stableweb/cadlag.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "stableweb/error.hpp"

namespace stableweb {

namespace {

double scaled_tol(double a, double b) {
  return kBreakpointTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Range-min / range-max over a fixed array, O(1) queries after O(n log n) setup.
class SparseRange {
 public:
  SparseRange(const std::vector<double>& lo_vals, const std::vector<double>& hi_vals) {
    const std::size_t n = lo_vals.size();
    std::size_t levels = 1;
    while ((std::size_t{1} << levels) <= n) ++levels;
    mins_.assign(levels, {});
    maxs_.assign(levels, {});
    mins_[0] = lo_vals;
    maxs_[0] = hi_vals;
    for (std::size_t k = 1; k < levels; ++k) {
      const std::size_t span = std::size_t{1} << k;
      const std::size_t half = span >> 1;
      if (span > n) break;
      mins_[k].resize(n - span + 1);
      maxs_[k].resize(n - span + 1);
      for (std::size_t i = 0; i + span <= n; ++i) {
        mins_[k][i] = std::min(mins_[k - 1][i], mins_[k - 1][i + half]);
        maxs_[k][i] = std::max(maxs_[k - 1][i], maxs_[k - 1][i + half]);
      }
    }
  }

  // Inclusive [i, j].
  Extrema query(std::size_t i, std::size_t j) const {
    const std::size_t len = j - i + 1;
    std::size_t k = 0;
    while ((std::size_t{2} << k) <= len) ++k;
    const std::size_t j2 = j + 1 - (std::size_t{1} << k);
    return {std::min(mins_[k][i], mins_[k][j2]), std::max(maxs_[k][i], maxs_[k][j2])};
  }

  double range(std::size_t i, std::size_t j) const {
    const Extrema e = query(i, j);
    return e.max - e.min;
  }

 private:
  std::vector<std::vector<double>> mins_;
  std::vector<std::vector<double>> maxs_;
};

// Result of one feasibility pass: max cell cost of the partition found.
using Witness = std::optional<double>;

// Step functions. Pieces are [x_k, x_{k+1}) with constant value v_k; the last piece
// ends at hi where the value is v_hi. A boundary may sit anywhere, so for each piece we
// track the earliest position a partition with cell cost <= theta can place one.
class StepModulus {
 public:
  StepModulus(std::vector<double> x, std::vector<double> v, double v_hi, double hi, double delta,
              double eps)
      : x_(std::move(x)), v_(std::move(v)), v_hi_(v_hi), hi_(hi), delta_(delta), eps_(eps),
        table_(v_, v_) {
    closed_.resize(v_.size());
    double mn = v_hi_, mx = v_hi_;
    for (std::size_t i = v_.size(); i-- > 0;) {
      mn = std::min(mn, v_[i]);
      mx = std::max(mx, v_[i]);
      closed_[i] = mx - mn;
    }
  }

  double whole() const { return closed_[0]; }

  // Every cell cost is a difference of two piece values, so the optimum is one of these.
  // Empty when there are too many distinct values to list them cheaply.
  std::vector<double> candidates() const {
    std::vector<double> vals(v_);
    vals.push_back(v_hi_);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.size() > 512) return {};
    std::vector<double> d;
    d.reserve(vals.size() * (vals.size() - 1) / 2);
    for (std::size_t a = 0; a < vals.size(); ++a)
      for (std::size_t b = a + 1; b < vals.size(); ++b) d.push_back(vals[b] - vals[a]);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    return d;
  }

  Witness feasible(double theta) const {
    const std::size_t P = x_.size();
    std::vector<double> E(P, 0.0);
    std::vector<double> cost(P, 0.0);
    std::vector<std::size_t> reach;
    reach.reserve(P);
    E[0] = x_[0];
    reach.push_back(0);

    // s_min(j) is nondecreasing in j, and so are both lookups below: sweep with pointers
    std::vector<std::size_t> smin(P);
    for (std::size_t j = 0, i = 0; j < P; ++j) {
      while (table_.range(i, j) > theta) ++i;
      smin[j] = i;
    }
    std::size_t at_jump = 0, inside = 0;  // positions in `reach`
    auto first_reach_from = [&](std::size_t& ptr, std::size_t s) -> std::optional<std::size_t> {
      while (ptr < reach.size() && reach[ptr] < s) ++ptr;
      if (ptr == reach.size()) return std::nullopt;
      return reach[ptr];
    };

    for (std::size_t j = 1; j < P; ++j) {
      // boundary exactly at the jump x_j: cell covers pieces i..j-1
      if (auto i = first_reach_from(at_jump, smin[j - 1]); i && E[*i] + delta_ <= x_[j] + eps_) {
        E[j] = x_[j];
        cost[j] = std::max(cost[*i], table_.range(*i, j - 1));
        reach.push_back(j);
        continue;
      }
      // boundary strictly inside piece j: cell covers pieces i..j
      const double next = j + 1 < P ? x_[j + 1] : hi_;
      if (auto i = first_reach_from(inside, smin[j])) {
        const double u = E[*i] + delta_;
        if (u > x_[j] && u < next - eps_) {
          E[j] = u;
          cost[j] = std::max(cost[*i], table_.range(*i, j));
          reach.push_back(j);
        }
      }
    }

    // last cell is closed and must reach hi
    std::size_t sc = P;
    {
      std::size_t lo = 0, hi = P;  // smallest i with closed_[i] <= theta
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (closed_[mid] <= theta)
          hi = mid;
        else
          lo = mid + 1;
      }
      sc = lo;
    }
    if (sc >= P) return std::nullopt;
    auto it = std::lower_bound(reach.begin(), reach.end(), sc);
    if (it == reach.end()) return std::nullopt;
    const std::size_t i = *it;
    if (E[i] + delta_ > hi_ + eps_) return std::nullopt;
    return std::max(cost[i], closed_[i]);
  }

 private:
  std::vector<double> x_;
  std::vector<double> v_;
  double v_hi_;
  double hi_;
  double delta_;
  double eps_;
  SparseRange table_;
  std::vector<double> closed_;
};

// Functions with sloped pieces: boundaries restricted to a candidate grid that contains
// every breakpoint, so each elementary interval is linear and its range is exact.
class GridModulus {
 public:
  GridModulus(const PiecewisePath& f, Interval I, double delta, double eps)
      : delta_(delta), eps_(eps) {
    const double len = I.length();
    std::vector<double> c;
    const double h = std::max(delta / 8.0, len / 65536.0);
    const auto n_uniform = static_cast<std::size_t>(std::floor(len / h));
    c.reserve(n_uniform + f.size() + static_cast<std::size_t>(len / delta) + 4);
    for (std::size_t k = 0; k <= n_uniform; ++k) c.push_back(I.lo + static_cast<double>(k) * h);
    for (double k = 0.0;; k += 1.0) {
      const double u = I.lo + k * delta;
      if (u > I.hi) break;
      c.push_back(u);
    }
    for (const Segment& s : f.segments())
      if (s.start > I.lo && s.start < I.hi) c.push_back(s.start);
    c.push_back(I.hi);
    std::sort(c.begin(), c.end());
    std::vector<double> pts;
    pts.reserve(c.size());
    for (double u : c) {
      if (u < I.lo || u > I.hi) continue;
      if (!pts.empty() && u - pts.back() <= eps_) continue;
      pts.push_back(u);
    }
    if (pts.back() < I.hi) pts.back() = I.hi;
    c_ = std::move(pts);

    const std::size_t m = c_.size() - 1;  // elementary intervals
    std::vector<double> mins(m), maxs(m);
    for (std::size_t l = 0; l < m; ++l) {
      const double a = f.eval(c_[l]);
      const double b = f.eval_left(c_[l + 1]);
      mins[l] = std::min(a, b);
      maxs[l] = std::max(a, b);
    }
    table_.emplace(mins, maxs);
    f_hi_ = f.eval(I.hi);
  }

  double cell(std::size_t i, std::size_t j, bool closed) const {
    Extrema e = table_->query(i, j - 1);
    if (closed) {
      e.min = std::min(e.min, f_hi_);
      e.max = std::max(e.max, f_hi_);
    }
    return e.max - e.min;
  }

  double whole() const { return cell(0, c_.size() - 1, true); }

  Witness feasible(double theta) const {
    const std::size_t K = c_.size();
    std::vector<std::size_t> reach;
    std::vector<double> cost(K, 0.0);
    reach.push_back(0);
    // reach is sorted by position and the queries increase, so one pointer suffices
    std::size_t ptr = 0;  // count of reach entries at or before the last query
    auto latest_before = [&](double u) -> std::optional<std::size_t> {
      while (ptr < reach.size() && c_[reach[ptr]] <= u + eps_) ++ptr;
      if (ptr == 0) return std::nullopt;
      return reach[ptr - 1];
    };
    for (std::size_t j = 1; j + 1 < K; ++j) {
      auto i = latest_before(c_[j] - delta_);
      if (!i) continue;
      const double cc = cell(*i, j, false);
      if (cc <= theta) {
        cost[j] = std::max(cost[*i], cc);
        reach.push_back(j);
      }
    }
    auto i = latest_before(c_[K - 1] - delta_);
    if (!i) return std::nullopt;
    const double cc = cell(*i, K - 1, true);
    if (cc > theta) return std::nullopt;
    return std::max(cost[*i], cc);
  }

 private:
  double delta_;
  double eps_;
  std::vector<double> c_;
  std::optional<SparseRange> table_;
  double f_hi_ = 0.0;
};

template <class Model>
double minimise_cost(const Model& model) {
  if (model.feasible(0.0)) return 0.0;
  if constexpr (requires { model.candidates(); }) {
    const std::vector<double> c = model.candidates();
    if (!c.empty()) {
      // smallest feasible candidate; the largest one is the whole range, always feasible
      std::size_t lo = 0, hi = c.size() - 1;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (model.feasible(c[mid]))
          hi = mid;
        else
          lo = mid + 1;
      }
      if (Witness w = model.feasible(c[lo])) return *w;
    }
  }
  double lo = 0.0;
  Witness top = model.feasible(model.whole());
  if (!top) throw ArgumentError("oscillation: interval shorter than delta");
  double hi = *top;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (Witness w = model.feasible(mid))
      hi = std::min(*w, mid);
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

PiecewisePath::PiecewisePath(double lo, double hi, std::vector<Segment> segments)
    : lo_(lo), hi_(hi), segments_(std::move(segments)) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi)
    throw ArgumentError("path domain must be a finite interval with lo <= hi");
  if (segments_.empty()) throw ArgumentError("path needs at least one segment");
  if (segments_.front().start != lo)
    throw ArgumentError("first segment must start at lo = " + fmt(lo));
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const Segment& s = segments_[k];
    if (!std::isfinite(s.value) || !std::isfinite(s.slope) || !std::isfinite(s.start))
      throw ArgumentError("non-finite segment data");
    if (k > 0 && !(s.start > segments_[k - 1].start))
      throw ArgumentError("segment starts must increase strictly (at " + fmt(s.start) + ")");
    if (s.start > hi) throw ArgumentError("segment start " + fmt(s.start) + " beyond hi");
  }
}

PiecewisePath PiecewisePath::constant(double lo, double hi, double value) {
  return PiecewisePath(lo, hi, {{lo, value, 0.0}});
}

PiecewisePath PiecewisePath::linear(double lo, double hi, double value_at_lo, double slope) {
  return PiecewisePath(lo, hi, {{lo, value_at_lo, slope}});
}

PiecewisePath PiecewisePath::step(double lo, double hi, std::span<const double> times,
                                  std::span<const double> values) {
  if (times.size() != values.size() || times.empty())
    throw ArgumentError("step: times and values must be nonempty and of equal length");
  std::vector<Segment> segs;
  segs.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) segs.push_back({times[k], values[k], 0.0});
  return PiecewisePath(lo, hi, std::move(segs));
}

std::size_t PiecewisePath::segment_index(double s) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const Segment& seg) { return v < seg.start; });
  if (it == segments_.begin()) return 0;
  return static_cast<std::size_t>(it - segments_.begin()) - 1;
}

double PiecewisePath::segment_end(std::size_t k) const {
  return k + 1 < segments_.size() ? segments_[k + 1].start : hi_;
}

double PiecewisePath::segment_end_value(std::size_t k) const {
  const Segment& s = segments_[k];
  return s.value + s.slope * (segment_end(k) - s.start);
}

double PiecewisePath::eval(double s) const {
  if (empty()) throw DomainError("eval on empty path");
  const double tol = scaled_tol(lo_, hi_);
  if (!(s >= lo_ - tol && s <= hi_ + tol))
    throw DomainError("eval at " + fmt(s) + " outside [" + fmt(lo_) + ", " + fmt(hi_) + "]");
  s = std::clamp(s, lo_, hi_);
  const Segment& seg = segments_[segment_index(s)];
  return seg.value + seg.slope * (s - seg.start);
}

double PiecewisePath::eval_left(double s) const {
  if (empty()) throw DomainError("eval_left on empty path");
  const double tol = scaled_tol(lo_, hi_);
  if (!(s >= lo_ - tol && s <= hi_ + tol))
    throw DomainError("eval_left at " + fmt(s) + " outside [" + fmt(lo_) + ", " + fmt(hi_) + "]");
  s = std::clamp(s, lo_, hi_);
  if (s <= lo_) return segments_.front().value;
  auto it = std::lower_bound(segments_.begin(), segments_.end(), s,
                             [](const Segment& seg, double v) { return seg.start < v; });
  const Segment& seg = *(it - 1);
  return seg.value + seg.slope * (s - seg.start);
}

bool PiecewisePath::is_step() const {
  return std::all_of(segments_.begin(), segments_.end(),
                     [](const Segment& s) { return s.slope == 0.0; });
}

double PiecewisePath::max_abs_slope() const {
  double m = 0.0;
  for (const Segment& s : segments_) m = std::max(m, std::fabs(s.slope));
  return m;
}

Extrema PiecewisePath::extrema(double c, double d) const {
  if (empty()) throw DomainError("extrema on empty path");
  const double tol = scaled_tol(lo_, hi_);
  if (c > d || c < lo_ - tol || d > hi_ + tol)
    throw ArgumentError("extrema: [" + fmt(c) + ", " + fmt(d) + "] not inside the domain");
  c = std::clamp(c, lo_, hi_);
  d = std::clamp(d, lo_, hi_);
  Extrema out{eval(c), eval(c)};
  auto take = [&](double v) {
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
  };
  for (std::size_t k = segment_index(c); k < segments_.size(); ++k) {
    const Segment& s = segments_[k];
    if (s.start > d) break;
    const double end = segment_end(k);
    const bool last = k + 1 == segments_.size();
    if (end < c || (end <= c && !last)) continue;
    const double x0 = std::max(c, s.start);
    const double x1 = std::min(d, end);
    take(s.value + s.slope * (x0 - s.start));
    take(s.value + s.slope * (x1 - s.start));
  }
  return out;
}

bool PiecewisePath::same_as(const PiecewisePath& other, double tol) const {
  if (segments_.size() != other.segments_.size()) return false;
  if (std::fabs(lo_ - other.lo_) > tol || std::fabs(hi_ - other.hi_) > tol) return false;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const Segment& a = segments_[k];
    const Segment& b = other.segments_[k];
    if (std::fabs(a.start - b.start) > tol || std::fabs(a.value - b.value) > tol ||
        std::fabs(a.slope - b.slope) > tol)
      return false;
  }
  return true;
}

PiecewisePath restrict_closed(const PiecewisePath& f, double c, double d) {
  if (f.empty()) throw ArgumentError("restrict: empty path");
  const double tol = scaled_tol(f.lo(), f.hi());
  if (!(c <= d) || c < f.lo() - tol || d > f.hi() + tol)
    throw ArgumentError("restrict: [" + fmt(c) + ", " + fmt(d) + "] not inside [" + fmt(f.lo()) +
                        ", " + fmt(f.hi()) + "]");
  c = std::clamp(c, f.lo(), f.hi());
  d = std::clamp(d, f.lo(), f.hi());
  const auto segs = f.segments();
  const std::size_t k0 = f.segment_index(c);
  std::vector<Segment> out;
  out.push_back({c, f.eval(c), segs[k0].slope});
  for (std::size_t k = k0 + 1; k < segs.size() && segs[k].start <= d; ++k) out.push_back(segs[k]);
  return PiecewisePath(c, d, std::move(out));
}

PiecewisePath restrict(const PiecewisePath& f, double c, double d) {
  if (!(c < d)) throw ArgumentError("restrict: need c < d");
  return restrict_closed(f, c, d);
}

PiecewisePath extend_linear(const PiecewisePath& f, double c, double d, double lo, double hi,
                            double pre_slope, double post_slope) {
  if (!(lo <= c && c <= d && d <= hi)) throw ArgumentError("extend: [lo, hi] must contain [c, d]");
  const PiecewisePath core = restrict_closed(f, c, d);
  std::vector<Segment> out;
  if (lo < c) out.push_back({lo, core.eval(c) + pre_slope * (lo - c), pre_slope});
  for (const Segment& s : core.segments()) out.push_back(s);
  if (hi > d) {
    // the post segment takes over at d; a segment of the core starting at d is replaced
    const double fd = core.eval(d);
    if (out.back().start == d) out.pop_back();
    out.push_back({d, fd, post_slope});
  }
  return PiecewisePath(lo, hi, std::move(out));
}

PiecewisePath extend_flat(const PiecewisePath& f, double c, double d, double pre_slope,
                          double post_slope) {
  return extend_linear(f, c, d, c - 1.0, d + 1.0, pre_slope, post_slope);
}

std::vector<Jump> jumps(const PiecewisePath& f, double min_size) {
  if (min_size < 0.0) throw ArgumentError("jumps: min_size must be >= 0");
  std::vector<Jump> out;
  const auto segs = f.segments();
  for (std::size_t k = 1; k < segs.size(); ++k) {
    const double size = segs[k].value - f.segment_end_value(k - 1);
    if (std::fabs(size) > kBreakpointTol && std::fabs(size) >= min_size)
      out.push_back({segs[k].start, size});
  }
  return out;
}

double oscillation(const PiecewisePath& f, double delta, Interval I) {
  if (f.empty()) throw ArgumentError("oscillation: empty path");
  if (!(delta > 0.0)) throw ArgumentError("oscillation: delta must be positive");
  const double tol = scaled_tol(I.lo, I.hi);
  if (I.lo < f.lo() - tol || I.hi > f.hi() + tol || !(I.lo < I.hi))
    throw ArgumentError("oscillation: interval not inside the domain");
  if (delta > I.length() + tol) throw ArgumentError("oscillation: delta exceeds |I|");
  I.lo = std::max(I.lo, f.lo());
  I.hi = std::min(I.hi, f.hi());
  const PiecewisePath g = restrict(f, I.lo, I.hi);

  if (g.is_step()) {
    std::vector<double> x, v;
    for (const Segment& s : g.segments()) {
      if (s.start >= I.hi - tol && !x.empty()) break;  // a jump at hi only affects v_hi
      x.push_back(s.start);
      v.push_back(s.value);
    }
    return minimise_cost(StepModulus(std::move(x), std::move(v), g.eval(I.hi), I.hi, delta, tol));
  }
  return minimise_cost(GridModulus(g, I, delta, tol));
}

PathDistance path_dist(const PiecewisePath& f, const PiecewisePath& g, double resolution,
                       double cap) {
  if (f.empty() || g.empty()) throw ArgumentError("path_dist: empty path");
  if (!(resolution > 0.0)) throw ArgumentError("path_dist: resolution must be positive");
  if (!(cap > 0.0)) throw ArgumentError("path_dist: cap must be positive");
  const double tolerance = resolution * (1.0 + std::max(f.max_abs_slope(), g.max_abs_slope()));

  // endpoints must be matched to endpoints
  const double lower = std::max(std::fabs(f.lo() - g.lo()) + std::fabs(f.eval(f.lo()) - g.eval(g.lo())),
                                std::fabs(f.hi() - g.hi()) + std::fabs(f.eval(f.hi()) - g.eval(g.hi())));
  if (lower >= cap) return {cap, tolerance};

  struct Grid {
    std::vector<double> s, right, left;
  };
  auto build = [resolution](const PiecewisePath& p) {
    Grid G;
    std::vector<double> knots;
    for (const Segment& seg : p.segments()) knots.push_back(seg.start);
    if (knots.back() < p.hi()) knots.push_back(p.hi());
    G.s.push_back(knots.front());
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double a = knots[k], b = knots[k + 1];
      const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / resolution)));
      for (std::size_t i = 1; i < m; ++i) G.s.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(m));
      G.s.push_back(b);
    }
    G.right.resize(G.s.size());
    G.left.resize(G.s.size());
    for (std::size_t i = 0; i < G.s.size(); ++i) {
      G.right[i] = p.eval(G.s[i]);
      G.left[i] = p.eval_left(G.s[i]);
    }
    return G;
  };
  const Grid F = build(f);
  const Grid H = build(g);
  const std::size_t P = F.s.size(), Q = H.s.size();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Cost of one admissible staircase hugging the affine map between the domains. Any
  // optimal staircase stays within this distortion, which narrows the band below.
  {
    const double a = F.s.front(), b = F.s.back(), c = H.s.front(), d = H.s.back();
    auto target = [&](double s) { return b > a ? c + (s - a) * (d - c) / (b - a) : d; };
    std::size_t i = 0, j = 0;
    double cost = std::fabs(F.right[0] - H.right[0]) + std::fabs(F.s[0] - H.s[0]);
    while (i + 1 < P || j + 1 < Q) {
      double step;
      if (i + 1 < P && j + 1 < Q) {
        const double e_diag = std::fabs(H.s[j + 1] - target(F.s[i + 1]));
        const double e_right = std::fabs(H.s[j] - target(F.s[i + 1]));
        const double e_up = std::fabs(H.s[j + 1] - target(F.s[i]));
        if (e_diag <= e_right && e_diag <= e_up) {
          ++i;
          ++j;
          step = std::fabs(F.left[i] - H.left[j]);
        } else if (e_right <= e_up) {
          ++i;
          step = std::fabs(F.left[i] - H.right[j]);
        } else {
          ++j;
          step = std::fabs(F.right[i] - H.left[j]);
        }
      } else if (i + 1 < P) {
        ++i;
        step = std::fabs(F.left[i] - H.right[j]);
      } else {
        ++j;
        step = std::fabs(F.right[i] - H.left[j]);
      }
      const double dt = std::fabs(F.s[i] - H.s[j]);
      cost = std::max({cost, step + dt, std::fabs(F.right[i] - H.right[j]) + dt});
    }
    if (cost < cap) {
      cap = cost;
      if (cap == 0.0) return {0.0, tolerance};
    }
  }

  // D(i, j): best max-cost of a monotone path reaching node (i, j), excluding the
  // right-value cost of (i, j) itself. Only nodes with |s_i - tau_j| <= cap are used.
  std::vector<double> prev(Q, inf), cur(Q, inf), prev_rr(Q, inf), cur_rr(Q, inf);
  std::size_t plo = 1, phi = 0;  // previous band, empty
  std::size_t jlo = 0, jhi = 0;
  for (std::size_t i = 0; i < P; ++i) {
    const double si = F.s[i];
    while (jlo < Q && H.s[jlo] < si - cap) ++jlo;
    if (jhi < jlo) jhi = jlo;
    while (jhi + 1 < Q && H.s[jhi + 1] <= si + cap) ++jhi;
    const bool band_empty = jlo >= Q || H.s[jlo] > si + cap;
    std::size_t clo = 1, chi = 0;
    if (!band_empty) {
      clo = jlo;
      chi = jhi;
      for (std::size_t j = clo; j <= chi; ++j) {
        const double dt = std::fabs(si - H.s[j]);
        double best = inf;
        if (i == 0 && j == 0) best = 0.0;
        if (i > 0 && j > 0 && j - 1 >= plo && j - 1 <= phi)
          best = std::min(best, std::max({prev[j - 1], prev_rr[j - 1],
                                          std::fabs(F.left[i] - H.left[j]) + dt}));
        if (i > 0 && j >= plo && j <= phi)
          best = std::min(best, std::max({prev[j], prev_rr[j],
                                          std::fabs(F.left[i] - H.right[j]) + dt}));
        if (j > clo)
          best = std::min(best, std::max({cur[j - 1], cur_rr[j - 1],
                                          std::fabs(F.right[i] - H.left[j]) + dt}));
        cur[j] = best;
        cur_rr[j] = std::fabs(F.right[i] - H.right[j]) + dt;
      }
    }
    std::swap(prev, cur);
    std::swap(prev_rr, cur_rr);
    plo = clo;
    phi = chi;
  }
  double value = inf;
  if (Q - 1 >= plo && Q - 1 <= phi) value = std::max(prev[Q - 1], prev_rr[Q - 1]);
  return {std::min(value, cap), tolerance};
}

}  // namespace stableweb
