#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace stableweb {

// Absolute tolerance used to identify coincident breakpoints.
inline constexpr double kBreakpointTol = 1e-12;

struct Segment {
  double start;
  double value;  // value at `start` (right-continuous convention)
  double slope;  // per unit time
};

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
};

struct Jump {
  double time;
  double size;  // eval(time) - eval_left(time), signed
};

struct Extrema {
  double min;
  double max;
};

// Cadlag piecewise-linear function on a closed interval [lo, hi].
//
// Segment k covers [start_k, start_{k+1}); the last segment covers through hi
// inclusive. Segments are immutable after construction, so a path can be shared
// freely between threads.
class PiecewisePath {
 public:
  PiecewisePath() = default;  // the empty path
  PiecewisePath(double lo, double hi, std::vector<Segment> segments);

  static PiecewisePath constant(double lo, double hi, double value);
  static PiecewisePath linear(double lo, double hi, double value_at_lo, double slope);
  // Right-continuous step function: value `values[k]` on [times[k], times[k+1]).
  // times[0] must equal lo.
  static PiecewisePath step(double lo, double hi, std::span<const double> times,
                            std::span<const double> values);

  bool empty() const { return segments_.empty(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::span<const Segment> segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }

  double eval(double s) const;
  // Left limit at s; at lo this is eval(lo) since there is nothing to the left.
  double eval_left(double s) const;

  // Index of the segment covering s (largest k with start_k <= s).
  std::size_t segment_index(double s) const;
  double segment_end(std::size_t k) const;
  // Left limit of segment k at its right end.
  double segment_end_value(std::size_t k) const;

  bool is_step() const;
  double max_abs_slope() const;

  // Closed-interval extrema over [c, d], including left limits inside (c, d].
  Extrema extrema(double c, double d) const;

  // Value equality of two paths, segment by segment, within `tol`.
  bool same_as(const PiecewisePath& other, double tol) const;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<Segment> segments_;
};

// Restriction to [c, d] with lo <= c < d <= hi.
PiecewisePath restrict(const PiecewisePath& f, double c, double d);

// Restriction to [c, d] allowing c == d (a single point).
PiecewisePath restrict_closed(const PiecewisePath& f, double c, double d);

// g = f on [c, d], continued linearly with `pre_slope` to the left of c and with
// `post_slope` to the right of d, on [c - 1, d + 1].
PiecewisePath extend_flat(const PiecewisePath& f, double c, double d, double pre_slope,
                          double post_slope);

// Same continuation rule on an arbitrary enclosing interval [lo, hi] ⊇ [c, d].
PiecewisePath extend_linear(const PiecewisePath& f, double c, double d, double lo, double hi,
                            double pre_slope, double post_slope);

// Jumps with |size| >= min_size, ascending in time. Zero-size breakpoints are not jumps.
std::vector<Jump> jumps(const PiecewisePath& f, double min_size);

// Cadlag modulus: the infimum over partitions of I into half-open cells of length
// >= delta (last cell closed) of the largest within-cell oscillation.
//
// Exact for step functions. For functions with sloped segments the value is the cost
// of an explicit admissible partition on a refined candidate grid, hence an upper
// bound that is within about slope * delta / 8 of the infimum.
double oscillation(const PiecewisePath& f, double delta, Interval I);

struct PathDistance {
  double value;
  double tolerance;  // resolution * (1 + max |slope|)
};

// Generalised Skorohod distance
//   inf_tau sup_s |tau(s) - s| + |f(s) - g(tau(s))|
// over increasing homeomorphisms between the two (possibly different) domains,
// approximated from above by a monotone matching on grids containing every
// breakpoint of each path refined to spacing <= resolution.
//
// With a finite `cap` the result is min(distance, cap); matchings whose time
// distortion exceeds the cap are never explored.
PathDistance path_dist(const PiecewisePath& f, const PiecewisePath& g, double resolution,
                       double cap = std::numeric_limits<double>::infinity());

}  // namespace stableweb
