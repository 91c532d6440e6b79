#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stableweb/cadlag.hpp"

namespace stableweb {

// Position/age pair born at sigma. The open domain (sigma, inf) is stored as the
// closed interval [sigma + eps0, horizon]; gamma and age share that domain.
class AgedPath {
 public:
  AgedPath(double sigma, PiecewisePath gamma, PiecewisePath age);

  double sigma() const { return sigma_; }
  const PiecewisePath& gamma() const { return gamma_; }
  const PiecewisePath& age() const { return age_; }
  double start() const { return gamma_.lo(); }
  double eps0() const { return gamma_.lo() - sigma_; }
  double horizon() const { return gamma_.hi(); }

 private:
  double sigma_;
  PiecewisePath gamma_;
  PiecewisePath age_;
};

inline constexpr std::size_t kNoSource = std::numeric_limits<std::size_t>::max();

// A path cut down to [b, t]. `source` is the index of the originating path inside a
// collection when the projection came from one.
struct TruncatedPath {
  double b = 0.0;
  double t = 0.0;
  PiecewisePath gamma;
  PiecewisePath age;
  std::size_t source = kNoSource;
};

struct Violation {
  std::string clause;  // "(i)", "(ii)", "(iii)"
  double time;
  std::string detail;
};

// Empty iff: age at the first stored time <= eps0 + tol; age grows at rate >= 1 and
// only jumps upward; gamma and age never jump at the same time.
std::vector<Violation> validate(const AgedPath& p, double tol = 1e-9);

// inf{ s in [max(-t, start), t] : |gamma(s)| <= t, age(s) >= threshold }.
std::optional<double> birth_window_h(const AgedPath& p, double t, double threshold);
std::optional<double> birth_window(const AgedPath& p, double t);

std::optional<TruncatedPath> project_h(const AgedPath& p, double t, double threshold);
std::optional<TruncatedPath> project(const AgedPath& p, double t);

// gamma held flat and age continued with slope one outside [b, t], on [-(t+1), t+1].
std::pair<PiecewisePath, PiecewisePath> canonical_extension(const TruncatedPath& tp);

// inf{ s : age(s) >= level } over the stored domain.
std::optional<double> first_age_time(const AgedPath& p, double level);

}  // namespace stableweb
