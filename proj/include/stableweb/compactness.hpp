#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stableweb/collection.hpp"

namespace stableweb {

// M_t and delta_t(n) tabulated on a grid of t values; between grid points the value of
// the last grid point at or below t applies (right-continuous steps). n runs 1..n_max
// and is stored at delta[k][n - 1].
struct Budget {
  std::vector<double> t;
  std::vector<double> M;
  std::vector<std::vector<double>> delta;

  int n_max() const { return delta.empty() ? 0 : static_cast<int>(delta.front().size()); }
  double M_at(double t) const;
  double delta_at(double t, int n) const;
  // Throws ArgumentError on shape or monotonicity violations.
  void check() const;
};

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

// Everything the five conditions need from one collection at one t.
struct ConditionStats {
  double t = 0.0;
  std::size_t count = 0;              // |Pi_t G|
  double bound = 0.0;                 // max |gamma|, age over the projections
  std::vector<double> modulus;        // [n-1]: worst omega(2^-n) of gamma^t, a^t
  std::vector<double> separation;     // [n-1]: closest gamma/age jump pair, inf if none
  double witness = 0.0;               // smallest M_t that satisfies (E); inf if none
  bool witness_resolvable = true;     // false when the age grid is coarser than the window
};

ConditionStats condition_stats(const PathCollection& G, double t, int n_max);

bool check_A(const PathCollection& G, const Budget& B, double t);
bool check_B(const PathCollection& G, const Budget& B, double t);
bool check_C(const PathCollection& G, const Budget& B, double t, int n_max);
bool check_D(const PathCollection& G, const Budget& B, double t, int n_max);
Verdict check_E(const PathCollection& G, const Budget& B, double t);

// Same predicates evaluated from precomputed stats.
bool passes_A(const ConditionStats& s, const Budget& B);
bool passes_B(const ConditionStats& s, const Budget& B);
bool passes_C(const ConditionStats& s, const Budget& B, int n_max);
bool passes_D(const ConditionStats& s, const Budget& B, int n_max);
Verdict verdict_E(const ConditionStats& s, const Budget& B);

// Coarsest step of the stored age data: twice the largest eps0 in the collection.
double age_grid_step(const PathCollection& G);

struct FailRate {
  double t;
  std::string condition;  // "A".."E", "E_inconclusive"
  double rate;
};

struct CalibrationReport {
  Budget budget;
  double pass_rate = 0.0;
  double quantile_level = 0.0;
  std::vector<FailRate> fail_rates;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& msg, CalibrationReport best)
      : std::runtime_error(msg), best_(std::move(best)) {}
  const CalibrationReport& best() const { return best_; }

 private:
  CalibrationReport best_;
};

// Default t grid {1, 1.5, 2, 2.5, 3}, nudged off the dyadic values.
std::vector<double> default_t_grid();

// A sample passes when A-D hold and E is not a fail at every grid t.
bool sample_passes(const std::vector<ConditionStats>& per_t, const Budget& B);

CalibrationReport calibrate(const std::vector<PathCollection>& samples, double eps,
                            const std::vector<double>& t_grid, int n_max);
// Calibration from stats already computed: stats[sample][t index].
CalibrationReport calibrate_stats(const std::vector<std::vector<ConditionStats>>& stats,
                                  double eps, const std::vector<double>& t_grid, int n_max);

// Per-condition failure rates of a fixed budget.
CalibrationReport evaluate_budget(const std::vector<std::vector<ConditionStats>>& stats,
                                  const Budget& B);

std::vector<std::vector<ConditionStats>> collect_stats(const std::vector<PathCollection>& samples,
                                                       const std::vector<double>& t_grid,
                                                       int n_max);

}  // namespace stableweb
