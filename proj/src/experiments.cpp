#include "stableweb/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>

#include "stableweb/error.hpp"
#include "stableweb/parallel.hpp"
#include "stableweb/walkers.hpp"

namespace stableweb {

namespace {

// stream tags keep the experiments' random streams apart
enum Stream : std::uint64_t {
  kDensity = 11,
  kInterval = 12,
  kInsulation = 13,
  kSingleCell = 14,
  kOneCellSystem = 15,
  kAvoid = 16,
  kSample = 17,
  kBootstrap = 18,
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::uint64_t> seed_list(const RunSettings& run, int count) {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(count));
  std::iota(s.begin(), s.end(), run.seed);
  return s;
}

void require_batches(const RunSettings& run, int seeds) {
  if (run.batches < 20) throw ArgumentError("stderr needs at least 20 batches");
  if (seeds < run.batches) throw ArgumentError("need at least as many seeds as batches");
}

// Lazy nearest-neighbour steps drawn two bits at a time.
class LazySteps {
 public:
  explicit LazySteps(std::mt19937_64& rng) : rng_(rng) {}
  int operator()() {
    if (left_ == 0) {
      bits_ = rng_();
      left_ = 32;
    }
    const unsigned b = static_cast<unsigned>(bits_ & 3u);
    bits_ >>= 2;
    --left_;
    return b < 2 ? 0 : (b == 2 ? -1 : 1);
  }

 private:
  std::mt19937_64& rng_;
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

// Least squares on the batch means plus a bootstrap interval for the slope.
ReportFit fit_with_bootstrap(const std::string& xname, const std::string& yname,
                             const std::vector<double>& x,
                             const std::vector<std::vector<double>>& batches,
                             double (*transform)(double), int resamples, std::uint64_t seed) {
  std::vector<double> y;
  for (const auto& b : batches) {
    const double m = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    y.push_back(transform(m));
  }
  ReportFit f;
  f.x = xname;
  f.y = yname;
  f.line = least_squares(x, y);
  f.slope_ci = batch_bootstrap(
      batches,
      [&](const std::vector<double>& means) -> std::optional<double> {
        std::vector<double> yy;
        for (double m : means) {
          const double v = transform(m);
          if (!std::isfinite(v)) return std::nullopt;
          yy.push_back(v);
        }
        return least_squares(x, yy).slope;
      },
      resamples, seed);
  f.slope_se = f.slope_ci.sd;
  return f;
}

double log_of(double v) { return std::log(v); }

}  // namespace

// ---------------------------------------------------------------- density

ExperimentReport density_scan(const DensityConfig& cfg) {
  require_batches(cfg.run, cfg.seeds);
  if (cfg.times.empty()) throw ArgumentError("density_scan needs times");
  for (std::size_t i = 1; i < cfg.times.size(); ++i)
    if (cfg.times[i] <= cfg.times[i - 1]) throw ArgumentError("times must increase");
  if (cfg.times.front() < 0) throw ArgumentError("times must be nonnegative");
  if (cfg.L < 1) throw ArgumentError("L must be >= 1");

  const Kernel k = build_kernel(cfg.alpha, cfg.alpha == 2.0 ? 1 : cfg.radius);
  const std::int64_t T = std::max<std::int64_t>(1, cfg.times.back());
  const double sites = static_cast<double>(2 * cfg.L + 1);
  const std::size_t nt = cfg.times.size();
  std::vector<std::vector<double>> dens(static_cast<std::size_t>(cfg.seeds), std::vector<double>(nt));
  parallel_for(static_cast<std::size_t>(cfg.seeds), [&](std::size_t i) {
    WalkConfig wc;
    wc.L = cfg.L;
    wc.T = T;
    wc.buffer = k.radius;
    wc.seed = seeded_rng(cfg.run.seed, i, kDensity)();
    wc.births_all_times = false;
    wc.record_paths = false;
    const WalkSystem ws = simulate(k, wc);
    for (std::size_t j = 0; j < nt; ++j)
      dens[i][j] = static_cast<double>(ws.core_count[static_cast<std::size_t>(cfg.times[j])]) / sites;
  });

  ExperimentReport r;
  r.name = "density_scan";
  r.params = {{"alpha", cfg.alpha}, {"L", cfg.L}, {"times", cfg.times}, {"seeds", cfg.seeds},
              {"radius", k.radius}, {"seed", cfg.run.seed}, {"batches", cfg.run.batches}};
  r.samples = static_cast<std::size_t>(cfg.seeds);
  r.seeds = seed_list(cfg.run, cfg.seeds);

  std::vector<double> x;
  std::vector<std::vector<double>> batches;
  for (std::size_t j = 0; j < nt; ++j) {
    std::vector<double> col;
    for (const auto& row : dens) col.push_back(row[j]);
    const Estimate e = batch_mean(col, cfg.run.batches);
    r.add("t=" + std::to_string(cfg.times[j]), "density", e.value, e.se);
    if (cfg.times[j] == 0) continue;
    if (e.value <= 0.0)
      throw ExperimentError("core window empty at t = " + std::to_string(cfg.times[j]));
    x.push_back(std::log(static_cast<double>(cfg.times[j])));
    batches.push_back(batch_means(col, cfg.run.batches));
  }
  if (x.size() >= 2) {
    ReportFit f = fit_with_bootstrap("log t", "log density", x, batches, log_of, 200,
                                     seeded_rng(cfg.run.seed, 0, kBootstrap)());
    r.add("fit", "slope", f.line.slope, f.slope_se);
    r.add("fit", "intercept", f.line.intercept);
    r.add("fit", "r_squared", f.line.r_squared);
    r.add("fit", "expected_slope", -1.0 / cfg.alpha);
    r.add("fit", "c", std::exp(f.line.intercept));
    r.fits.push_back(f);
  }
  return r;
}

// ---------------------------------------------------------------- interval coalescence

ExperimentReport interval_coalescence(const IntervalConfig& cfg) {
  require_batches(cfg.run, cfg.seeds);
  if (cfg.m_values.empty()) throw ArgumentError("interval_coalescence needs m values");
  for (int m : cfg.m_values)
    if (m < 2) throw ArgumentError("m values must be >= 2");
  if (!(cfg.interval_len > 0.0) || !(cfg.c_trial > 0.0) || cfg.sites_per_unit < 1)
    throw ArgumentError("interval length, c and lattice density must be positive");
  // sites 0..K with K even so the lattice is symmetric about its midpoint
  const std::int64_t K =
      2 * std::max<std::int64_t>(1, std::llround(cfg.interval_len * cfg.sites_per_unit / 2.0));
  const int m_max = *std::max_element(cfg.m_values.begin(), cfg.m_values.end());
  if (K + 1 < 4 * static_cast<std::int64_t>(m_max))
    throw ExperimentError("lattice too coarse: " + std::to_string(K + 1) + " sites for m = " +
                          std::to_string(m_max));
  // Brownian time tau = len^2 / (c m^2) is 2 tau / h^2 lazy steps with h = len / K
  std::vector<std::int64_t> steps;
  for (int m : cfg.m_values)
    steps.push_back(std::max<std::int64_t>(
        1, std::llround(2.0 * static_cast<double>(K * K) / (cfg.c_trial * m * m))));
  const std::int64_t T = *std::max_element(steps.begin(), steps.end());
  const Kernel k = build_kernel(2.0, 1);
  const std::size_t nm = cfg.m_values.size();
  std::vector<std::vector<double>> hit(static_cast<std::size_t>(cfg.seeds), std::vector<double>(nm));
  parallel_for(static_cast<std::size_t>(cfg.seeds), [&](std::size_t i) {
    WalkConfig wc;
    wc.L = K / 2 - 1;
    wc.buffer = 1;
    wc.T = T;
    wc.seed = seeded_rng(cfg.run.seed, i, kInterval)();
    wc.births_all_times = false;
    wc.record_paths = false;
    if (wc.L < 0) {
      wc.L = 0;
    }
    const WalkSystem ws = simulate(k, wc);
    for (std::size_t j = 0; j < nm; ++j)
      hit[i][j] = ws.live_count[static_cast<std::size_t>(steps[j])] >= cfg.m_values[j] ? 1.0 : 0.0;
  });

  ExperimentReport r;
  r.name = "interval_coalescence";
  r.params = {{"m_values", cfg.m_values}, {"interval_len", cfg.interval_len},
              {"c_trial", cfg.c_trial}, {"sites_per_unit", cfg.sites_per_unit},
              {"lattice_sites", K + 1}, {"seeds", cfg.seeds}, {"seed", cfg.run.seed},
              {"batches", cfg.run.batches}};
  r.samples = static_cast<std::size_t>(cfg.seeds);
  r.seeds = seed_list(cfg.run, cfg.seeds);
  std::vector<double> x;
  std::vector<std::vector<double>> batches;
  for (std::size_t j = 0; j < nm; ++j) {
    std::vector<double> col;
    double successes = 0.0;
    for (const auto& row : hit) {
      col.push_back(row[j]);
      successes += row[j];
    }
    const Estimate e = batch_mean(col, cfg.run.batches);
    const std::string p = "m=" + std::to_string(cfg.m_values[j]);
    r.add(p, "P_count_ge_m", e.value, e.se);
    r.add(p, "time", cfg.interval_len * cfg.interval_len / (cfg.c_trial * cfg.m_values[j] * cfg.m_values[j]));
    r.add(p, "steps", static_cast<double>(steps[j]));
    r.add(p, "successes", successes);
    if (successes >= 10.0) {
      x.push_back(cfg.m_values[j]);
      batches.push_back(batch_means(col, cfg.run.batches));
    } else {
      r.notes.push_back(p + " dropped from the fit: fewer than 10 successes");
    }
  }
  if (x.size() >= 2) {
    ReportFit f = fit_with_bootstrap("m", "log P", x, batches, log_of, 200,
                                     seeded_rng(cfg.run.seed, 0, kBootstrap)());
    r.add("fit", "slope", f.line.slope, f.slope_se);
    r.add("fit", "intercept", f.line.intercept);
    r.add("fit", "r_squared", f.line.r_squared);
    r.fits.push_back(f);
  } else {
    r.notes.push_back("fewer than two usable m values; no fit");
  }
  return r;
}

// ---------------------------------------------------------------- insulation

namespace {

// Coalescing lazy walkers from full occupancy on sites [-margin K, (n_max + margin) K],
// killed on leaving it. After `pre` steps (time 0) every walker strictly inside a cell
// (k-1, k), 2 <= k <= n_max, is marked; the mark survives while the walker stays in that
// cell for `win` more steps. A merge keeps a mark carried by either party.
std::vector<bool> insulation_trial(std::mt19937_64& rng, std::int64_t K, int n_max, int margin,
                                   std::int64_t pre, std::int64_t win) {
  const std::int64_t lo = -margin * K, hi = (n_max + margin) * K;
  const std::size_t width = static_cast<std::size_t>(hi - lo + 1);
  std::vector<std::int64_t> x;
  for (std::int64_t s = lo; s <= hi; ++s) x.push_back(s);
  std::vector<int> cell(x.size(), 0);  // 0: unmarked
  std::vector<std::size_t> live(x.size()), next;
  std::iota(live.begin(), live.end(), std::size_t{0});
  std::vector<std::int64_t> stamp(width, -1);
  std::vector<std::size_t> owner(width, 0);
  LazySteps step(rng);
  auto cell_of = [&](std::int64_t s) -> int {
    if (s <= 0 || s % K == 0) return 0;
    const auto k = static_cast<int>(s / K) + 1;
    return k >= 2 && k <= n_max ? k : 0;
  };
  for (std::int64_t m = 1; m <= pre + win; ++m) {
    next.clear();
    for (std::size_t id : live) {
      x[id] += step();
      if (x[id] < lo || x[id] > hi) continue;
      if (m > pre && cell[id] != 0 && cell_of(x[id]) != cell[id]) cell[id] = 0;
      const auto slot = static_cast<std::size_t>(x[id] - lo);
      if (stamp[slot] == m) {
        const std::size_t keep = owner[slot];
        if (cell[keep] == 0) cell[keep] = cell[id];
        continue;
      }
      stamp[slot] = m;
      owner[slot] = id;
      next.push_back(id);
    }
    live.swap(next);
    if (m == pre)
      for (std::size_t id : live) cell[id] = cell_of(x[id]);
  }
  std::vector<bool> stayed(static_cast<std::size_t>(n_max) + 1, false);
  for (std::size_t id : live)
    if (cell[id] != 0) stayed[static_cast<std::size_t>(cell[id])] = true;
  return stayed;
}

// One walker from the middle of a cell of K sites: does it stay strictly inside?
bool single_cell_stays(std::mt19937_64& rng, std::int64_t K, std::int64_t steps) {
  LazySteps step(rng);
  std::int64_t x = K / 2;
  for (std::int64_t m = 0; m < steps; ++m) {
    x += step();
    if (x <= 0 || x >= K) return false;
  }
  return true;
}

}  // namespace

ExperimentReport insulation_probe(const InsulationConfig& cfg) {
  require_batches(cfg.run, cfg.seeds);
  if (cfg.N_values.empty()) throw ArgumentError("insulation_probe needs N values");
  for (int n : cfg.N_values)
    if (n < 2) throw ArgumentError("N values must be >= 2");
  if (cfg.sites_per_unit < 2 || cfg.sites_per_unit % 2 != 0)
    throw ArgumentError("sites_per_unit must be even and >= 2");
  if (!(cfg.age > 0.0) || !(cfg.window > 0.0) || cfg.margin < 0)
    throw ArgumentError("age and window must be positive, margin nonnegative");
  const std::int64_t K = cfg.sites_per_unit;
  const double steps_per_unit = 2.0 * static_cast<double>(K * K);
  const std::int64_t pre = std::llround(cfg.age * steps_per_unit);
  const std::int64_t win = std::llround(cfg.window * steps_per_unit);
  if (pre < 1 || win < 1) throw ArgumentError("age and window must span at least one lattice step");
  const int n_max = *std::max_element(cfg.N_values.begin(), cfg.N_values.end());
  const int n_min = *std::min_element(cfg.N_values.begin(), cfg.N_values.end());
  const std::size_t S = static_cast<std::size_t>(cfg.seeds);

  std::vector<std::vector<double>> a_n(S, std::vector<double>(cfg.N_values.size()));
  std::vector<double> single(S), one_cell(S);
  parallel_for(S, [&](std::size_t i) {
    auto rng = seeded_rng(cfg.run.seed, i, kInsulation);
    const std::vector<bool> stayed = insulation_trial(rng, K, n_max, cfg.margin, pre, win);
    for (std::size_t j = 0; j < cfg.N_values.size(); ++j) {
      bool none = true;
      for (int k = 2; k <= cfg.N_values[j]; ++k) none = none && !stayed[static_cast<std::size_t>(k)];
      a_n[i][j] = none ? 1.0 : 0.0;
    }
    auto rng1 = seeded_rng(cfg.run.seed, i, kSingleCell);
    single[i] = single_cell_stays(rng1, K, pre + win) ? 1.0 : 0.0;
    auto rng2 = seeded_rng(cfg.run.seed, i, kOneCellSystem);
    one_cell[i] = insulation_trial(rng2, K, 2, cfg.margin, pre, win)[2] ? 0.0 : 1.0;
  });

  ExperimentReport r;
  r.name = "insulation_probe";
  r.params = {{"N_values", cfg.N_values}, {"sites_per_unit", cfg.sites_per_unit},
              {"age", cfg.age}, {"window", cfg.window}, {"margin", cfg.margin},
              {"seeds", cfg.seeds}, {"seed", cfg.run.seed}, {"batches", cfg.run.batches}};
  r.samples = S;
  r.seeds = seed_list(cfg.run, cfg.seeds);

  // c_hat: chance that one cell, simulated on its own, holds an old path that stays put
  const Estimate one = batch_mean(one_cell, cfg.run.batches);
  const Estimate c_hat{1.0 - one.value, one.se};
  r.add("single_cell", "c_hat", c_hat.value, c_hat.se);
  const Estimate lone = batch_mean(single, cfg.run.batches);
  r.add("single_cell", "lone_walker_stay", lone.value, lone.se);

  std::vector<double> x;
  std::vector<std::vector<double>> batches;
  bool bound_ok = true;
  for (std::size_t j = 0; j < cfg.N_values.size(); ++j) {
    std::vector<double> col;
    double successes = 0.0;
    for (const auto& row : a_n) {
      col.push_back(row[j]);
      successes += row[j];
    }
    const Estimate e = batch_mean(col, cfg.run.batches);
    const int N = cfg.N_values[j];
    const std::string p = "N=" + std::to_string(N);
    r.add(p, "P_A_N", e.value, e.se);
    r.add(p, "successes", successes);
    // independent-cells bound and its relative error
    const double q = 1.0 - c_hat.value;
    const double bound = std::pow(q, N - 1);
    const double rel_b = q > 0.0 ? (N - 1) * c_hat.se / q : 0.0;
    const double rel_p = e.value > 0.0 ? e.se / e.value : 0.0;
    const double rel = std::hypot(rel_b, rel_p);
    r.add(p, "independent_bound", bound, bound * rel_b);
    const bool ok = e.value <= bound * (1.0 + 3.0 * rel);
    bound_ok = bound_ok && ok;
    r.add(p, "bound_holds", ok ? 1.0 : 0.0);
    if (N == 2) {
      // one factor: P(A_2) should match 1 - c_hat
      const double z = std::fabs(e.value - one.value) / std::max(std::hypot(e.se, one.se), 1e-300);
      r.add(p, "one_factor_match", z <= 2.0 ? 1.0 : 0.0);
    }
    if (N == n_min && e.value >= 1.0)
      throw ExperimentError("no cell ever held a staying path at N = " + std::to_string(N) +
                            "; refine the lattice");
    if (successes >= 10.0) {
      x.push_back(N);
      batches.push_back(batch_means(col, cfg.run.batches));
    } else {
      r.notes.push_back(p + " dropped from the fit: fewer than 10 successes");
    }
  }
  r.add("all", "bound_holds", bound_ok ? 1.0 : 0.0);
  if (x.size() >= 2) {
    ReportFit f = fit_with_bootstrap("N", "log P(A_N)", x, batches, log_of, 200,
                                     seeded_rng(cfg.run.seed, 0, kBootstrap)());
    r.add("fit", "slope", f.line.slope, f.slope_se);
    r.add("fit", "intercept", f.line.intercept);
    r.add("fit", "r_squared", f.line.r_squared);
    r.fits.push_back(f);
  }
  r.notes.push_back("cells are unit intervals; paths must be older than `age` at time 0 and stay over [0, window]");
  return r;
}

// ---------------------------------------------------------------- avoidance

namespace {

using Quad = std::array<std::int64_t, 4>;

struct AvoidResult {
  double estimate = 0.0;
  double survivors = 0.0;  // particles alive at the horizon
};

bool touching(const Quad& q, unsigned pairs) {
  for (unsigned i = 0; i < 3; ++i)
    if ((pairs >> i) & 1u)
      if (q[i + 1] - q[i] <= 0) return true;
  return false;
}

// Four lazy walkers at 0, g, 2g, 3g; `pairs` bit i requires walkers i and i+1 never to meet
// or cross before Brownian time 1 (2 K^2 lazy steps with K = 3g / delta sites per unit).
// Splitting runs stages over doubling time levels and resamples survivors back to a full
// population; the lattice doubles its spacing whenever the spread exceeds `resolution`
// coarse sites per standard deviation.
AvoidResult avoid_batch(std::mt19937_64& rng, int gap, double delta, unsigned pairs,
                        int particles, int resolution, bool splitting) {
  const Quad start{0, gap, 2 * gap, 3 * gap};
  if (touching(start, pairs)) return {0.0, 0.0};
  const double K = 3.0 * gap / delta;
  const double horizon = 2.0 * K * K;  // fine steps
  std::vector<Quad> pop(static_cast<std::size_t>(particles), start), alive;
  LazySteps step(rng);
  double tau = 0.0, estimate = 1.0;
  double stage_end = std::max(1.0, static_cast<double>(gap) * gap);
  int level = 0;
  const std::size_t P = pop.size();
  while (tau < horizon) {
    const double scale = std::ldexp(1.0, 2 * level);  // fine steps per coarse step
    const double target = std::min(horizon, stage_end);
    const auto steps = static_cast<std::int64_t>(std::ceil((target - tau) / scale));
    alive.clear();
    for (Quad q : pop) {
      bool dead = false;
      for (std::int64_t s = 0; s < steps && !dead; ++s) {
        for (auto& v : q) v += step();
        dead = touching(q, pairs);
      }
      if (!dead) alive.push_back(q);
    }
    tau += static_cast<double>(steps) * scale;
    stage_end *= 2.0;
    // coarsen: spacing doubles, positions round down; ties become touches
    while (std::sqrt(tau / 2.0) / std::ldexp(1.0, level + 1) >= resolution) {
      ++level;
      std::vector<Quad> kept;
      for (Quad q : alive) {
        for (auto& v : q) v >>= 1;
        if (!touching(q, pairs)) kept.push_back(q);
      }
      alive.swap(kept);
    }
    if (!splitting) {
      pop = alive;
      if (pop.empty()) return {0.0, 0.0};
      continue;
    }
    estimate *= static_cast<double>(alive.size()) / static_cast<double>(P);
    if (alive.empty()) return {0.0, 0.0};
    if (tau >= horizon) return {estimate, static_cast<double>(alive.size())};
    std::uniform_int_distribution<std::size_t> pick(0, alive.size() - 1);
    for (std::size_t i = 0; i < P; ++i) pop[i] = alive[pick(rng)];
  }
  if (!splitting)
    return {static_cast<double>(pop.size()) / static_cast<double>(P), static_cast<double>(pop.size())};
  return {estimate, static_cast<double>(pop.size())};
}

}  // namespace

ExperimentReport avoidance_exponent(const AvoidanceConfig& cfg) {
  if (cfg.delta_values.empty()) throw ArgumentError("avoidance_exponent needs delta values");
  for (std::size_t i = 0; i < cfg.delta_values.size(); ++i) {
    const double d = cfg.delta_values[i];
    if (!(d >= 0.0 && d <= 0.25)) throw ArgumentError("delta values must lie in [0, 1/4]");
    if (i > 0 && !(d < cfg.delta_values[i - 1])) throw ArgumentError("delta values must decrease");
  }
  if (cfg.gap_sites < 1 || cfg.resolution < 2 || cfg.particles < 2)
    throw ArgumentError("gap_sites >= 1, resolution >= 2 and particles >= 2 required");
  if (cfg.run.batches < 20) throw ArgumentError("stderr needs at least 20 batches");

  struct Variant {
    const char* name;
    unsigned pairs;
  };
  const std::array<Variant, 3> variants{{{"two_path", 0b001u}, {"pair_sum", 0b101u}, {"four_path", 0b111u}}};
  const std::size_t nd = cfg.delta_values.size(), B = static_cast<std::size_t>(cfg.run.batches);
  // res[variant][delta][batch]
  std::vector<std::vector<std::vector<AvoidResult>>> res(
      variants.size(), std::vector<std::vector<AvoidResult>>(nd, std::vector<AvoidResult>(B)));
  parallel_for(variants.size() * nd * B, [&](std::size_t flat) {
    const std::size_t v = flat / (nd * B), d = (flat / B) % nd, b = flat % B;
    const double delta = cfg.delta_values[d];
    // delta = 0 puts all four walkers on one site
    const int gap = delta == 0.0 ? 0 : cfg.gap_sites;
    auto rng = seeded_rng(cfg.run.seed, b, kAvoid + 100 * (v + 1) + 10000 * d);
    res[v][d][b] = delta == 0.0 ? AvoidResult{}
                                : avoid_batch(rng, gap, delta, variants[v].pairs, cfg.particles,
                                              cfg.resolution, cfg.splitting);
  });

  ExperimentReport r;
  r.name = "avoidance_exponent";
  r.params = {{"delta_values", cfg.delta_values}, {"gap_sites", cfg.gap_sites},
              {"resolution", cfg.resolution}, {"particles", cfg.particles},
              {"splitting", cfg.splitting}, {"bootstrap", cfg.bootstrap},
              {"seed", cfg.run.seed}, {"batches", cfg.run.batches}};
  r.samples = B * static_cast<std::size_t>(cfg.particles);
  r.seeds = seed_list(cfg.run, cfg.run.batches);

  std::array<double, 3> exponent{};
  std::array<Interval95, 3> ci{};
  std::array<bool, 3> fitted{};
  for (std::size_t v = 0; v < variants.size(); ++v) {
    std::vector<double> x;
    std::vector<std::vector<double>> batches;
    for (std::size_t d = 0; d < nd; ++d) {
      std::vector<double> est;
      double succ = 0.0;
      for (const AvoidResult& a : res[v][d]) {
        est.push_back(a.estimate);
        succ += a.survivors;
      }
      const Estimate e = batch_mean(est, cfg.run.batches);
      const std::string p = std::string(variants[v].name) + ":delta=" + num(cfg.delta_values[d]);
      r.add(p, "P_avoid", e.value, e.se);
      r.add(p, "successes", succ);
      if (cfg.delta_values[d] > 0.0 && succ >= 10.0 &&
          std::all_of(est.begin(), est.end(), [](double q) { return q > 0.0; })) {
        x.push_back(std::log(cfg.delta_values[d]));
        batches.push_back(est);
      } else if (cfg.delta_values[d] > 0.0) {
        r.notes.push_back(p + " left out of the fit: too few successes (interval widened)");
      }
    }
    if (x.size() >= 2) {
      ReportFit f = fit_with_bootstrap("log delta", std::string("log P ") + variants[v].name, x,
                                       batches, log_of, cfg.bootstrap,
                                       seeded_rng(cfg.run.seed, v, kBootstrap)());
      const std::string p = std::string(variants[v].name);
      r.add(p, "exponent", f.line.slope, f.slope_se);
      r.add(p, "exponent_ci_lo", f.slope_ci.lo);
      r.add(p, "exponent_ci_hi", f.slope_ci.hi);
      r.add(p, "r_squared", f.line.r_squared);
      exponent[v] = f.line.slope;
      ci[v] = f.slope_ci;
      fitted[v] = true;
      r.fits.push_back(f);
    }
  }
  if (fitted[0] && fitted[1] && fitted[2]) {
    r.add("compare", "four_above_two", exponent[2] > exponent[0] ? 1.0 : 0.0);
    r.add("compare", "four_above_pair_sum", exponent[2] > exponent[1] ? 1.0 : 0.0);
    r.add("compare", "four_ci_lo_above_pair_sum_ci_hi", ci[2].lo > ci[1].hi ? 1.0 : 0.0);
  }
  // more required pairs, smaller probability (allowing two standard errors of noise)
  bool monotone = true;
  for (std::size_t d = 0; d < nd; ++d)
    for (std::size_t v = 1; v < variants.size(); ++v) {
      const std::string lo = std::string(variants[v - 1].name) + ":delta=" + num(cfg.delta_values[d]);
      const std::string hi = std::string(variants[v].name) + ":delta=" + num(cfg.delta_values[d]);
      const ReportRow& a = r.row(lo, "P_avoid");
      const ReportRow& b = r.row(hi, "P_avoid");
      monotone = monotone && b.value <= a.value + 2.0 * std::hypot(a.se, b.se);
    }
  r.add("compare", "monotone_in_pairs", monotone ? 1.0 : 0.0);
  return r;
}

// ---------------------------------------------------------------- walk samples

PathCollection sample_collection(const SampleConfig& cfg, std::uint64_t base_seed,
                                 std::uint64_t index) {
  if (cfg.N < 1 || !(cfg.X > 0.0) || !(cfg.span > 0.0))
    throw ArgumentError("sample needs N >= 1, X > 0 and span > 0");
  const double space = std::pow(static_cast<double>(cfg.N), 1.0 / cfg.alpha);
  const auto L = static_cast<std::int64_t>(std::ceil(cfg.X * space));
  const double Tn = cfg.span * static_cast<double>(cfg.N);
  const std::int64_t T = std::llround(Tn);
  if (std::fabs(Tn - static_cast<double>(T)) > 1e-9 || T < 1)
    throw ArgumentError("span * N must be a positive integer");
  const int radius = cfg.alpha == 2.0 ? 1 : (cfg.radius > 0 ? cfg.radius : static_cast<int>(L));
  const Kernel k = build_kernel(cfg.alpha, radius);
  WalkConfig wc;
  wc.L = L;
  wc.T = T;
  wc.buffer = k.radius;
  wc.seed = seeded_rng(base_seed, index, kSample + 1000 * static_cast<std::uint64_t>(cfg.N))();
  const WalkSystem ws = simulate(k, wc);
  return renormalize(ws, cfg.N, {cfg.shift, cfg.age_floor});
}

// ---------------------------------------------------------------- birth modulus

double birth_threshold(int n0) {
  if (n0 < 1) throw ArgumentError("n0 must be >= 1");
  // sum_{n >= n0} n x^n = x^n0 (n0 - (n0 - 1) x) / (1 - x)^2 with x = 2^{-1/2}
  const double x = std::sqrt(0.5);
  return std::pow(x, n0) * (n0 - (n0 - 1) * x) / ((1.0 - x) * (1.0 - x));
}

namespace {

// Does the path pass through [lo, hi] in space, time and age?
bool enters_box(const AgedPath& p, double lo, double hi) {
  const PiecewisePath& g = p.gamma();
  const PiecewisePath& a = p.age();
  const double u0 = std::max(lo, p.start()), u1 = std::min(hi, p.horizon());
  if (u0 > u1) return false;
  std::vector<double> knots{u0};
  for (const PiecewisePath* f : {&g, &a})
    for (const Segment& s : f->segments())
      if (s.start > u0 && s.start <= u1) knots.push_back(s.start);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const double u = knots[k];
    const double v = k + 1 < knots.size() ? knots[k + 1] : u1;
    const double gv = g.eval(u);
    if (gv < lo || gv > hi) continue;
    // age is continuous with slope one inside the piece; its range is [a(u), a(v-)]
    const double a0 = a.eval(u);
    const double a1 = v > u ? a.eval_left(v) : a0;
    if (a1 >= lo && a0 <= hi) return true;
  }
  return false;
}

}  // namespace

ExperimentReport birth_modulus(const BirthModulusConfig& cfg) {
  require_batches(cfg.run, cfg.seeds);
  if (cfg.n0_values.empty()) throw ArgumentError("birth_modulus needs n0 values");
  if (cfg.sample.alpha != 2.0) throw ArgumentError("birth_modulus is a Brownian (alpha = 2) probe");
  if (!(cfg.box_lo < cfg.box_hi)) throw ArgumentError("box needs lo < hi");
  const int n_top = *std::max_element(cfg.n0_values.begin(), cfg.n0_values.end());
  const std::size_t S = static_cast<std::size_t>(cfg.seeds), nn = cfg.n0_values.size();
  std::vector<std::vector<double>> exceed(S, std::vector<double>(nn, 0.0));
  std::vector<std::vector<double>> worst(S, std::vector<double>(nn, 0.0));
  std::vector<double> qualifying(S, 0.0), gap_violations(S, 0.0);
  parallel_for(S, [&](std::size_t i) {
    const PathCollection G = sample_collection(cfg.sample, cfg.run.seed, i);
    for (const AgedPath& p : G.paths()) {
      for (int n = 1; n <= n_top + 1; ++n) {
        const auto l_hi = first_age_time(p, std::exp2(-n + 1));
        const auto l_lo = first_age_time(p, std::exp2(-n));
        if (l_hi && l_lo && *l_hi - *l_lo > std::exp2(-n) + 1e-9) gap_violations[i] += 1.0;
      }
      if (!enters_box(p, cfg.box_lo, cfg.box_hi)) continue;
      qualifying[i] += 1.0;
      for (std::size_t j = 0; j < nn; ++j) {
        const auto lam = first_age_time(p, std::exp2(-cfg.n0_values[j]));
        if (!lam) continue;
        const Extrema e = p.gamma().extrema(p.start(), *lam);
        const double disp = e.max - e.min;
        worst[i][j] = std::max(worst[i][j], disp);
        if (disp >= birth_threshold(cfg.n0_values[j])) exceed[i][j] = 1.0;
      }
    }
  });
  double total_q = 0.0;
  for (double q : qualifying) total_q += q;
  if (total_q == 0.0) throw ExperimentError("no path entered the reference box");

  ExperimentReport r;
  r.name = "birth_modulus";
  r.params = {{"n0_values", cfg.n0_values}, {"N", cfg.sample.N}, {"X", cfg.sample.X},
              {"shift", cfg.sample.shift}, {"span", cfg.sample.span}, {"box_lo", cfg.box_lo},
              {"box_hi", cfg.box_hi}, {"seeds", cfg.seeds}, {"seed", cfg.run.seed},
              {"batches", cfg.run.batches}};
  r.samples = S;
  r.seeds = seed_list(cfg.run, cfg.seeds);
  const Estimate q = batch_mean(qualifying, cfg.run.batches);
  r.add("all", "qualifying_paths_per_collection", q.value, q.se);
  double gv = 0.0;
  for (double v : gap_violations) gv += v;
  r.add("all", "lambda_gap_violations", gv);
  bool monotone = true;
  double prev = 2.0;
  for (std::size_t j = 0; j < nn; ++j) {
    std::vector<double> col, w;
    for (std::size_t i = 0; i < S; ++i) {
      col.push_back(exceed[i][j]);
      w.push_back(worst[i][j]);
    }
    const Estimate e = batch_mean(col, cfg.run.batches);
    const Estimate we = batch_mean(w, cfg.run.batches);
    const std::string p = "n0=" + std::to_string(cfg.n0_values[j]);
    r.add(p, "threshold", birth_threshold(cfg.n0_values[j]));
    r.add(p, "P_exceed", e.value, e.se);
    r.add(p, "max_displacement", we.value, we.se);
    if (j > 0 && cfg.n0_values[j] > cfg.n0_values[j - 1]) monotone = monotone && e.value <= prev;
    prev = e.value;
  }
  r.add("all", "nonincreasing_in_n0", monotone ? 1.0 : 0.0);
  return r;
}

// ---------------------------------------------------------------- tightness

ExperimentReport tightness_scan(const TightnessConfig& cfg) {
  if (cfg.N_values.empty()) throw ArgumentError("tightness_scan needs N values");
  for (std::size_t i = 1; i < cfg.N_values.size(); ++i)
    if (cfg.N_values[i] <= cfg.N_values[i - 1]) throw ArgumentError("N values must increase");
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ArgumentError("eps must lie in (0, 1)");
  if (cfg.samples < 1 || cfg.t_grid.empty() || cfg.n_max < 1)
    throw ArgumentError("tightness_scan needs samples, a t grid and n_max >= 1");
  const std::size_t S = static_cast<std::size_t>(cfg.samples);

  struct PerN {
    std::vector<std::vector<ConditionStats>> stats;
    std::vector<double> counts, b_values, endpoints;
  };
  std::vector<PerN> per(cfg.N_values.size());
  for (std::size_t n = 0; n < cfg.N_values.size(); ++n) {
    SampleConfig sc = cfg.sample;
    sc.N = cfg.N_values[n];
    if (cfg.sample.shift + cfg.t_grid.back() > cfg.sample.span + 1e-12 ||
        cfg.sample.shift + cfg.ks_t > cfg.sample.span + 1e-12)
      throw ArgumentError("t grid reaches beyond the simulated horizon");
    std::vector<std::vector<ConditionStats>> stats(S);
    std::vector<std::vector<TruncatedPath>> proj(S);
    parallel_for(S, [&](std::size_t i) {
      const PathCollection G = sample_collection(sc, cfg.run.seed, i);
      for (double t : cfg.t_grid) stats[i].push_back(condition_stats(G, t, cfg.n_max));
      proj[i] = project_collection(G, cfg.ks_t);
    });
    per[n].stats = std::move(stats);
    for (const auto& tps : proj) {
      per[n].counts.push_back(static_cast<double>(tps.size()));
      for (const TruncatedPath& tp : tps) {
        per[n].b_values.push_back(tp.b);
        per[n].endpoints.push_back(tp.gamma.eval(tp.t));
      }
    }
  }

  ExperimentReport r;
  r.name = "tightness_scan";
  r.params = {{"alpha", cfg.sample.alpha}, {"N_values", cfg.N_values}, {"eps", cfg.eps},
              {"samples", cfg.samples}, {"X", cfg.sample.X}, {"shift", cfg.sample.shift},
              {"span", cfg.sample.span}, {"age_floor", cfg.sample.age_floor},
              {"t_grid", cfg.t_grid}, {"n_max", cfg.n_max}, {"ks_t", cfg.ks_t},
              {"seed", cfg.run.seed}};
  r.samples = S * cfg.N_values.size();
  r.seeds = seed_list(cfg.run, cfg.samples);

  const CalibrationReport cal = calibrate_stats(per[0].stats, cfg.eps, cfg.t_grid, cfg.n_max);
  r.params["budget"] = {{"t", cal.budget.t}, {"M", cal.budget.M}, {"delta", cal.budget.delta}};
  r.add("N=" + std::to_string(cfg.N_values[0]), "calibration_quantile", cal.quantile_level);
  for (std::size_t n = 0; n < cfg.N_values.size(); ++n) {
    const std::string p = "N=" + std::to_string(cfg.N_values[n]);
    const CalibrationReport ev = evaluate_budget(per[n].stats, cal.budget);
    // binomial standard error of a pass fraction
    auto se = [&](double q) { return std::sqrt(q * (1.0 - q) / static_cast<double>(S)); };
    r.add(p, "pass_rate", ev.pass_rate, se(ev.pass_rate));
    std::map<std::string, double> worst;
    for (const FailRate& f : ev.fail_rates) worst[f.condition] = std::max(worst[f.condition], f.rate);
    for (const auto& [cond, rate] : worst) r.add(p, "max_fail_rate_" + cond, rate, se(rate));
    double mean_count = 0.0;
    for (double c : per[n].counts) mean_count += c;
    mean_count /= static_cast<double>(S);
    double var = 0.0;
    for (double c : per[n].counts) var += (c - mean_count) * (c - mean_count);
    r.add(p, "mean_count_Pi_" + num(cfg.ks_t), mean_count,
          S > 1 ? std::sqrt(var / static_cast<double>(S - 1) / static_cast<double>(S)) : 0.0);
    if (n > 0) {
      const std::string q = "N=" + std::to_string(cfg.N_values[n - 1]) + "->" + std::to_string(cfg.N_values[n]);
      r.add(q, "ks_count", ks_distance(per[n - 1].counts, per[n].counts));
      if (!per[n - 1].b_values.empty() && !per[n].b_values.empty()) {
        r.add(q, "ks_b", ks_distance(per[n - 1].b_values, per[n].b_values));
        r.add(q, "ks_endpoint", ks_distance(per[n - 1].endpoints, per[n].endpoints));
      }
    }
  }
  if (cfg.N_values.size() >= 3) {
    bool decreasing = true;
    for (std::size_t n = 2; n < cfg.N_values.size(); ++n) {
      const auto key = [&](std::size_t k) {
        return "N=" + std::to_string(cfg.N_values[k - 1]) + "->" + std::to_string(cfg.N_values[k]);
      };
      decreasing = decreasing && r.row(key(n), "ks_count").value < r.row(key(n - 1), "ks_count").value;
    }
    r.add("all", "ks_count_decreasing", decreasing ? 1.0 : 0.0);
  }
  r.notes.push_back("condition (E) witnesses are searched inside each finite sample only");
  r.notes.push_back("KS distances are a convergence-in-distribution surrogate, not a rate");
  return r;
}

}  // namespace stableweb
