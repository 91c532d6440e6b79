#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "stableweb/aged_path.hpp"
#include "stableweb/collection.hpp"

namespace stableweb {

// Symmetric increment law on {-R..R}. For alpha < 2 the off-zero masses follow
// C |n|^{-(1+alpha)} and the walk is lazy: pmf(0) = 1/2, which fixes C. For alpha = 2 it
// is the lazy nearest-neighbour walk.
struct Kernel {
  double alpha = 2.0;
  int radius = 1;
  std::vector<double> pmf;  // pmf[n + radius]
  double tail_constant = 0.0;

  double p(int n) const {
    return n < -radius || n > radius ? 0.0 : pmf[static_cast<std::size_t>(n + radius)];
  }
};

Kernel build_kernel(double alpha, int radius);

class KernelSampler {
 public:
  explicit KernelSampler(const Kernel& k);
  std::int64_t operator()(std::mt19937_64& rng);

 private:
  double p_zero_;
  std::discrete_distribution<int> magnitude_;  // index m-1 for |n| = m
};

struct WalkConfig {
  std::int64_t L = 1;        // core half-width in sites
  std::int64_t T = 1;        // last time step
  std::int64_t buffer = 1;   // extra sites on each side; must be >= radius
  std::uint64_t seed = 0;
  bool births_all_times = true;  // false: only the time-0 walkers
  bool record_paths = true;      // keep every trajectory (needed for renormalize)
};

struct Cluster {
  std::int64_t site = 0;
  std::int64_t birth = 0;
  // Last time the cluster is its own top-level walker; -1 while alive at T.
  std::int64_t end = -1;
  std::int64_t absorbed_by = -1;
  bool frozen = false;
  std::vector<std::int32_t> positions;  // positions[m - birth] for m in [birth, end or T]
};

struct MergeEvent {
  std::int64_t time;
  std::int64_t absorbed;
  std::int64_t survivor;
};

struct WalkSystem {
  WalkConfig config;
  Kernel kernel;
  std::vector<Cluster> clusters;  // id = index; ids increase with (birth, site)
  std::vector<MergeEvent> merges;
  // After births at each time: live unfrozen clusters inside [-L, L], and overall.
  std::vector<std::int64_t> core_count;
  std::vector<std::int64_t> live_count;

  // A live cluster never absorbed an older one, so its earliest birth is its own.
  std::int64_t earliest_birth(std::int64_t id) const;
  // Cluster whose trajectory `id` follows at time m (itself or an absorber).
  std::int64_t carrier(std::int64_t id, std::int64_t m) const;
  std::int64_t position(std::int64_t id, std::int64_t m) const;
  // True when the trajectory of `id` runs into a frozen walker before T.
  bool touches_frozen(std::int64_t id) const;
};

WalkSystem simulate(const Kernel& kernel, const WalkConfig& cfg);

// Age path of cluster `id` in walk units on [birth + 1/2, end of its trajectory]:
// slope one, a(m + 1/2) = m + 1/2 - earliest birth among everything merged by time m.
PiecewisePath cluster_ages(const WalkSystem& ws, std::int64_t id);
// Position path in walk units: S_m on [m, m + 1), starting at birth + 1/2.
PiecewisePath cluster_positions(const WalkSystem& ws, std::int64_t id);

struct RenormalizeOptions {
  double origin_shift = 0.0;
  // Keep a cluster only if its own age passes age_floor (rescaled) before an older walker
  // absorbs it. Dropped paths cannot reach Pi_t for 2^-t >= age_floor. 0 keeps all.
  double age_floor = 0.0;
};

// Gamma^N: times divided by N and shifted, positions divided by N^{1/alpha}, ages divided
// by N. Trajectories that meet a frozen walker are left out.
PathCollection renormalize(const WalkSystem& ws, std::int64_t N, const RenormalizeOptions& opt = {});

}  // namespace stableweb
