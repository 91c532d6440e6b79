#include "stableweb/walkers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stableweb/error.hpp"

namespace stableweb {

Kernel build_kernel(double alpha, int radius) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ArgumentError("alpha must lie in (1, 2]");
  if (radius < 1) throw ArgumentError("kernel radius must be >= 1");
  Kernel k;
  k.alpha = alpha;
  if (alpha == 2.0) {
    k.radius = 1;
    k.pmf = {0.25, 0.5, 0.25};
    k.tail_constant = 0.25;
    return k;
  }
  k.radius = radius;
  // sum the small terms first
  double z = 0.0;
  for (int n = radius; n >= 1; --n) z += std::pow(static_cast<double>(n), -(1.0 + alpha));
  k.tail_constant = 0.25 / z;
  k.pmf.assign(2 * static_cast<std::size_t>(radius) + 1, 0.0);
  k.pmf[static_cast<std::size_t>(radius)] = 0.5;
  for (int n = 1; n <= radius; ++n) {
    const double v = k.tail_constant * std::pow(static_cast<double>(n), -(1.0 + alpha));
    k.pmf[static_cast<std::size_t>(radius + n)] = v;
    k.pmf[static_cast<std::size_t>(radius - n)] = v;
  }
  return k;
}

KernelSampler::KernelSampler(const Kernel& k) : p_zero_(k.p(0)) {
  std::vector<double> w;
  for (int n = 1; n <= k.radius; ++n) w.push_back(k.p(n));
  magnitude_ = std::discrete_distribution<int>(w.begin(), w.end());
}

std::int64_t KernelSampler::operator()(std::mt19937_64& rng) {
  // one 64-bit draw decides stay / sign; the magnitude comes from the tail table
  const std::uint64_t u = rng();
  const double v = static_cast<double>(u >> 11) * 0x1.0p-53;
  if (v < p_zero_) return 0;
  const std::int64_t m = magnitude_(rng) + 1;
  return (u & 1u) ? m : -m;
}

std::int64_t WalkSystem::earliest_birth(std::int64_t id) const {
  std::int64_t c = id;
  while (clusters.at(static_cast<std::size_t>(c)).absorbed_by >= 0)
    c = clusters[static_cast<std::size_t>(c)].absorbed_by;
  return clusters[static_cast<std::size_t>(c)].birth;
}

std::int64_t WalkSystem::carrier(std::int64_t id, std::int64_t m) const {
  if (id < 0 || static_cast<std::size_t>(id) >= clusters.size())
    throw LookupError("unknown cluster id " + std::to_string(id));
  std::int64_t c = id;
  for (;;) {
    const Cluster& cl = clusters[static_cast<std::size_t>(c)];
    if (m < cl.birth) throw DomainError("time before the cluster's birth");
    if (cl.end < 0 || m <= cl.end) return c;
    if (cl.absorbed_by < 0) throw DomainError("trajectory stopped at a frozen walker");
    c = cl.absorbed_by;
  }
}

std::int64_t WalkSystem::position(std::int64_t id, std::int64_t m) const {
  if (!config.record_paths) throw LookupError("trajectories were not recorded");
  if (m > config.T) throw DomainError("time beyond T");
  const Cluster& cl = clusters[static_cast<std::size_t>(carrier(id, m))];
  return cl.positions.at(static_cast<std::size_t>(m - cl.birth));
}

bool WalkSystem::touches_frozen(std::int64_t id) const {
  std::int64_t c = id;
  for (;;) {
    const Cluster& cl = clusters.at(static_cast<std::size_t>(c));
    if (cl.frozen) return true;
    if (cl.absorbed_by < 0) return false;
    c = cl.absorbed_by;
  }
}

WalkSystem simulate(const Kernel& kernel, const WalkConfig& cfg) {
  if (cfg.L < 1 || cfg.T < 1) throw ArgumentError("simulate needs L >= 1 and T >= 1");
  if (cfg.buffer < kernel.radius) throw ArgumentError("buffer must be at least the kernel radius");
  const std::int64_t edge = cfg.L + cfg.buffer;
  if (edge > std::numeric_limits<std::int32_t>::max() / 2)
    throw ArgumentError("window too wide for 32-bit positions");

  WalkSystem ws;
  ws.config = cfg;
  ws.kernel = kernel;
  std::mt19937_64 rng(cfg.seed);
  KernelSampler step(kernel);

  const std::size_t width = static_cast<std::size_t>(2 * edge + 1);
  std::vector<std::int64_t> occ_id(width, -1), occ_time(width, -1);
  std::vector<std::int64_t> live, next;
  std::vector<std::int64_t> pos;  // current position by id

  auto born = [&](std::int64_t x, std::int64_t m) {
    Cluster c;
    c.site = x;
    c.birth = m;
    if (cfg.record_paths) c.positions.push_back(static_cast<std::int32_t>(x));
    ws.clusters.push_back(std::move(c));
    pos.push_back(x);
    return static_cast<std::int64_t>(ws.clusters.size()) - 1;
  };
  auto tally = [&](const std::vector<std::int64_t>& ids) {
    std::int64_t core = 0;
    for (std::int64_t id : ids)
      if (std::llabs(pos[static_cast<std::size_t>(id)]) <= cfg.L) ++core;
    ws.core_count.push_back(core);
    ws.live_count.push_back(static_cast<std::int64_t>(ids.size()));
  };

  for (std::int64_t x = -edge; x <= edge; ++x) live.push_back(born(x, 0));
  tally(live);

  for (std::int64_t m = 1; m <= cfg.T; ++m) {
    next.clear();
    // ascending ids: the first walker to reach a site is the oldest one there
    for (std::int64_t id : live) {
      std::int64_t& x = pos[static_cast<std::size_t>(id)];
      x += step(rng);
      Cluster& c = ws.clusters[static_cast<std::size_t>(id)];
      if (cfg.record_paths) c.positions.push_back(static_cast<std::int32_t>(x));
      if (x < -edge || x > edge) {
        c.frozen = true;
        c.end = m;
        continue;
      }
      const std::size_t k = static_cast<std::size_t>(x + edge);
      if (occ_time[k] == m) {
        c.end = m;
        c.absorbed_by = occ_id[k];
        ws.merges.push_back({m, id, occ_id[k]});
        continue;
      }
      occ_time[k] = m;
      occ_id[k] = id;
      next.push_back(id);
    }
    // a walker born at T would have an empty domain
    if (cfg.births_all_times && m < cfg.T)
      for (std::int64_t x = -edge; x <= edge; ++x)
        if (occ_time[static_cast<std::size_t>(x + edge)] != m) next.push_back(born(x, m));
    live.swap(next);
    tally(live);
  }
  return ws;
}

namespace {

const Cluster& lookup(const WalkSystem& ws, std::int64_t id) {
  if (id < 0 || static_cast<std::size_t>(id) >= ws.clusters.size())
    throw LookupError("unknown cluster id " + std::to_string(id));
  return ws.clusters[static_cast<std::size_t>(id)];
}

// Last time the trajectory of `id` is known: T, or the step at which it froze.
std::int64_t trajectory_end(const WalkSystem& ws, std::int64_t id) {
  std::int64_t c = id;
  for (;;) {
    const Cluster& cl = ws.clusters[static_cast<std::size_t>(c)];
    if (cl.frozen) return cl.end;
    if (cl.absorbed_by < 0) return ws.config.T;
    c = cl.absorbed_by;
  }
}

}  // namespace

PiecewisePath cluster_ages(const WalkSystem& ws, std::int64_t id) {
  const Cluster& first = lookup(ws, id);
  if (first.birth >= ws.config.T) throw DomainError("cluster born at T has no age path");
  const double lo = static_cast<double>(first.birth) + 0.5;
  const double hi = static_cast<double>(trajectory_end(ws, id));
  std::vector<Segment> segs{{lo, 0.5, 1.0}};
  std::int64_t eb = first.birth;
  for (const Cluster* c = &first; c->absorbed_by >= 0;) {
    const Cluster& s = ws.clusters[static_cast<std::size_t>(c->absorbed_by)];
    const double at = static_cast<double>(c->end) + 0.5;
    if (at > hi) break;
    if (s.birth < eb) {
      eb = s.birth;
      segs.push_back({at, at - static_cast<double>(eb), 1.0});
    }
    c = &s;
  }
  return PiecewisePath(lo, hi, std::move(segs));
}

PiecewisePath cluster_positions(const WalkSystem& ws, std::int64_t id) {
  const Cluster& first = lookup(ws, id);
  if (!ws.config.record_paths) throw LookupError("trajectories were not recorded");
  if (first.birth >= ws.config.T) throw DomainError("cluster born at T has no path");
  const std::int64_t end = trajectory_end(ws, id);
  const double lo = static_cast<double>(first.birth) + 0.5;
  std::vector<Segment> segs{{lo, static_cast<double>(first.positions.front()), 0.0}};
  std::int64_t c = id;
  for (std::int64_t m = first.birth + 1; m <= end; ++m) {
    while (ws.clusters[static_cast<std::size_t>(c)].end >= 0 &&
           m > ws.clusters[static_cast<std::size_t>(c)].end)
      c = ws.clusters[static_cast<std::size_t>(c)].absorbed_by;
    const Cluster& cl = ws.clusters[static_cast<std::size_t>(c)];
    const double v = cl.positions[static_cast<std::size_t>(m - cl.birth)];
    if (v != segs.back().value) segs.push_back({static_cast<double>(m), v, 0.0});
  }
  return PiecewisePath(lo, static_cast<double>(end), std::move(segs));
}

PathCollection renormalize(const WalkSystem& ws, std::int64_t N, const RenormalizeOptions& opt) {
  if (N < 1) throw ArgumentError("N must be >= 1");
  if (ws.config.T % N != 0) throw ArgumentError("N must divide T");
  if (!ws.config.record_paths) throw ArgumentError("renormalize needs recorded trajectories");
  const double n = static_cast<double>(N);
  const double space = std::pow(n, 1.0 / ws.kernel.alpha);
  const double floor_steps = opt.age_floor * n;
  auto time = [&](double u) { return u / n - opt.origin_shift; };
  const double horizon = time(static_cast<double>(ws.config.T));

  std::vector<AgedPath> paths;
  for (std::size_t i = 0; i < ws.clusters.size(); ++i) {
    const Cluster& c = ws.clusters[i];
    const auto id = static_cast<std::int64_t>(i);
    if (c.birth >= ws.config.T || ws.touches_frozen(id)) continue;
    if (opt.age_floor > 0.0) {
      const double own = c.absorbed_by >= 0 ? static_cast<double>(c.end - c.birth) + 0.5
                                            : static_cast<double>(ws.config.T - c.birth);
      const bool strict = c.absorbed_by >= 0;
      if (strict ? !(own > floor_steps) : own < floor_steps) continue;
    }
    std::vector<Segment> g, a;
    const PiecewisePath pos = cluster_positions(ws, id);
    const PiecewisePath age = cluster_ages(ws, id);
    for (const Segment& s : pos.segments()) g.push_back({time(s.start), s.value / space, 0.0});
    for (const Segment& s : age.segments())
      a.push_back({time(s.start), s.value / n, 1.0});
    const double lo = g.front().start;
    paths.emplace_back(time(static_cast<double>(c.birth)), PiecewisePath(lo, horizon, std::move(g)),
                       PiecewisePath(lo, horizon, std::move(a)));
  }
  return PathCollection(std::move(paths), horizon,
                        "alpha=" + std::to_string(ws.kernel.alpha) + " N=" + std::to_string(N));
}

}  // namespace stableweb
