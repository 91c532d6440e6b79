#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "stableweb/error.hpp"
#include "stableweb/walkers.hpp"

using namespace stableweb;

TEST_CASE("build_kernel: nearest-neighbour case") {
  const Kernel k = build_kernel(2.0, 17);
  CHECK(k.radius == 1);
  CHECK(k.p(-1) == 0.25);
  CHECK(k.p(0) == 0.5);
  CHECK(k.p(1) == 0.25);
  CHECK(k.p(2) == 0.0);
  CHECK_THROWS_AS(build_kernel(1.0, 10), ArgumentError);
  CHECK_THROWS_AS(build_kernel(2.5, 10), ArgumentError);
  CHECK_THROWS_AS(build_kernel(1.5, 0), ArgumentError);
}

TEST_CASE("build_kernel: heavy tail") {
  const Kernel k = build_kernel(1.5, 1000);
  double total = 0.0, mean = 0.0;
  for (int n = -1000; n <= 1000; ++n) {
    total += k.p(n);
    mean += n * k.p(n);
    CHECK(k.p(n) == k.p(-n));
  }
  CHECK(std::fabs(total - 1.0) < 1e-12);
  CHECK(std::fabs(mean) < 1e-15);
  for (int n = 250; n <= 1000; ++n) {
    const double c = std::pow(n, 2.5) * k.p(n);
    CHECK(std::fabs(c / k.tail_constant - 1.0) < 0.05);
  }
}

TEST_CASE("kernel sampler matches the pmf (chi-square)") {
  for (double alpha : {1.5, 2.0}) {
    const Kernel k = build_kernel(alpha, 40);
    KernelSampler draw(k);
    std::mt19937_64 rng(2024);
    std::map<std::int64_t, double> counts;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) counts[draw(rng)] += 1.0;
    // pool the far tail on each side so every bin expects >= 5
    int tail = k.radius;
    while (tail > 1 && n * k.p(tail) < 5.0 * tail) --tail;
    double chi = 0.0;
    int bins = 0;
    for (int v = -tail + 1; v <= tail - 1; ++v) {
      const double e = n * k.p(v);
      chi += (counts[v] - e) * (counts[v] - e) / e;
      ++bins;
    }
    for (int side : {-1, 1}) {
      double e = 0.0, o = 0.0;
      for (int m = tail; m <= k.radius; ++m) {
        e += n * k.p(side * m);
        o += counts[side * m];
      }
      if (e > 0.0) {
        chi += (o - e) * (o - e) / e;
        ++bins;
      }
    }
    const boost::math::chi_squared dist(bins - 1);
    const double p = boost::math::cdf(boost::math::complement(dist, chi));
    INFO("alpha " << alpha << " chi2 " << chi << " bins " << bins);
    CHECK(p > 0.001);
  }
}

TEST_CASE("simulate: determinism, occupancy and coalescence") {
  const Kernel k = build_kernel(1.5, 8);
  WalkConfig cfg;
  cfg.L = 20;
  cfg.T = 60;
  cfg.buffer = 8;
  cfg.seed = 99;
  const WalkSystem a = simulate(k, cfg);
  const WalkSystem b = simulate(k, cfg);
  REQUIRE(a.clusters.size() == b.clusters.size());
  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    CHECK(a.clusters[i].positions == b.clusters[i].positions);
    CHECK(a.clusters[i].end == b.clusters[i].end);
  }
  REQUIRE(a.merges.size() == b.merges.size());

  const std::int64_t edge = cfg.L + cfg.buffer;
  for (std::int64_t m = 0; m < cfg.T; ++m) {
    // live walkers at time m are those with end < 0 or end > m; born at m counts too
    std::set<std::int64_t> sites;
    std::int64_t live = 0;
    for (std::size_t i = 0; i < a.clusters.size(); ++i) {
      const Cluster& c = a.clusters[i];
      if (c.birth > m || (c.end >= 0 && c.end <= m)) continue;
      ++live;
      sites.insert(c.positions[static_cast<std::size_t>(m - c.birth)]);
    }
    CHECK(static_cast<std::int64_t>(sites.size()) == live);  // one cluster per site
    CHECK(live == a.live_count[static_cast<std::size_t>(m)]);
    CHECK(live >= 2 * edge + 1);                               // full occupancy
  }

  for (const MergeEvent& e : a.merges) {
    CHECK(e.survivor < e.absorbed);
    CHECK(a.clusters[e.absorbed].birth >= a.clusters[e.survivor].birth);
    // once together, together for good
    for (std::int64_t m = e.time; m <= cfg.T; ++m) {
      if (a.touches_frozen(e.survivor)) break;
      CHECK(a.position(e.absorbed, m) == a.position(e.survivor, m));
    }
  }
  CHECK_THROWS_AS(cluster_ages(a, -1), LookupError);
  CHECK_THROWS_AS(cluster_ages(a, static_cast<std::int64_t>(a.clusters.size())), LookupError);
}

TEST_CASE("simulate: time-0 births coalesce monotonically") {
  WalkConfig cfg;
  cfg.L = 200;
  cfg.T = 400;
  cfg.buffer = 1;
  cfg.seed = 5;
  cfg.births_all_times = false;
  cfg.record_paths = false;
  const WalkSystem ws = simulate(build_kernel(2.0, 1), cfg);
  CHECK(ws.core_count[0] == 2 * cfg.L + 1);
  for (std::size_t m = 1; m < ws.live_count.size(); ++m) CHECK(ws.live_count[m] <= ws.live_count[m - 1]);
  CHECK(ws.live_count.back() < ws.live_count.front() / 4);
  CHECK_THROWS_AS(renormalize(ws, 4), ArgumentError);
}

TEST_CASE("cluster_ages: merge into an older cluster") {
  WalkSystem ws;
  ws.config.T = 20;
  ws.kernel = build_kernel(2.0, 1);
  Cluster old, young;
  old.site = 0;
  old.birth = 0;
  old.positions.assign(21, 0);
  young.site = 1;
  young.birth = 5;
  young.end = 10;
  young.absorbed_by = 0;
  young.positions = {1, 1, 1, 1, 1, 0};
  ws.clusters = {old, young};
  ws.merges = {{10, 1, 0}};

  const PiecewisePath a0 = cluster_ages(ws, 0);
  CHECK(a0.lo() == 0.5);
  CHECK(a0.eval(7.25) == 7.25);
  const PiecewisePath a1 = cluster_ages(ws, 1);
  CHECK(a1.lo() == 5.5);
  CHECK(a1.eval_left(10.5) == doctest::Approx(10.5 - 5.0));
  CHECK(a1.eval(10.5) == 10.5);
  CHECK(a1.eval(20.0) == 20.0);
  const PiecewisePath g1 = cluster_positions(ws, 1);
  CHECK(g1.eval(9.9) == 1.0);
  CHECK(g1.eval(10.0) == 0.0);
  CHECK(g1.eval(20.0) == 0.0);

  const AgedPath p(5.0, g1, a1);
  CHECK(validate(p).empty());
}

TEST_CASE("cluster_ages: no merges means a(s) = s - r") {
  WalkConfig cfg;
  cfg.L = 30;
  cfg.T = 50;
  cfg.buffer = 3;
  cfg.seed = 11;
  const WalkSystem ws = simulate(build_kernel(1.7, 3), cfg);
  int checked = 0;
  for (std::size_t i = 0; i < ws.clusters.size(); ++i) {
    const Cluster& c = ws.clusters[i];
    if (c.end >= 0 || c.birth >= cfg.T) continue;
    const PiecewisePath a = cluster_ages(ws, static_cast<std::int64_t>(i));
    for (double s = c.birth + 0.5; s <= cfg.T; s += 0.75) {
      // a live walker may have absorbed younger ones; its age is untouched by them
      CHECK(a.eval(s) == s - c.birth);
    }
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("renormalize: scaling and Definition-style invariants") {
  WalkConfig cfg;
  cfg.L = 12;
  cfg.T = 32;
  cfg.buffer = 1;
  cfg.seed = 3;
  const WalkSystem ws = simulate(build_kernel(2.0, 1), cfg);

  const PathCollection raw = renormalize(ws, 1);
  const PathCollection G = renormalize(ws, 16);
  CHECK(G.horizon() == 2.0);
  CHECK_THROWS_AS(renormalize(ws, 5), ArgumentError);

  std::size_t j = 0;
  for (std::size_t i = 0; i < ws.clusters.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i);
    if (ws.clusters[i].birth >= cfg.T || ws.touches_frozen(id)) continue;
    const AgedPath& p1 = raw.paths()[j];
    const AgedPath& p16 = G.paths()[j];
    ++j;
    CHECK(p1.sigma() == ws.clusters[i].birth);
    for (std::int64_t m = ws.clusters[i].birth + 1; m <= cfg.T; ++m)
      CHECK(p1.gamma().eval(static_cast<double>(m)) == ws.position(id, m));
    if (ws.clusters[i].birth == 0)
      CHECK(p16.gamma().eval(1.0) == ws.position(id, 16) / 4.0);
  }
  CHECK(j == G.size());
  for (const AgedPath& p : G.paths()) CHECK(validate(p).empty());
  for (const AgedPath& p : raw.paths()) CHECK(validate(p).empty());
}

TEST_CASE("renormalize: every path valid across kernels") {
  for (double alpha : {1.5, 2.0}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      WalkConfig cfg;
      cfg.L = 40;
      cfg.T = 100;
      cfg.buffer = 12;
      cfg.seed = seed;
      const WalkSystem ws = simulate(build_kernel(alpha, 12), cfg);
      const PathCollection G = renormalize(ws, 50, {1.0, 0.0});
      CHECK(G.horizon() == 1.0);
      std::size_t bad = 0;
      for (const AgedPath& p : G.paths()) bad += validate(p).empty() ? 0 : 1;
      CHECK(bad == 0);
    }
  }
}

TEST_CASE("renormalize: age-floor pruning keeps every projection above the floor") {
  WalkConfig cfg;
  cfg.L = 24;
  cfg.T = 96;
  cfg.buffer = 4;
  cfg.seed = 17;
  const WalkSystem ws = simulate(build_kernel(2.0, 1), cfg);
  const std::int64_t N = 16;
  const PathCollection full = renormalize(ws, N, {3.0, 0.0});
  const PathCollection pruned = renormalize(ws, N, {3.0, 0.125});
  CHECK(pruned.size() < full.size());
  for (double t : {1.0, 1.7, 2.5, 3.0}) {
    const auto A = project_collection(full, t);
    const auto B = project_collection(pruned, t);
    REQUIRE(A.size() == B.size());
    for (const TruncatedPath& x : A) {
      bool found = false;
      for (const TruncatedPath& y : B)
        found = found || (std::fabs(x.b - y.b) < 1e-12 && agrees_on(x, y) && agrees_on(y, x));
      CHECK(found);
    }
  }
}
