// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance <path to stableweb CLI> <scratch directory> [criterion ids, e.g. 1,2,11]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stableweb/aged_path.hpp"
#include "stableweb/cadlag.hpp"
#include "stableweb/collection.hpp"
#include "stableweb/error.hpp"
#include "stableweb/experiments.hpp"
#include "stableweb/walkers.hpp"

using namespace stableweb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Step function on [0, 1] with up to max_jumps jumps at arbitrary times.
PiecewisePath random_step(std::mt19937_64& rng, int max_jumps, bool lattice) {
  std::uniform_int_distribution<int> njump(0, max_jumps);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> slot(1, 63);
  std::vector<double> at;
  for (int k = njump(rng); k > 0; --k) at.push_back(lattice ? slot(rng) / 64.0 : u(rng));
  std::sort(at.begin(), at.end());
  at.erase(std::unique(at.begin(), at.end()), at.end());
  std::vector<double> times{0.0}, values{2.0 * u(rng) - 1.0};
  for (double a : at) {
    if (a <= 0.0 || a >= 1.0) continue;
    times.push_back(a);
    values.push_back(2.0 * u(rng) - 1.0);
  }
  return PiecewisePath::step(0.0, 1.0, times, values);
}

Outcome metric_axioms() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const double r = 1.0 / 64.0;  // flat pieces: tolerance equals the resolution
  int asym = 0, tri = 0, ident = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const PiecewisePath f = random_step(rng, 6, true), g = random_step(rng, 6, true),
                        h = random_step(rng, 6, true);
    const double fg = path_dist(f, g, r).value, gf = path_dist(g, f, r).value;
    const double fh = path_dist(f, h, r).value, gh = path_dist(g, h, r).value;
    asym += fg != gf;
    tri += fh > fg + gh + 2.0 * r;
    ident += path_dist(f, f, r).value != 0.0;
    ident += (fg == 0.0) != f.same_as(g, 0.0);
  }
  const double secs = seconds_since(t0);
  return {asym == 0 && tri == 0 && ident == 0 && secs < 60.0,
          "asymmetric " + std::to_string(asym) + ", triangle " + std::to_string(tri) +
              ", identity " + std::to_string(ident) + " over 500 triples in " + fmt(secs, 3) + " s"};
}

Outcome extension_modulus() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> level(1, 8);
  int violations = 0, cases = 0;
  while (cases < 1000) {
    const PiecewisePath f = random_step(rng, 12, false);
    double c = u(rng), d = u(rng);
    if (c > d) std::swap(c, d);
    if (d - c < 1e-6) continue;
    const int n = level(rng);
    const double delta = std::exp2(-n);
    const PiecewisePath g = extend_flat(f, c, d, 0.0, 0.0);
    if (oscillation(g, delta, {c - 1.0, d + 1.0}) > oscillation(f, delta, {0.0, 1.0}) + 1e-12)
      ++violations;
    ++cases;
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(cases) + " cases"};
}

// An old path at g0 that steps by `kick` at `when`, shifted in time and space by eps.
AgedPath kicked(double g0, double when, double kick, double eps, double horizon) {
  const double sigma = -4.0;
  std::vector<Segment> g{{sigma, g0 + eps, 0.0}, {when + eps, g0 + kick + eps, 0.0}};
  return AgedPath(sigma, PiecewisePath(sigma, horizon, g), PiecewisePath::linear(sigma, horizon, 0.0, 1.0));
}

// A path born at sigma, drifting with `slope`.
AgedPath young(double sigma, double g0, double slope, double eps, double horizon) {
  const double e0 = 1e-3;
  const double s = sigma + eps;
  return AgedPath(s, PiecewisePath::linear(s + e0, horizon, g0 + eps, slope),
                  PiecewisePath::linear(s + e0, horizon, e0, 1.0));
}

PathCollection web_member(double eps) {
  const double H = 5.0;
  return PathCollection({kicked(0.0, 1.5, 0.6, eps, H), kicked(-0.8, 2.5, -0.3, eps, H),
                         young(0.3, 0.4, 0.1, eps, H), young(-1.2, 1.1, -0.2, eps, H)},
                        H);
}

Outcome topology_equivalence() {
  const PathCollection limit = web_member(0.0);
  // resolution 1e-3 gives tolerance 2e-3 here, so 1e-2 is a clean "converged" level
  const double t_max = 5.0, res = 1e-3, level = 1e-2;
  const int cells = 64;
  int k_dyadic = -1, k_inverse = -1;
  std::string trace;
  for (int k = 1; k <= 24 && (k_dyadic < 0 || k_inverse < 0); ++k) {
    const PathCollection gk = web_member(std::exp2(-k));
    const double a = web_dist(gk, limit, t_max, cells, res).value;
    const double b = web_dist_h(gk, limit, ThresholdFunction::inverse(), t_max, cells, res).value;
    if (k_dyadic < 0 && a < level) k_dyadic = k;
    if (k_inverse < 0 && b < level) k_inverse = k;
    trace += " k=" + std::to_string(k) + ":" + fmt(a, 3) + "/" + fmt(b, 3);
  }
  // eps halves with k, so two steps of k are a factor of four
  const bool ok = k_dyadic > 0 && k_inverse > 0 && std::abs(k_dyadic - k_inverse) <= 2;
  return {ok, "below 1e-2 at k = " + std::to_string(k_dyadic) + " (2^-t) and k = " +
                  std::to_string(k_inverse) + " (1/t); distances" + trace};
}

Outcome density(const std::string& out) {
  std::string detail;
  bool ok = true;
  for (double alpha : {2.0, 1.5}) {
    const auto t0 = std::chrono::steady_clock::now();
    DensityConfig cfg;
    cfg.alpha = alpha;
    const ExperimentReport r = density_scan(cfg);
    write_report(r, out + "/density_alpha" + fmt(alpha));
    const double secs = seconds_since(t0);
    const double slope = r.row("fit", "slope").value;
    const bool good = std::fabs(slope + 1.0 / alpha) <= 0.05 && secs <= 600.0;
    ok = ok && good;
    detail += "alpha " + fmt(alpha) + ": slope " + fmt(slope) + " (target " + fmt(-1.0 / alpha) +
              "), " + fmt(secs, 3) + " s; ";
  }
  return {ok, detail};
}

Outcome interval(const std::string& out) {
  const ExperimentReport r = interval_coalescence(IntervalConfig{});
  write_report(r, out + "/interval_coalescence");
  if (r.fits.empty()) return {false, "no fit"};
  const LinearFit& f = r.fits.front().line;
  return {f.slope < 0.0 && f.r_squared >= 0.9,
          "slope " + fmt(f.slope) + ", r^2 " + fmt(f.r_squared) + " over m in {4, 8, 16, 32}"};
}

Outcome insulation(const std::string& out) {
  const ExperimentReport r = insulation_probe(InsulationConfig{});
  write_report(r, out + "/insulation_probe");
  if (r.fits.empty()) return {false, "no fit"};
  const LinearFit& f = r.fits.front().line;
  const bool bound = r.row("all", "bound_holds").value == 1.0;
  return {f.slope < 0.0 && f.r_squared >= 0.9 && bound,
          "slope " + fmt(f.slope) + ", r^2 " + fmt(f.r_squared) + ", c_hat " +
              fmt(r.row("single_cell", "c_hat").value) + ", product bound " + (bound ? "holds" : "violated")};
}

Outcome avoidance(const std::string& out) {
  const ExperimentReport r = avoidance_exponent(AvoidanceConfig{});
  write_report(r, out + "/avoidance_exponent");
  try {
    const double four = r.row("four_path", "exponent").value;
    const double lo = r.row("four_path", "exponent_ci_lo").value;
    const double two = r.row("two_path", "exponent").value;
    const double pair = r.row("pair_sum", "exponent").value;
    const bool ok = four >= 2.8 && lo >= 2.5 && four > two && four > pair;
    return {ok, "four-path " + fmt(four) + " (CI lo " + fmt(lo) + "), two-path " + fmt(two) +
                    ", pair-sum " + fmt(pair)};
  } catch (const LookupError& e) {
    return {false, e.what()};
  }
}

Outcome renormalize_validity() {
  std::size_t paths = 0, violations = 0;
  int sims = 0;
  for (double alpha : {1.5, 2.0})
    for (std::int64_t N : {100, 1000}) {
      SampleConfig sc;
      sc.alpha = alpha;
      sc.N = N;
      sc.X = N >= 1000 ? 1.0 : 3.0;
      sc.shift = 1.0;
      sc.span = N >= 1000 ? 1.0 : 2.0;
      sc.age_floor = 0.0;  // every emitted path is checked
      for (int i = 0; i < 25; ++i, ++sims) {
        const PathCollection G = sample_collection(sc, 808, static_cast<std::uint64_t>(i));
        for (const AgedPath& p : G.paths()) violations += validate(p).size();
        paths += G.size();
      }
    }
  return {violations == 0 && sims == 100,
          std::to_string(violations) + " violations over " + std::to_string(paths) + " paths in " +
              std::to_string(sims) + " simulations"};
}

struct TightnessOutcome {
  Outcome pass_rates;
  Outcome ks;
};

TightnessOutcome tightness(const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  TightnessConfig cfg;
  const ExperimentReport r = tightness_scan(cfg);
  write_report(r, out + "/tightness_scan");
  bool ok9 = true;
  std::string d9;
  for (const char* p : {"N=200", "N=400"}) {
    const double rate = r.row(p, "pass_rate").value;
    const double e_fail = r.row(p, "max_fail_rate_E").value;
    ok9 = ok9 && rate >= 0.9 && e_fail == 0.0;
    d9 += std::string(p) + ": pass " + fmt(rate) + ", E fail " + fmt(e_fail) + ", E inconclusive " +
          fmt(r.row(p, "max_fail_rate_E_inconclusive").value) + "; ";
  }
  d9 += "calibrated at N=100 (" + fmt(seconds_since(t0), 3) + " s)";
  const double k1 = r.row("N=100->200", "ks_count").value;
  const double k2 = r.row("N=200->400", "ks_count").value;
  return {{ok9, d9},
          {k2 < k1, "KS(|Pi_2|) 100 vs 200: " + fmt(k1) + ", 200 vs 400: " + fmt(k2) +
                        " (surrogate only, not a rate of weak convergence)"}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism(const std::string& cli, const std::string& out) {
  const fs::path dir = fs::path(out) / "determinism";
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "insulation.json");
    cfg << R"({"N_values": [2, 3, 4], "seeds": 400, "seed": 5})";
  }
  {
    std::ofstream cfg(dir / "avoid.json");
    cfg << R"({"delta_values": [0.25, 0.125], "particles": 50, "bootstrap": 50, "seed": 3})";
  }
  const std::string q = "\"" + cli + "\"";
  const std::string d = "\"" + dir.string() + "\"";
  // each command runs twice; its CSV outputs (stdout and report.csv) must match byte for byte
  std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
      {q + " simulate --alpha 1.5 --L 300 --T 400 --N 100 --seed 7 --out " + d + "/sim@.json > " + d + "/sim@.csv",
       {"sim@.csv", "sim@.json"}},
      {q + " simulate --alpha 2 --L 400 --T 400 --N 100 --seed 7 --out " + d + "/sim2_@.json > " + d + "/sim2_@.csv",
       {"sim2_@.csv"}},
      {q + " dist --a " + d + "/sim1.json --b " + d + "/sim2_1.json --tmax 3 --cells 16 --resolution 1e-2 > " + d +
           "/dist@.csv",
       {"dist@.csv"}},
      {q + " experiment insulation_probe --config " + d + "/insulation.json --out " + d + "/ins@ > " + d + "/ins@.csv",
       {"ins@.csv", "ins@/report.csv"}},
      {q + " experiment avoidance_exponent --config " + d + "/avoid.json --out " + d + "/avo@ > " + d + "/avo@.csv",
       {"avo@.csv", "avo@/report.csv"}},
  };
  auto subst = [](std::string s, char k) {
    for (std::size_t p; (p = s.find('@')) != std::string::npos;) s[p] = k;
    return s;
  };
  int mismatches = 0, failures = 0, compared = 0;
  for (const auto& [cmd, files] : runs) {
    for (char k : {'1', '2'})
      if (std::system(subst(cmd, k).c_str()) != 0) ++failures;
    for (const std::string& f : files) {
      ++compared;
      const std::string a = slurp(dir / subst(f, '1')), b = slurp(dir / subst(f, '2'));
      if (a.empty() || a != b) ++mismatches;
    }
  }
  return {mismatches == 0 && failures == 0,
          std::to_string(compared) + " outputs compared across simulate, dist and experiment; " +
              std::to_string(mismatches) + " differ, " + std::to_string(failures) + " commands failed"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <stableweb cli> <scratch dir>\n";
    return 3;
  }
  const std::string cli = argv[1], out = argv[2];
  std::vector<int> only;
  if (argc > 3) {
    std::stringstream ids(argv[3]);
    for (std::string tok; std::getline(ids, tok, ',');) only.push_back(std::stoi(tok));
  }
  auto wanted = [&](int id) { return only.empty() || std::count(only.begin(), only.end(), id) > 0; };
  fs::create_directories(out);
  int failed = 0;
  auto report = [&](int id, const std::string& title, const std::function<Outcome()>& run) {
    if (!wanted(id)) return;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << id << " [" << (o.pass ? "PASS" : "FAIL") << "] " << title << ": " << o.detail
              << std::endl;
  };
  report(1, "path metric axioms", metric_axioms);
  report(2, "flat extension keeps the modulus", extension_modulus);
  report(3, "2^-t and 1/t thresholds agree on convergence", topology_equivalence);
  report(4, "cluster density exponent", [&] { return density(out); });
  report(5, "interval coalescence decay", [&] { return interval(out); });
  report(6, "insulation decay and product bound", [&] { return insulation(out); });
  report(7, "four-path avoidance exponent", [&] { return avoidance(out); });
  report(8, "renormalized paths are valid aged paths", renormalize_validity);
  TightnessOutcome t{{false, "not run"}, {false, "not run"}};
  try {
    if (wanted(9) || wanted(10)) t = tightness(out);
  } catch (const std::exception& e) {
    t = {{false, std::string("threw: ") + e.what()}, {false, "tightness scan threw"}};
  }
  report(9, "calibrated budget carries over to larger N", [&] { return t.pass_rates; });
  report(10, "KS distance of |Pi_2| shrinks with N", [&] { return t.ks; });
  report(11, "CLI output is deterministic", [&] { return cli_determinism(cli, out); });
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
