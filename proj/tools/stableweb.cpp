// stableweb command-line front end.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "stableweb/collection.hpp"
#include "stableweb/compactness.hpp"
#include "stableweb/error.hpp"
#include "stableweb/experiments.hpp"
#include "stableweb/json_io.hpp"
#include "stableweb/walkers.hpp"

namespace sw = stableweb;

namespace {

constexpr int kExperimentFailed = 2;
constexpr int kBadArguments = 3;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// A collection file, or a `simulate` bundle that carries one under "collection".
sw::PathCollection load_collection(const std::string& path) {
  const sw::json j = sw::read_json_file(path);
  if (j.is_object() && j.contains("collection")) return sw::collection_from_json(j.at("collection"));
  return sw::collection_from_json(j);
}

struct DistArgs {
  std::string a, b;
  double tmax = 5.0;
  int cells = 64;
  double resolution = 1e-3;
};

int run_dist(const DistArgs& d) {
  const sw::PathCollection A = load_collection(d.a);
  const sw::PathCollection B = load_collection(d.b);
  const sw::WebDistance w = sw::web_dist(A, B, d.tmax, d.cells, d.resolution);
  std::cout << "value,tail_bound,quad_cells\n"
            << fmt(w.value) << "," << fmt(w.tail_bound) << "," << w.quad_cells << "\n";
  return 0;
}

struct BudgetArgs {
  std::string dir;
  double eps = 0.05;
  std::string out = "budget.json";
  std::string report;  // CSV path; stdout when empty
  std::vector<double> t_grid = sw::default_t_grid();
  int n_max = 3;
};

std::string fail_rate_csv(const sw::CalibrationReport& rep) {
  std::string s = "t,condition,fail_rate\n";
  for (const sw::FailRate& f : rep.fail_rates)
    s += fmt(f.t) + "," + f.condition + "," + fmt(f.rate) + "\n";
  return s;
}

sw::json budget_json(const sw::Budget& b) {
  return {{"t", b.t}, {"M", b.M}, {"delta", b.delta}};
}

int run_check_budget(const BudgetArgs& a) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(a.dir)) throw sw::ArgumentError("not a directory: " + a.dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());  // directory order is not stable
  if (files.empty()) throw sw::ArgumentError("no .json collections in " + a.dir);
  std::vector<sw::PathCollection> samples;
  for (const fs::path& f : files) samples.push_back(load_collection(f.string()));

  auto emit = [&](const sw::CalibrationReport& rep) {
    const std::string csv = fail_rate_csv(rep);
    if (a.report.empty())
      std::cout << csv;
    else
      sw::write_text_file(a.report, csv);
  };
  try {
    const sw::CalibrationReport rep = sw::calibrate(samples, a.eps, a.t_grid, a.n_max);
    sw::write_text_file(a.out, budget_json(rep.budget).dump(2) + "\n");
    emit(rep);
    std::cerr << "pass rate " << fmt(rep.pass_rate) << " at quantile " << fmt(rep.quantile_level) << "\n";
    return 0;
  } catch (const sw::CalibrationError& e) {
    emit(e.best());
    throw;
  }
}

struct SimArgs {
  double alpha = 2.0;
  std::int64_t L = 1000;
  std::int64_t T = 1000;
  std::int64_t N = 0;  // 0: no renormalized collection
  std::int64_t buffer = -1;
  int radius = 0;
  std::uint64_t seed = 1;
  double shift = 0.0;
  double age_floor = 0.0;
  bool time0_only = false;
  std::string out;
};

int run_simulate(const SimArgs& s) {
  int radius = s.radius;
  if (s.alpha == 2.0)
    radius = 1;
  else if (radius <= 0)
    radius = static_cast<int>(std::min<std::int64_t>(s.L, 1 << 20));
  const sw::Kernel k = sw::build_kernel(s.alpha, radius);
  sw::WalkConfig wc;
  wc.L = s.L;
  wc.T = s.T;
  wc.buffer = s.buffer < 0 ? k.radius : s.buffer;
  wc.seed = s.seed;
  wc.births_all_times = !s.time0_only;
  wc.record_paths = s.N > 0;
  const sw::WalkSystem ws = sw::simulate(k, wc);

  std::int64_t frozen = 0;
  for (const sw::Cluster& c : ws.clusters) frozen += c.frozen ? 1 : 0;
  sw::json out = {
      {"config",
       {{"alpha", s.alpha}, {"L", s.L}, {"T", s.T}, {"N", s.N}, {"buffer", wc.buffer},
        {"radius", k.radius}, {"seed", s.seed}, {"shift", s.shift}, {"age_floor", s.age_floor},
        {"births_all_times", wc.births_all_times}}},
      {"kernel", {{"pmf", k.pmf}, {"tail_constant", k.tail_constant}}},
      {"merge_stats",
       {{"clusters", ws.clusters.size()}, {"merges", ws.merges.size()}, {"frozen", frozen},
        {"final_core_count", ws.core_count.back()}, {"final_live_count", ws.live_count.back()}}}};
  std::size_t paths = 0;
  if (s.N > 0) {
    const sw::PathCollection G = sw::renormalize(ws, s.N, {s.shift, s.age_floor});
    paths = G.size();
    out["collection"] = sw::to_json(G);
  }
  if (!s.out.empty()) sw::write_text_file(s.out, out.dump() + "\n");
  std::cout << "clusters,merges,frozen,final_core_count,final_live_count,paths\n"
            << ws.clusters.size() << "," << ws.merges.size() << "," << frozen << ","
            << ws.core_count.back() << "," << ws.live_count.back() << "," << paths << "\n";
  return 0;
}

struct ExpArgs {
  std::string name;
  std::string config;
  std::string out = "report";
};

int run_experiment_cmd(const ExpArgs& e) {
  const sw::json cfg = e.config.empty() ? sw::json::object() : sw::read_json_file(e.config);
  const sw::ExperimentReport r = sw::run_experiment(e.name, cfg);
  sw::write_report(r, e.out);
  std::cout << sw::report_csv(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable web toolkit: metrics, compactness budgets, walk simulations, experiments"};
  app.require_subcommand(1);

  DistArgs dist;
  auto* c_dist = app.add_subcommand("dist", "Web distance between two collections");
  c_dist->add_option("--a", dist.a, "First collection JSON")->required();
  c_dist->add_option("--b", dist.b, "Second collection JSON")->required();
  c_dist->add_option("--tmax", dist.tmax, "Upper quadrature limit");
  c_dist->add_option("--cells", dist.cells, "Quadrature cells");
  c_dist->add_option("--resolution", dist.resolution, "Path distance grid spacing");

  BudgetArgs budget;
  auto* c_budget = app.add_subcommand("check-budget", "Calibrate a compactness budget");
  c_budget->add_option("--collections", budget.dir, "Directory of collection JSON files")->required();
  c_budget->add_option("--eps", budget.eps, "Allowed failure probability");
  c_budget->add_option("--out", budget.out, "Budget JSON output");
  c_budget->add_option("--report", budget.report, "Fail-rate CSV output (default stdout)");
  c_budget->add_option("--t-grid", budget.t_grid, "Grid of t values");
  c_budget->add_option("--n-max", budget.n_max, "Largest dyadic level n");

  SimArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run coalescing walks and renormalize");
  c_sim->add_option("--alpha", sim.alpha, "Stability index in (1, 2]");
  c_sim->add_option("--L", sim.L, "Core half-width in sites");
  c_sim->add_option("--T", sim.T, "Number of time steps");
  c_sim->add_option("--N", sim.N, "Scaling parameter (0 skips the collection)");
  c_sim->add_option("--radius", sim.radius, "Kernel radius for alpha < 2 (default L)");
  c_sim->add_option("--buffer", sim.buffer, "Buffer sites (default radius)");
  c_sim->add_option("--seed", sim.seed, "Random seed");
  c_sim->add_option("--shift", sim.shift, "Time origin shift, rescaled units");
  c_sim->add_option("--age-floor", sim.age_floor, "Drop clusters absorbed younger than this");
  c_sim->add_flag("--time0-only", sim.time0_only, "Births at time 0 only");
  c_sim->add_option("--out", sim.out, "JSON output");

  ExpArgs exp;
  auto* c_exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  c_exp->add_option("name", exp.name, "Experiment name")->required();
  c_exp->add_option("--config", exp.config, "Config JSON");
  c_exp->add_option("--out", exp.out, "Report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kBadArguments;
  }

  try {
    if (*c_dist) return run_dist(dist);
    if (*c_budget) return run_check_budget(budget);
    if (*c_sim) return run_simulate(sim);
    if (*c_exp) return run_experiment_cmd(exp);
  } catch (const sw::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExperimentFailed;
  }
  return kBadArguments;
}
