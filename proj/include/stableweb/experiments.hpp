#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stableweb/collection.hpp"
#include "stableweb/compactness.hpp"
#include "stableweb/json_io.hpp"
#include "stableweb/stats.hpp"

namespace stableweb {

// One row of the long-format report. se is 0 for exact quantities.
struct ReportRow {
  std::string param;
  std::string metric;
  double value = 0.0;
  double se = 0.0;
};

struct ReportFit {
  std::string x;  // what was regressed, e.g. "log t"
  std::string y;
  LinearFit line;
  double slope_se = 0.0;
  Interval95 slope_ci;
};

struct ExperimentReport {
  std::string name;
  json params = json::object();
  std::size_t samples = 0;
  std::vector<ReportRow> estimates;
  std::vector<ReportFit> fits;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> notes;

  void add(std::string param, std::string metric, double value, double se = 0.0) {
    estimates.push_back({std::move(param), std::move(metric), value, se});
  }
  // First row matching (param, metric); LookupError otherwise.
  const ReportRow& row(const std::string& param, const std::string& metric) const;
};

std::string report_csv(const ExperimentReport& r);
json report_json(const ExperimentReport& r);
std::string plot_script(const ExperimentReport& r);
// Writes report.csv, report.json and plot.gp into dir (created if missing).
void write_report(const ExperimentReport& r, const std::string& dir);

// Independent stream for (base seed, index, stream tag).
std::mt19937_64 seeded_rng(std::uint64_t base, std::uint64_t index, std::uint64_t stream);

// Settings shared by every experiment.
struct RunSettings {
  std::uint64_t seed = 1;
  int batches = 20;
};

struct DensityConfig {
  double alpha = 2.0;
  std::int64_t L = 100000;
  std::vector<std::int64_t> times{16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192};
  int seeds = 50;
  int radius = 10000;  // ignored for alpha = 2
  RunSettings run;
};
ExperimentReport density_scan(const DensityConfig& cfg);

struct IntervalConfig {
  std::vector<int> m_values{4, 8, 16, 32};
  double interval_len = 1.0;
  double c_trial = 1.8;
  int sites_per_unit = 256;
  int seeds = 10000;
  RunSettings run;
};
ExperimentReport interval_coalescence(const IntervalConfig& cfg);

struct InsulationConfig {
  std::vector<int> N_values{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  int sites_per_unit = 16;
  double age = 0.25;     // paths must be older than this at time 0
  double window = 0.25;  // and stay in their cell over [0, window]
  int margin = 1;        // extra unit cells on each side of the lattice
  int seeds = 10000;
  RunSettings run;
};
ExperimentReport insulation_probe(const InsulationConfig& cfg);

struct AvoidanceConfig {
  std::vector<double> delta_values{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  int gap_sites = 4;         // initial neighbour gap on the finest lattice
  int resolution = 8;        // coarse sites per standard deviation before coarsening
  int particles = 400;       // per batch and stage
  bool splitting = true;     // false: plain Monte Carlo with `particles` walkers per batch
  int bootstrap = 200;
  RunSettings run;
};
ExperimentReport avoidance_exponent(const AvoidanceConfig& cfg);

// Walk-based Gamma^N samples shared by several probes.
struct SampleConfig {
  double alpha = 2.0;
  std::int64_t N = 100;
  double X = 6.0;           // spatial half-width of the core, rescaled units
  int radius = 0;           // alpha < 2: kernel radius in sites; 0 means the core width
  double shift = 4.0;       // time origin shift
  double span = 8.0;        // simulated time span, rescaled (T = span N)
  double age_floor = 0.125;
};
PathCollection sample_collection(const SampleConfig& cfg, std::uint64_t base_seed,
                                 std::uint64_t index);

struct BirthModulusConfig {
  std::vector<int> n0_values{2, 3, 4, 5, 6};
  SampleConfig sample{2.0, 64, 3.0, 0, 1.0, 2.0, 0.0};
  double box_lo = 0.5;
  double box_hi = 1.0;
  int seeds = 1000;
  RunSettings run;
};
// sum_{n >= n0} n 2^{-n/2}
double birth_threshold(int n0);
ExperimentReport birth_modulus(const BirthModulusConfig& cfg);

struct TightnessConfig {
  std::vector<std::int64_t> N_values{100, 200, 400};
  double eps = 0.05;
  int samples = 200;
  SampleConfig sample;
  std::vector<double> t_grid = default_t_grid();
  int n_max = 3;
  double ks_t = 2.0;
  RunSettings run;
};
ExperimentReport tightness_scan(const TightnessConfig& cfg);

// Parses a JSON config (unknown keys are argument errors) and runs the named experiment.
ExperimentReport run_experiment(const std::string& name, const json& config);
std::vector<std::string> experiment_names();

}  // namespace stableweb
