#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "stableweb/error.hpp"
#include "stableweb/experiments.hpp"

namespace stableweb {

const ReportRow& ExperimentReport::row(const std::string& param, const std::string& metric) const {
  for (const ReportRow& r : estimates)
    if (r.param == param && r.metric == metric) return r;
  throw LookupError("no report row " + param + "/" + metric);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Quotes a CSV field only when it needs it.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv(const ExperimentReport& r) {
  std::string out = "param,metric,value,stderr\n";
  for (const ReportRow& row : r.estimates)
    out += csv_field(row.param) + "," + csv_field(row.metric) + "," + fmt(row.value) + "," +
           fmt(row.se) + "\n";
  return out;
}

json report_json(const ExperimentReport& r) {
  json est = json::array();
  for (const ReportRow& row : r.estimates)
    est.push_back({{"param", row.param}, {"metric", row.metric}, {"value", row.value},
                   {"stderr", row.se}});
  json fits = json::array();
  for (const ReportFit& f : r.fits)
    fits.push_back({{"x", f.x},
                    {"y", f.y},
                    {"slope", f.line.slope},
                    {"intercept", f.line.intercept},
                    {"r_squared", f.line.r_squared},
                    {"slope_stderr", f.slope_se},
                    {"slope_ci95", {f.slope_ci.lo, f.slope_ci.hi}}});
  json out = {{"name", r.name},       {"params", r.params}, {"samples", r.samples},
              {"estimates", est},     {"seeds", r.seeds},   {"notes", r.notes}};
  out["fit"] = fits.empty() ? json(nullptr) : fits.front();
  out["fits"] = fits;
  return out;
}

std::string plot_script(const ExperimentReport& r) {
  // one panel per metric that varies over more than one param value
  std::map<std::string, int> per_metric;
  for (const ReportRow& row : r.estimates) ++per_metric[row.metric];
  std::ostringstream g;
  g << "# gnuplot script for " << r.name << "; run: gnuplot plot.gp\n"
    << "set datafile separator ','\n"
    << "set terminal pngcairo size 900,600\n"
    << "set key outside\n"
    << "set xtics rotate by 45 right\n";
  for (const auto& [metric, n] : per_metric) {
    if (n < 2) continue;
    g << "\nset output '" << r.name << "_" << metric << ".png'\n"
      << "set title '" << metric << "'\n"
      << "plot 'report.csv' every ::1 using 0:(strcol(2) eq '" << metric
      << "' ? $3 : 1/0):(strcol(2) eq '" << metric << "' ? $4 : 1/0):xtic(1) "
      << "with yerrorbars title '" << metric << "'\n";
  }
  return g.str();
}

void write_report(const ExperimentReport& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ArgumentError("cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  write_text_file((d / "report.csv").string(), report_csv(r));
  write_text_file((d / "report.json").string(), report_json(r).dump(2) + "\n");
  write_text_file((d / "plot.gp").string(), plot_script(r));
}

std::mt19937_64 seeded_rng(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------- config parsing

namespace {

// Reads keys from a JSON object and remembers which were used, so leftovers are errors.
class ConfigReader {
 public:
  explicit ConfigReader(const json& j) : j_(j) {
    if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ArgumentError(std::string("config key '") + key + "': " + e.what());
    }
  }

  void run(RunSettings& rs) {
    get("seed", rs.seed);
    get("batches", rs.batches);
  }

  void sample(SampleConfig& s) {
    used_.insert("sample");
    if (!j_.contains("sample")) return;
    ConfigReader sub(j_.at("sample"));
    sub.get("alpha", s.alpha);
    sub.get("N", s.N);
    sub.get("X", s.X);
    sub.get("radius", s.radius);
    sub.get("shift", s.shift);
    sub.get("span", s.span);
    sub.get("age_floor", s.age_floor);
    sub.finish("sample");
  }

  void finish(const std::string& where) const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ArgumentError("unknown key '" + k + "' in " + where + " config");
  }

 private:
  const json& j_;
  std::set<std::string> used_;
};

}  // namespace

std::vector<std::string> experiment_names() {
  return {"density_scan", "interval_coalescence", "insulation_probe", "avoidance_exponent",
          "birth_modulus", "tightness_scan"};
}

ExperimentReport run_experiment(const std::string& name, const json& config) {
  ConfigReader c(config);
  if (name == "density_scan") {
    DensityConfig cfg;
    c.get("alpha", cfg.alpha);
    c.get("L", cfg.L);
    c.get("times", cfg.times);
    c.get("seeds", cfg.seeds);
    c.get("radius", cfg.radius);
    c.run(cfg.run);
    c.finish(name);
    return density_scan(cfg);
  }
  if (name == "interval_coalescence") {
    IntervalConfig cfg;
    c.get("m_values", cfg.m_values);
    c.get("interval_len", cfg.interval_len);
    c.get("c_trial", cfg.c_trial);
    c.get("sites_per_unit", cfg.sites_per_unit);
    c.get("seeds", cfg.seeds);
    c.run(cfg.run);
    c.finish(name);
    return interval_coalescence(cfg);
  }
  if (name == "insulation_probe") {
    InsulationConfig cfg;
    c.get("N_values", cfg.N_values);
    c.get("sites_per_unit", cfg.sites_per_unit);
    c.get("age", cfg.age);
    c.get("window", cfg.window);
    c.get("margin", cfg.margin);
    c.get("seeds", cfg.seeds);
    c.run(cfg.run);
    c.finish(name);
    return insulation_probe(cfg);
  }
  if (name == "avoidance_exponent") {
    AvoidanceConfig cfg;
    c.get("delta_values", cfg.delta_values);
    c.get("gap_sites", cfg.gap_sites);
    c.get("resolution", cfg.resolution);
    c.get("particles", cfg.particles);
    c.get("splitting", cfg.splitting);
    c.get("bootstrap", cfg.bootstrap);
    c.run(cfg.run);
    c.finish(name);
    return avoidance_exponent(cfg);
  }
  if (name == "birth_modulus") {
    BirthModulusConfig cfg;
    c.get("n0_values", cfg.n0_values);
    c.sample(cfg.sample);
    c.get("box_lo", cfg.box_lo);
    c.get("box_hi", cfg.box_hi);
    c.get("seeds", cfg.seeds);
    c.run(cfg.run);
    c.finish(name);
    return birth_modulus(cfg);
  }
  if (name == "tightness_scan") {
    TightnessConfig cfg;
    c.get("N_values", cfg.N_values);
    c.get("eps", cfg.eps);
    c.get("samples", cfg.samples);
    c.sample(cfg.sample);
    c.get("t_grid", cfg.t_grid);
    c.get("n_max", cfg.n_max);
    c.get("ks_t", cfg.ks_t);
    c.run(cfg.run);
    c.finish(name);
    return tightness_scan(cfg);
  }
  throw ArgumentError("unknown experiment '" + name + "'");
}

}  // namespace stableweb
