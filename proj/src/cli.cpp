#include "twincalib/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "twincalib/config.hpp"
#include "twincalib/errors.hpp"

namespace twincalib::cli {

namespace {

namespace fs = std::filesystem;

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (text.empty() || text[0] == '-') throw std::invalid_argument(text);
    v = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a non-negative integer, got '" + text + "'");
  }
  if (used != text.size()) throw UsageError(what + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError(what + ": '" + item + "' is not a number");
    }
    if (used != item.size()) throw UsageError(what + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Files are staged in memory and written only after all work succeeded; each
// goes through a temporary name and a rename.
class Outputs {
 public:
  void add(const fs::path& path, std::string content) { files_.emplace_back(path, std::move(content)); }

  void commit() {
    std::vector<fs::path> temps;
    try {
      for (const auto& [path, content] : files_) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        fs::path tmp = path;
        tmp += ".tmp";
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + path.string());
        temps.push_back(tmp);
        f << content;
        f.close();
        if (!f) throw DataError("cannot write " + path.string());
      }
      for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(temps[i], files_[i].first);
    } catch (...) {
      std::error_code ec;
      for (const auto& t : temps) fs::remove(t, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

struct Options {
  std::string config;
  std::optional<std::string> seed;
  std::optional<std::string> method;
  std::optional<std::string> methods;
  std::optional<std::string> seeds;
  std::optional<double> alpha;
  std::optional<std::string> preference;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> particles;
  std::optional<std::size_t> parallel;
  std::string out;
  std::string data;
  std::string report;
  std::string x;
};

std::optional<std::uint64_t> resolve_seed(const Options& o) {
  if (o.seed) return parse_u64(*o.seed, "--seed");
  if (const char* env = std::getenv("TWINCALIB_SEED"); env && *env) return parse_u64(env, "TWINCALIB_SEED");
  return std::nullopt;
}

CliConfig load(const Options& o) {
  CliConfig c = load_config(o.config);
  auto& ex = c.experiment;
  try {
    if (o.method) ex.methods = {harness::MethodSpec::parse(*o.method)};
    if (o.methods) {
      ex.methods.clear();
      for (const auto& m : split(*o.methods)) ex.methods.push_back(harness::MethodSpec::parse(m));
    }
    if (o.preference) {
      const auto w = parse_numbers(*o.preference, "--preference");
      if (w.size() != kNumKpis) throw UsageError("--preference: expected 3 comma-separated weights");
      ex.preferences = {PreferenceVector(Eigen::Vector3d(w[0], w[1], w[2]))};
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (o.alpha) ex.alpha = *o.alpha;
  if (o.iters) ex.iterations = *o.iters;
  if (o.particles) ex.pso.num_particles = *o.particles;
  if (o.parallel) ex.parallel = *o.parallel;
  if (o.seeds) ex.seeds = parse_seed_list(*o.seeds);
  if (const auto seed = resolve_seed(o)) {
    c.field.seed = *seed;
    if (!o.seeds) ex.seeds = {*seed};
  }
  if (!o.data.empty()) c.data_path = fs::absolute(o.data).lexically_normal().string();
  try {
    c.validate("command line");
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

harness::FieldDataset read_data(const CliConfig& c) {
  if (c.data_path.empty()) throw UsageError("no dataset: pass --data or set [run] data in the config");
  std::ifstream in(c.data_path, std::ios::binary);
  if (!in) throw DataError(c.data_path + ": cannot open dataset");
  try {
    return harness::read_dataset_csv(in, c.sim.interval_minutes);
  } catch (const DataError& e) {
    throw DataError(c.data_path + ": " + e.what());
  }
}

std::string dataset_text(const harness::FieldDataset& d) {
  std::ostringstream s;
  harness::write_dataset_csv(d, s);
  return s.str();
}

fs::path snapshot_beside(const fs::path& file) {
  fs::path p = file;
  p += ".config.toml";
  return p;
}

void print_mape_table(const harness::ComparisonTables& t, std::ostream& out) {
  out << std::left << std::setw(14) << "method" << std::right << std::setw(12) << "MAPE" << std::setw(10) << "std"
      << std::setw(10) << "Jain" << std::setw(8) << "runs" << '\n';
  for (std::size_t i = 0; i < t.mape.size(); ++i)
    out << std::left << std::setw(14) << t.mape[i].method << std::right << std::fixed << std::setprecision(2)
        << std::setw(12) << t.mape[i].mean << std::setw(10) << t.mape[i].stddev << std::setprecision(3)
        << std::setw(10) << t.jain[i].mean << std::setw(8) << t.mape[i].runs << '\n';
  out << std::defaultfloat;
}

int cmd_gen_field(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw UsageError("gen-field: --out is required");
  const CliConfig c = load(o);
  const auto data = harness::gen_field_dataset(c.layout, c.field, c.sim, c.field.seed);
  Outputs files;
  files.add(o.out, dataset_text(data));
  files.add(snapshot_beside(o.out), config_snapshot(c));
  files.commit();
  out << "wrote " << data.rows.size() << " rows to " << o.out << '\n';
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const CliConfig c = load(o);
  netsim::SimParams params = c.field.sites.front().hidden;
  if (!o.x.empty()) {
    const auto v = parse_numbers(o.x, "--x");
    if (v.size() != c.space.size()) throw UsageError("--x: expected " + std::to_string(c.space.size()) + " values");
    MixedVector x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    if (!c.space.contains(x)) throw UsageError("--x: point lies outside the search space");
    params = netsim::decode(c.space, x);
  }
  const std::uint64_t seed = resolve_seed(o).value_or(c.field.seed);
  harness::FieldDataset d;
  d.metadata.interval_minutes = c.sim.interval_minutes;
  d.metadata.intervals = c.sim.intervals;
  for (std::size_t b = 0; b < c.layout.bands.size(); ++b) {
    const auto s = netsim::simulate_series(c.layout, b, std::vector<netsim::SimParams>(c.sim.intervals, params), c.sim,
                                           seed);
    for (Eigen::Index t = 0; t < s.intervals(); ++t)
      d.rows.push_back({"sim", c.layout.bands[b].label, static_cast<std::size_t>(t), s.active_ues(t), s.cell_load(t),
                        s.dl_volume(t)});
  }
  if (o.out.empty()) {
    out << dataset_text(d);
    return kExitOk;
  }
  Outputs files;
  files.add(o.out, dataset_text(d));
  files.add(snapshot_beside(o.out), config_snapshot(c));
  files.commit();
  out << "wrote " << d.rows.size() << " rows to " << o.out << '\n';
  return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw UsageError("calibrate: --out is required");
  Options opts = o;
  if (!opts.method && !opts.methods) opts.method = "mvpso-fair";
  const CliConfig c = load(opts);
  if (c.experiment.methods.size() != 1) throw UsageError("calibrate: runs exactly one method");
  const auto data = read_data(c);
  const auto report = harness::run_experiment(c.setup(), data);
  Outputs files;
  files.add(o.out, harness::report_to_json(report).dump(2) + "\n");
  files.add(snapshot_beside(o.out), config_snapshot(c));
  files.commit();
  for (const auto& r : report.runs)
    out << r.method << " p=" << harness::preference_label(r.preference) << ' ' << r.site << '/' << r.band
        << " seed=" << r.seed << " mape=[" << r.kpi_mape(0) << ", " << r.kpi_mape(1) << ", " << r.kpi_mape(2)
        << "] jain=" << r.jain << '\n';
  out << "wrote " << o.out << '\n';
  return kExitOk;
}

void add_tables(Outputs& files, const fs::path& dir, const harness::ComparisonTables& t) {
  std::ostringstream mape, kpi, jain, conv, curves;
  harness::write_mape_csv(t, mape);
  harness::write_kpi_mape_csv(t, kpi);
  harness::write_jain_csv(t, jain);
  harness::write_convergence_csv(t, conv);
  harness::write_curves_csv(t, curves);
  files.add(dir / "mape.csv", mape.str());
  files.add(dir / "kpi_mape.csv", kpi.str());
  files.add(dir / "jain.csv", jain.str());
  files.add(dir / "convergence.csv", conv.str());
  files.add(dir / "curves.csv", curves.str());
}

int cmd_compare(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw UsageError("compare: --out is required");
  const CliConfig c = load(o);
  if (c.experiment.methods.size() < 2) throw UsageError("compare: needs at least two methods");
  const auto data = read_data(c);
  const auto report = harness::run_experiment(c.setup(), data);
  const auto tables = harness::compare_methods(report);
  const fs::path dir = o.out;
  Outputs files;
  files.add(dir / "report.json", harness::report_to_json(report).dump(2) + "\n");
  add_tables(files, dir, tables);
  std::ostringstream timings;
  harness::write_timings_csv(report, timings);
  files.add(dir / "timings.csv", timings.str());
  files.add(dir / "config.toml", config_snapshot(c));
  files.commit();
  print_mape_table(tables, out);
  out << "wrote " << report.runs.size() << " runs to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_plot_data(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw UsageError("plot-data: --out is required");
  if (o.report.empty()) throw UsageError("plot-data: --report is required");
  const CliConfig c = load(o);
  std::ifstream in(o.report, std::ios::binary);
  if (!in) throw DataError(o.report + ": cannot open report");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(o.report + ": " + e.what());
  }
  const auto report = harness::report_from_json(doc);
  const fs::path dir = o.out;
  Outputs files;
  add_tables(files, dir, harness::compare_methods(report));

  if (!c.data_path.empty()) {
    const auto data = read_data(c);
    const auto models = harness::build_models(c.setup());
    std::ostringstream overlay;
    overlay << "method,preference,seed,site,band,interval,kpi,target,simulated\n";
    for (const auto& r : report.runs) {
      const auto it = std::find_if(c.layout.bands.begin(), c.layout.bands.end(),
                                   [&](const netsim::BandSpec& b) { return b.label == r.band; });
      if (it == c.layout.bands.end()) throw DataError("report band '" + r.band + "' is not part of the layout");
      if (r.best_x.size() != static_cast<Eigen::Index>(c.space.size()))
        throw DataError("report point has " + std::to_string(r.best_x.size()) + " entries, search space has " +
                        std::to_string(c.space.size()));
      const auto& model = models[static_cast<std::size_t>(it - c.layout.bands.begin())];
      const KpiSeries target = data.series(r.site, r.band);
      const KpiSeries sim = model.simulate(netsim::decode(c.space, r.best_x), 0);
      if (sim.intervals() != target.intervals()) throw DataError("dataset and simulator interval counts differ");
      for (Eigen::Index t = 0; t < sim.intervals(); ++t)
        for (std::size_t k = 0; k < kNumKpis; ++k)
          overlay << r.method << ',' << harness::preference_label(r.preference) << ',' << r.seed << ',' << r.site
                  << ',' << r.band << ',' << t << ',' << kKpiNames[k] << ','
                  << harness::format_double(target.kpi(k)(t)) << ',' << harness::format_double(sim.kpi(k)(t)) << '\n';
    }
    files.add(dir / "overlay.csv", overlay.str());
  }
  files.commit();
  out << "wrote plot data to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = parse_u64(text.substr(0, dots), "--seeds");
    const auto hi = parse_u64(text.substr(dots + 2), "--seeds");
    if (hi < lo) throw UsageError("--seeds: empty range '" + text + "'");
    if (hi - lo >= 100000) throw UsageError("--seeds: range too large");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  for (const auto& item : split(text)) out.push_back(parse_u64(item, "--seeds"));
  if (out.empty()) throw UsageError("--seeds: no seeds given");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibrates a cellular network simulator against KPI time series.", "twincalib"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "TOML config file");
    sub->add_option("--seed", o.seed, "Seed (falls back to TWINCALIB_SEED, then the config)");
    sub->add_option("--out", o.out, "Output path");
  };
  auto search = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Field dataset CSV");
    sub->add_option("--alpha", o.alpha, "Fairness alpha");
    sub->add_option("--preference", o.preference, "Preference weights a,b,c");
    sub->add_option("--iters", o.iters, "Iterations per run");
    sub->add_option("--particles", o.particles, "Swarm size");
    sub->add_option("--parallel", o.parallel, "Worker threads");
  };

  auto* gen = app.add_subcommand("gen-field", "Generate a synthetic field dataset from hidden parameters");
  common(gen);
  auto* sim = app.add_subcommand("simulate", "Simulate KPI series for one calibration point");
  common(sim);
  sim->add_option("--x", o.x, "Calibration point, comma-separated in search-space order");
  auto* cal = app.add_subcommand("calibrate", "Calibrate every (site, band) cell of a dataset with one method");
  common(cal);
  search(cal);
  cal->add_option("--method", o.method, "random, bo, pso or mvpso, optionally suffixed -fair");
  auto* cmp = app.add_subcommand("compare", "Run several methods over seeds and preferences");
  common(cmp);
  search(cmp);
  cmp->add_option("--methods", o.methods, "Comma-separated method names");
  cmp->add_option("--seeds", o.seeds, "Seed range 1..10 or list 1,2,3");
  auto* plot = app.add_subcommand("plot-data", "Re-emit curves and KPI overlays from a report");
  plot->add_option("--config", o.config, "TOML config file");
  plot->add_option("--report", o.report, "Report JSON written by calibrate or compare");
  plot->add_option("--data", o.data, "Field dataset CSV for the KPI overlay");
  plot->add_option("--out", o.out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_field(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (cal->parsed()) return cmd_calibrate(o, out);
    if (cmp->parsed()) return cmd_compare(o, out);
    if (plot->parsed()) return cmd_plot_data(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace twincalib::cli
