#include "twincalib/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "twincalib/errors.hpp"
#include "twincalib/toml.hpp"

namespace twincalib::cli {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& doc, std::string name, const std::string& source)
      : name_(std::move(name)), source_(source) {
    const json* node = &doc;
    std::size_t start = 0;
    while (start <= name_.size()) {
      const std::size_t dot = name_.find('.', start);
      const std::string part = name_.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->contains(part)) {
        node_ = nullptr;
        return;
      }
      node = &(*node)[part];
      if (!node->is_object()) fail("", "expected a table");
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    node_ = node;
  }

  bool present() const { return node_ != nullptr; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(source_ + ": " + name_ + (key.empty() ? "" : "." + key) + ": " + msg);
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &(*node_)[key];
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const std::string& key, Int& out) {
    if (const json* v = find(key)) out = to_int<Int>(key, *v);
  }

  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }

  template <typename Int>
  Int to_int(const std::string& key, const json& v) const {
    if (v.is_number_integer() || v.is_number_unsigned()) {
      if constexpr (std::is_unsigned_v<Int>) {
        if (v.is_number_integer() && v.get<std::int64_t>() < 0) fail(key, "must be >= 0");
        return static_cast<Int>(v.get<std::uint64_t>());
      } else {
        return static_cast<Int>(v.get<std::int64_t>());
      }
    }
    fail(key, "expected an integer");
  }

  std::vector<double> numbers(const std::string& key, const json& v, std::size_t n = 0) const {
    if (!v.is_array()) fail(key, "expected an array of numbers");
    if (n && v.size() != n) fail(key, "expected " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, const json& v) const {
    if (!v.is_array()) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(key, "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [k, v] : node_->items())
      if (!used_.count(k)) fail(k, v.is_object() ? "unknown table" : "unknown key");
  }

 private:
  std::string name_;
  const std::string& source_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

template <typename F>
void wrap(const std::string& source, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

json bounds_json(const SearchSpace& space, std::size_t i) {
  const auto& d = space.dim(i);
  if (d.kind == DimensionKind::discrete)
    return json::array({static_cast<std::int64_t>(d.lower), static_cast<std::int64_t>(d.upper)});
  return json::array({d.lower, d.upper});
}

}  // namespace

CliConfig config_from_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw ConfigError(source + ": top level must be a table");
  static const std::set<std::string> known = {"space", "layout", "band", "sim", "field",
                                              "site",  "experiment", "pso", "bo", "run"};
  for (const auto& [k, v] : doc.items()) {
    if (!known.count(k)) throw ConfigError(source + ": " + k + ": unknown section");
    if (!v.is_object()) throw ConfigError(source + ": " + k + ": expected a table");
  }
  CliConfig c;

  {
    Section s(doc, "space", source);
    auto dims = c.space.dims();
    for (auto& d : dims) {
      if (const json* v = s.find(d.name)) {
        const auto b = s.numbers(d.name, *v, 2);
        d.lower = b[0];
        d.upper = b[1];
      }
    }
    s.finish();
    try {
      c.space = SearchSpace(dims);
    } catch (const std::exception& e) {
      s.fail("", e.what());
    }
  }

  {
    Section s(doc, "layout", source);
    s.get("num_gnbs", c.layout.num_gnbs);
    s.get("inter_site_distance_km", c.layout.inter_site_distance_km);
    s.get("sectors", c.layout.sectors);
    s.get("cell_radius_km", c.layout.cell_radius_km);
    s.get("min_ue_distance_km", c.layout.min_ue_distance_km);
    std::vector<std::string> labels;
    for (const auto& b : c.layout.bands) labels.push_back(b.label);
    if (const json* v = s.find("bands")) labels = s.strings("bands", *v);
    s.finish();

    const auto defaults = netsim::NetworkLayout::defaults().bands;
    std::vector<netsim::BandSpec> bands;
    for (const auto& label : labels) {
      netsim::BandSpec b;
      b.label = label;
      bool have_default = false;
      for (const auto& d : defaults)
        if (d.label == label) {
          b = d;
          have_default = true;
        }
      Section bs(doc, "band." + label, source);
      if (!have_default && !bs.present()) bs.fail("", "band listed in layout.bands has no [band." + label + "] table");
      bs.get("carrier_ghz", b.carrier_ghz);
      bs.get("bandwidth_mhz", b.bandwidth_mhz);
      bs.get("tx_power_dbm", b.tx_power_dbm);
      bs.get("antenna_gain_dbi", b.antenna_gain_dbi);
      bs.finish();
      bands.push_back(b);
    }
    if (doc.contains("band"))
      for (const auto& [k, v] : doc["band"].items())
        if (std::find(labels.begin(), labels.end(), k) == labels.end())
          throw ConfigError(source + ": band." + k + ": not listed in layout.bands");
    c.layout.bands = bands;
  }

  {
    Section s(doc, "sim", source);
    s.get("interval_minutes", c.sim.interval_minutes);
    s.get("intervals", c.sim.intervals);
    s.get("thermal_noise_dbm_hz", c.sim.thermal_noise_dbm_hz);
    s.get("mc_ue_drops", c.sim.mc_ue_drops);
    s.get("noise_stddev", c.sim.noise_stddev);
    s.get("drop_seed", c.sim.drop_seed);
    s.get("spectral_efficiency_cap", c.sim.spectral_efficiency_cap);
    s.finish();
  }

  {
    Section s(doc, "field", source);
    std::vector<std::string> labels;
    for (const auto& site : c.field.sites) labels.push_back(site.label);
    if (const json* v = s.find("sites")) labels = s.strings("sites", *v);
    s.get("diurnal_amplitude", c.field.diurnal_amplitude);
    s.get("diurnal_peak_hour", c.field.diurnal_peak_hour);
    s.get("noise_stddev", c.field.noise_stddev);
    s.get("seed", c.field.seed);
    if (const json* v = s.find("kpi_offset")) {
      const auto o = s.numbers("kpi_offset", *v, 3);
      c.field.kpi_offset = Eigen::Vector3d(o[0], o[1], o[2]);
    }
    s.finish();

    const auto defaults = harness::FieldConfig::defaults().sites;
    std::vector<harness::SiteSpec> sites;
    for (const auto& label : labels) {
      harness::SiteSpec site{label, defaults.front().hidden};
      Section ss(doc, "site." + label, source);
      ss.get("packet_size_kb", site.hidden.packet_size_kb);
      ss.get("interarrival_ms", site.hidden.interarrival_ms);
      ss.get("ues_per_cell", site.hidden.ues_per_cell);
      ss.finish();
      sites.push_back(site);
    }
    if (doc.contains("site"))
      for (const auto& [k, v] : doc["site"].items())
        if (std::find(labels.begin(), labels.end(), k) == labels.end())
          throw ConfigError(source + ": site." + k + ": not listed in field.sites");
    c.field.sites = sites;
  }

  {
    Section s(doc, "experiment", source);
    auto& ex = c.experiment;
    if (const json* v = s.find("methods")) {
      ex.methods.clear();
      for (const auto& m : s.strings("methods", *v)) {
        try {
          ex.methods.push_back(harness::MethodSpec::parse(m));
        } catch (const std::exception& e) {
          s.fail("methods", e.what());
        }
      }
    }
    if (const json* v = s.find("preferences")) {
      if (!v->is_array()) s.fail("preferences", "expected an array of 3-element arrays");
      ex.preferences.clear();
      for (const auto& p : *v) {
        const auto w = s.numbers("preferences", p, 3);
        try {
          ex.preferences.emplace_back(Eigen::Vector3d(w[0], w[1], w[2]));
        } catch (const std::exception& e) {
          s.fail("preferences", e.what());
        }
      }
    }
    s.get("alpha", ex.alpha);
    s.get("epsilon_floor", ex.epsilon_floor);
    if (const json* v = s.find("seeds")) {
      if (!v->is_array()) s.fail("seeds", "expected an array of integers");
      ex.seeds.clear();
      for (const auto& e : *v) ex.seeds.push_back(s.to_int<std::uint64_t>("seeds", e));
    }
    s.get("iterations", ex.iterations);
    s.get("convergence_tolerance", ex.convergence_tolerance);
    s.get("parallel", ex.parallel);
    s.finish();
  }

  {
    Section s(doc, "pso", source);
    auto& p = c.experiment.pso;
    s.get("num_particles", p.num_particles);
    s.get("w", p.w);
    s.get("c1", p.c1);
    s.get("c2", p.c2);
    s.get("v_max_fraction", p.v_max_fraction);
    s.get("mutation_rate", p.mutation_rate);
    s.finish();
  }

  {
    Section s(doc, "bo", source);
    auto& b = c.experiment.bo;
    s.get("init_design", b.init_design);
    s.get("candidates", b.candidates);
    s.get("length_scale", b.length_scale);
    s.get("jitter", b.jitter);
    s.get("max_jitter", b.max_jitter);
    s.finish();
  }

  {
    Section s(doc, "run", source);
    s.get("data", c.data_path);
    s.finish();
  }

  c.validate(source);
  return c;
}

void CliConfig::validate(const std::string& source) const {
  for (const char* name : {"packet_size_kb", "interarrival_ms", "ues_per_cell"}) {
    bool found = false;
    for (const auto& d : space.dims()) found = found || d.name == name;
    if (!found) throw ConfigError(source + ": space: missing dimension '" + std::string(name) + "'");
  }
  if (space.lower()(static_cast<Eigen::Index>(space.index_of("ues_per_cell"))) < 1.0)
    throw ConfigError(source + ": space.ues_per_cell: lower bound must be >= 1");
  wrap(source, [&] { layout.validate(); });
  wrap(source, [&] { sim.validate(); });
  wrap(source, [&] { field.validate(space); });
  wrap(source, [&] { experiment.validate(); });
}

json config_to_json(const CliConfig& c) {
  json doc;
  for (std::size_t i = 0; i < c.space.size(); ++i) doc["space"][c.space.dim(i).name] = bounds_json(c.space, i);

  auto& l = doc["layout"];
  l["num_gnbs"] = c.layout.num_gnbs;
  l["inter_site_distance_km"] = c.layout.inter_site_distance_km;
  l["sectors"] = c.layout.sectors;
  l["cell_radius_km"] = c.layout.cell_radius_km;
  l["min_ue_distance_km"] = c.layout.min_ue_distance_km;
  l["bands"] = json::array();
  for (const auto& b : c.layout.bands) {
    l["bands"].push_back(b.label);
    doc["band"][b.label] = {{"carrier_ghz", b.carrier_ghz},
                            {"bandwidth_mhz", b.bandwidth_mhz},
                            {"tx_power_dbm", b.tx_power_dbm},
                            {"antenna_gain_dbi", b.antenna_gain_dbi}};
  }

  doc["sim"] = {{"interval_minutes", c.sim.interval_minutes},
                {"intervals", c.sim.intervals},
                {"thermal_noise_dbm_hz", c.sim.thermal_noise_dbm_hz},
                {"mc_ue_drops", c.sim.mc_ue_drops},
                {"noise_stddev", c.sim.noise_stddev},
                {"drop_seed", c.sim.drop_seed},
                {"spectral_efficiency_cap", c.sim.spectral_efficiency_cap}};

  auto& f = doc["field"];
  f["sites"] = json::array();
  for (const auto& s : c.field.sites) {
    f["sites"].push_back(s.label);
    doc["site"][s.label] = {{"packet_size_kb", s.hidden.packet_size_kb},
                            {"interarrival_ms", s.hidden.interarrival_ms},
                            {"ues_per_cell", s.hidden.ues_per_cell}};
  }
  f["diurnal_amplitude"] = c.field.diurnal_amplitude;
  f["diurnal_peak_hour"] = c.field.diurnal_peak_hour;
  f["noise_stddev"] = c.field.noise_stddev;
  f["kpi_offset"] = {c.field.kpi_offset(0), c.field.kpi_offset(1), c.field.kpi_offset(2)};
  f["seed"] = c.field.seed;

  const auto& ex = c.experiment;
  auto& e = doc["experiment"];
  e["methods"] = json::array();
  for (const auto& m : ex.methods) e["methods"].push_back(m.name());
  e["preferences"] = json::array();
  for (const auto& p : ex.preferences) e["preferences"].push_back({p[0], p[1], p[2]});
  e["alpha"] = ex.alpha;
  e["epsilon_floor"] = ex.epsilon_floor;
  e["seeds"] = ex.seeds;
  e["iterations"] = ex.iterations;
  e["convergence_tolerance"] = ex.convergence_tolerance;
  e["parallel"] = ex.parallel;

  doc["pso"] = {{"num_particles", ex.pso.num_particles}, {"w", ex.pso.w},
                {"c1", ex.pso.c1},
                {"c2", ex.pso.c2},
                {"v_max_fraction", ex.pso.v_max_fraction},
                {"mutation_rate", ex.pso.mutation_rate}};
  doc["bo"] = {{"init_design", ex.bo.init_design},
               {"candidates", ex.bo.candidates},
               {"length_scale", ex.bo.length_scale},
               {"jitter", ex.bo.jitter},
               {"max_jitter", ex.bo.max_jitter}};
  doc["run"] = {{"data", c.data_path}};
  return doc;
}

CliConfig load_config(const std::string& path) {
  if (path.empty()) return config_from_json(json::object(), "<defaults>");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  CliConfig c = config_from_json(toml::parse(text.str(), path), path);
  if (!c.data_path.empty()) {
    const std::filesystem::path p(c.data_path);
    if (p.is_relative())
      c.data_path = std::filesystem::absolute(std::filesystem::path(path).parent_path() / p).lexically_normal().string();
  }
  return c;
}

std::string config_snapshot(const CliConfig& cfg) { return toml::emit(config_to_json(cfg)); }

}  // namespace twincalib::cli
