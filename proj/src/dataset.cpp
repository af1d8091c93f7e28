#include "twincalib/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "twincalib/errors.hpp"

namespace twincalib::harness {

FieldConfig FieldConfig::defaults() {
  FieldConfig f;
  f.sites = {{"site0", {5.0, 100.0, 20}}};
  return f;
}

void FieldConfig::validate(const SearchSpace& space) const {
  if (sites.empty()) throw DomainError("field: at least one site is required");
  std::set<std::string> seen;
  for (const auto& s : sites) {
    if (s.label.empty()) throw DomainError("field: site labels must be non-empty");
    if (!seen.insert(s.label).second) throw DomainError("field: duplicate site label '" + s.label + "'");
    if (!space.contains(netsim::encode(space, s.hidden)))
      throw DomainError("field: hidden parameters of site '" + s.label + "' lie outside the search space");
  }
  if (!(diurnal_amplitude >= 0.0 && diurnal_amplitude < 1.0))
    throw DomainError("field: diurnal_amplitude must be in [0, 1)");
  if (!(noise_stddev >= 0.0)) throw DomainError("field: noise_stddev must be >= 0");
  if (!kpi_offset.allFinite() || (kpi_offset.array() <= -1.0).any())
    throw DomainError("field: kpi_offset entries must be finite and > -1");
}

std::vector<std::string> FieldDataset::sites() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.site) == out.end()) out.push_back(r.site);
  return out;
}

std::vector<std::string> FieldDataset::bands() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.band) == out.end()) out.push_back(r.band);
  return out;
}

KpiSeries FieldDataset::series(const std::string& site, const std::string& band) const {
  KpiSeries s(static_cast<Eigen::Index>(metadata.intervals));
  std::vector<bool> filled(metadata.intervals, false);
  for (const auto& r : rows) {
    if (r.site != site || r.band != band) continue;
    if (r.interval >= metadata.intervals || filled[r.interval])
      throw DataError("dataset: bad or repeated interval " + std::to_string(r.interval) + " for " + site + "/" + band);
    const auto i = static_cast<Eigen::Index>(r.interval);
    s.active_ues(i) = r.active_ues;
    s.cell_load(i) = r.cell_load;
    s.dl_volume(i) = r.dl_volume;
    filled[r.interval] = true;
  }
  for (std::size_t t = 0; t < filled.size(); ++t)
    if (!filled[t])
      throw DataError("dataset: no row for " + site + "/" + band + " interval " + std::to_string(t));
  return s;
}

void FieldDataset::validate() const {
  if (metadata.intervals == 0) throw DataError("dataset: zero intervals");
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const auto& r : rows) {
    ++counts[{r.site, r.band}];
    if (!(r.active_ues >= 0.0) || !(r.dl_volume >= 0.0) || !(r.cell_load >= 0.0 && r.cell_load <= 1.0))
      throw DataError("dataset: KPI value out of range for " + r.site + "/" + r.band + " interval " +
                      std::to_string(r.interval));
  }
  for (const auto& [cell, n] : counts) {
    if (n != metadata.intervals)
      throw DataError("dataset: " + cell.first + "/" + cell.second + " has " + std::to_string(n) + " rows, expected " +
                      std::to_string(metadata.intervals));
    series(cell.first, cell.second);
  }
}

std::vector<netsim::SimParams> diurnal_schedule(const netsim::SimParams& hidden, const FieldConfig& cfg,
                                                const netsim::SimConfig& sim) {
  std::vector<netsim::SimParams> out(sim.intervals, hidden);
  if (cfg.diurnal_amplitude == 0.0) return out;
  for (std::size_t t = 0; t < sim.intervals; ++t) {
    const double hour = (static_cast<double>(t) + 0.5) * sim.interval_minutes / 60.0;
    const double k = 1.0 + cfg.diurnal_amplitude * std::cos(2.0 * std::numbers::pi * (hour - cfg.diurnal_peak_hour) / 24.0);
    out[t].interarrival_ms = hidden.interarrival_ms / k;
  }
  return out;
}

FieldDataset gen_field_dataset(const netsim::NetworkLayout& layout, const FieldConfig& field,
                               const netsim::SimConfig& sim, std::uint64_t seed) {
  netsim::SimConfig gen = sim;
  gen.noise_stddev = field.noise_stddev;
  gen.validate();
  layout.validate();
  int max_ues = 1;
  for (const auto& s : field.sites) max_ues = std::max(max_ues, s.hidden.ues_per_cell);

  FieldDataset data;
  data.metadata.interval_minutes = sim.interval_minutes;
  data.metadata.intervals = sim.intervals;
  std::vector<netsim::ForwardModel> models;
  for (std::size_t b = 0; b < layout.bands.size(); ++b) models.emplace_back(layout, b, gen, max_ues);

  for (std::size_t si = 0; si < field.sites.size(); ++si) {
    const auto& site = field.sites[si];
    data.metadata.hidden[site.label] = site.hidden;
    const auto schedule = diurnal_schedule(site.hidden, field, sim);
    const std::uint64_t site_seed = SeededRng(seed, 0xF1E1D).derive(si).next_u64();
    for (std::size_t b = 0; b < layout.bands.size(); ++b) {
      KpiSeries s = models[b].simulate(schedule, site_seed);
      for (std::size_t i = 0; i < kNumKpis; ++i) s.kpi(i) *= 1.0 + field.kpi_offset(static_cast<Eigen::Index>(i));
      s.cell_load = s.cell_load.cwiseMin(1.0);
      for (Eigen::Index t = 0; t < s.intervals(); ++t)
        data.rows.push_back({site.label, layout.bands[b].label, static_cast<std::size_t>(t), s.active_ues(t),
                             s.cell_load(t), s.dl_volume(t)});
    }
  }
  return data;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(const FieldDataset& data, std::ostream& out) {
  out << kDatasetHeader << '\n';
  for (const auto& r : data.rows)
    out << r.site << ',' << r.band << ',' << r.interval << ',' << format_double(r.active_ues) << ','
        << format_double(r.cell_load) << ',' << format_double(r.dl_volume) << '\n';
}

namespace {

double parse_number(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
    throw DataError("dataset line " + std::to_string(line) + ": '" + field + "' is not a number");
  return v;
}

}  // namespace

FieldDataset read_dataset_csv(std::istream& in, double interval_minutes) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader) throw DataError("dataset: unexpected header '" + line + "'");
  FieldDataset data;
  data.metadata.interval_minutes = interval_minutes;
  std::size_t lineno = 1;
  std::size_t max_interval = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6)
      throw DataError("dataset line " + std::to_string(lineno) + ": expected 6 fields, got " +
                      std::to_string(fields.size()));
    const double interval = parse_number(fields[2], lineno);
    if (interval < 0.0 || interval != std::floor(interval))
      throw DataError("dataset line " + std::to_string(lineno) + ": interval must be a non-negative integer");
    DatasetRow r{fields[0], fields[1], static_cast<std::size_t>(interval), parse_number(fields[3], lineno),
                 parse_number(fields[4], lineno), parse_number(fields[5], lineno)};
    max_interval = std::max(max_interval, r.interval);
    data.rows.push_back(std::move(r));
  }
  if (data.rows.empty()) throw DataError("dataset: no rows");
  data.metadata.intervals = max_interval + 1;
  data.validate();
  return data;
}

}  // namespace twincalib::harness
