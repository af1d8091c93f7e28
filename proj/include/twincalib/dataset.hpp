#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "twincalib/netsim.hpp"
#include "twincalib/objective.hpp"

namespace twincalib::harness {

struct SiteSpec {
  std::string label;
  netsim::SimParams hidden;
};

/// How synthetic field data is produced from hidden parameters.
struct FieldConfig {
  std::vector<SiteSpec> sites;
  /// Relative swing of traffic intensity over the day; the inter-arrival mean
  /// of interval t is mu / (1 + a cos(2 pi (hour_t - peak) / 24)). 0 keeps the
  /// hidden parameters constant.
  double diurnal_amplitude = 0.0;
  double diurnal_peak_hour = 20.0;
  double noise_stddev = 0.0;
  /// Systematic relative offset per KPI (active, load, volume) between the
  /// field and the simulator: field = simulated * (1 + offset), load capped at 1.
  Eigen::Vector3d kpi_offset = Eigen::Vector3d::Zero();
  std::uint64_t seed = 1;

  /// One site, packet size 5 kB, inter-arrival 100 ms, 20 UEs.
  static FieldConfig defaults();
  void validate(const SearchSpace& space) const;
};

struct DatasetRow {
  std::string site;
  std::string band;
  std::size_t interval = 0;
  double active_ues = 0.0;
  double cell_load = 0.0;
  double dl_volume = 0.0;  // MB
};

struct DatasetMetadata {
  double interval_minutes = 15.0;
  std::size_t intervals = 0;
  std::map<std::string, netsim::SimParams> hidden;  // synthetic data only
};

class FieldDataset {
 public:
  std::vector<DatasetRow> rows;
  DatasetMetadata metadata;

  /// Labels in order of first appearance.
  std::vector<std::string> sites() const;
  std::vector<std::string> bands() const;

  /// Throws DataError when the cell is missing or incomplete.
  KpiSeries series(const std::string& site, const std::string& band) const;

  /// Every (site, band) has exactly metadata.intervals rows, indexed
  /// 0..intervals-1, satisfying the KPI constraints. Throws DataError.
  void validate() const;
};

/// Per-interval parameters for one site under cfg's diurnal profile.
std::vector<netsim::SimParams> diurnal_schedule(const netsim::SimParams& hidden, const FieldConfig& cfg,
                                                const netsim::SimConfig& sim);

/// Simulates every (site, band) from its hidden parameters. Observation
/// noise (field.noise_stddev) is drawn from per-site streams of `seed`; UE
/// placements come from sim.drop_seed and are shared by all sites.
FieldDataset gen_field_dataset(const netsim::NetworkLayout& layout, const FieldConfig& field,
                               const netsim::SimConfig& sim, std::uint64_t seed);

inline constexpr const char* kDatasetHeader = "site,band,interval,active_ues,cell_load,dl_volume_mb";

void write_dataset_csv(const FieldDataset& data, std::ostream& out);
/// Parses the CSV written by write_dataset_csv. metadata.intervals is
/// inferred from the rows; interval_minutes is taken from the argument.
FieldDataset read_dataset_csv(std::istream& in, double interval_minutes);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace twincalib::harness
