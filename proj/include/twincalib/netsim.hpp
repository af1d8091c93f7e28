#pragma once

// Desk-scale downlink OFDMA cell model. A cell is the central sector of the
// serving gNB on one band; its capacity under equal-time sharing is the
// bandwidth times the harmonic mean of per-UE spectral efficiencies, and its
// KPIs follow from an M/G/1 processor-sharing queue fed by file arrivals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twincalib/objective.hpp"
#include "twincalib/rng.hpp"
#include "twincalib/search_space.hpp"

namespace twincalib::netsim {

struct BandSpec {
  std::string label;
  double carrier_ghz = 2.1;
  double bandwidth_mhz = 10.0;
  double tx_power_dbm = 43.0;
  double antenna_gain_dbi = 15.0;

  double bandwidth_hz() const { return bandwidth_mhz * 1e6; }
};

struct NetworkLayout {
  std::size_t num_gnbs = 7;
  double inter_site_distance_km = 0.5;
  std::size_t sectors = 3;
  std::vector<BandSpec> bands;
  double cell_radius_km = 0.0;  // 0 means inter_site_distance / sqrt(3)
  double min_ue_distance_km = 0.035;

  /// Seven sites, 500 m apart, bands (2.1 GHz, 10 MHz) and (3.5 GHz, 20 MHz).
  static NetworkLayout defaults();

  void validate() const;
  double effective_cell_radius() const;
  /// Hexagonal-grid sites in ring order; element 0 is the serving gNB at the
  /// origin.
  std::vector<Eigen::Vector2d> gnb_positions() const;
};

/// Decoded calibration point.
struct SimParams {
  double packet_size_kb = 5.0;
  double interarrival_ms = 100.0;
  int ues_per_cell = 20;
};

struct SimConfig {
  double interval_minutes = 15.0;
  std::size_t intervals = 96;
  double thermal_noise_dbm_hz = -174.0;
  std::size_t mc_ue_drops = 8;
  double noise_stddev = 0.0;  // relative, multiplicative
  std::uint64_t drop_seed = 1;
  double spectral_efficiency_cap = 7.4;

  void validate() const;
  double interval_ms() const { return interval_minutes * 60'000.0; }
};

/// Search space over (packet size kB, inter-arrival mean ms, UEs per cell)
/// with the default bounds [0.05, 30], [0, 300], {3..50}.
SearchSpace default_search_space();

/// Reads the three parameters by dimension name (packet_size_kb,
/// interarrival_ms, ues_per_cell).
SimParams decode(const SearchSpace& space, const MixedVector& x);
MixedVector encode(const SearchSpace& space, const SimParams& p);

/// 128.1 + 37.6 log10(d), d in km. Throws DomainError for d <= 0.
double path_loss_db(double distance_km);

double thermal_noise_dbm(const SimConfig& cfg, const BandSpec& band);

/// Linear SINR of a UE at `pos` (km) served by gNB 0, with every other gNB
/// transmitting at full power on the same band.
double ue_sinr(const NetworkLayout& layout, const BandSpec& band, const Eigen::Vector2d& pos, const SimConfig& cfg,
               bool interference = true);

inline double spectral_efficiency(double sinr, double cap = 7.4) { return std::min(cap, std::log2(1.0 + sinr)); }

template <typename Derived>
double harmonic_mean(const Eigen::DenseBase<Derived>& values) {
  return static_cast<double>(values.size()) / values.derived().array().inverse().sum();
}

/// Equal-time-share capacity in bits per ms.
template <typename Derived>
double harmonic_capacity(double bandwidth_hz, const Eigen::DenseBase<Derived>& efficiencies) {
  return bandwidth_hz / 1000.0 * harmonic_mean(efficiencies);
}

/// Capacity in bits per ms of a sector serving the given UEs.
double cell_capacity(const NetworkLayout& layout, const BandSpec& band, const std::vector<Eigen::Vector2d>& ues,
                     const SimConfig& cfg);

/// `count` UE positions uniform over the central sector (boresight along +x,
/// 120 degrees wide), drawn sequentially so a longer drop extends a shorter one.
std::vector<Eigen::Vector2d> drop_ues(const NetworkLayout& layout, SeededRng& rng, std::size_t count);

/// Placement stream of drop `drop` on band `band`. Every interval uses the
/// same placements.
SeededRng drop_stream(const SimConfig& cfg, std::size_t band, std::size_t drop);

struct QueueOutcome {
  double rho = 0.0;
  double active_ues = 0.0;
  double cell_load = 0.0;
  double dl_volume_mb = 0.0;
  double capacity_mb = 0.0;  // capacity * interval length
  bool saturated = false;
};

/// Processor-sharing cell with `ues` users. Below saturation: load = rho,
/// active = min(rho / (1 - rho), ues), volume = offered * interval. At or
/// above saturation: load = 1, active = ues, volume = capacity * interval.
QueueOutcome processor_sharing_outcome(double offered_bits_per_ms, double capacity_bits_per_ms, int ues,
                                       double interval_ms);

struct IntervalKpis {
  double active_ues = 0.0;
  double cell_load = 0.0;
  double dl_volume = 0.0;    // MB
  double capacity_mb = 0.0;  // mean over drops of capacity * interval
  std::size_t saturated_drops = 0;
};

/// One interval: KPIs averaged over cfg.mc_ue_drops placements, then
/// multiplicative noise from `rng` when cfg.noise_stddev > 0.
IntervalKpis simulate_interval(const NetworkLayout& layout, std::size_t band, const SimParams& params,
                               const SimConfig& cfg, SeededRng& rng);

/// Forward model for one band with the UE placements precomputed. Results
/// are identical to simulate_interval; construction does the geometry once.
class ForwardModel {
 public:
  ForwardModel(const NetworkLayout& layout, std::size_t band, const SimConfig& cfg, int max_ues);

  const SimConfig& config() const { return cfg_; }
  std::size_t band() const { return band_; }
  int max_ues() const { return max_ues_; }

  IntervalKpis interval(const SimParams& params, std::size_t interval, SeededRng& rng) const;
  /// Constant parameters over every interval.
  KpiSeries simulate(const SimParams& params, std::uint64_t seed) const;
  KpiSeries simulate(const std::vector<SimParams>& schedule, std::uint64_t seed) const;

 private:
  SimConfig cfg_;
  std::size_t band_;
  int max_ues_;
  double bandwidth_hz_;
  // inverse_prefix_[drop](n) = sum of 1/efficiency over the first n UEs
  std::vector<Eigen::VectorXd> inverse_prefix_;
};

/// Noise stream of interval `interval` for (seed, band).
SeededRng interval_stream(std::uint64_t seed, std::size_t band, std::size_t interval);

KpiSeries simulate_series(const NetworkLayout& layout, std::size_t band, const std::vector<SimParams>& schedule,
                          const SimConfig& cfg, std::uint64_t seed);

}  // namespace twincalib::netsim
