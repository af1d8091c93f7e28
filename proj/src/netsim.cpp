#include "twincalib/netsim.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "twincalib/errors.hpp"

namespace twincalib::netsim {

namespace {

constexpr double kBitsPerKb = 8000.0;
constexpr double kBitsPerMb = 8e6;

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

}  // namespace

NetworkLayout NetworkLayout::defaults() {
  NetworkLayout l;
  l.bands = {{"f1", 2.1, 10.0, 43.0, 15.0}, {"f2", 3.5, 20.0, 43.0, 15.0}};
  return l;
}

void NetworkLayout::validate() const {
  if (num_gnbs < 1) throw DomainError("layout: num_gnbs must be >= 1");
  if (num_gnbs > 37) throw DomainError("layout: num_gnbs must be <= 37 (three rings)");
  if (!(inter_site_distance_km > 0.0)) throw DomainError("layout: inter_site_distance_km must be > 0");
  if (sectors != 3) throw DomainError("layout: only 3-sector sites are modelled");
  if (bands.empty()) throw DomainError("layout: at least one band is required");
  for (const auto& b : bands)
    if (!(b.bandwidth_mhz > 0.0)) throw DomainError("layout: band '" + b.label + "' needs bandwidth > 0");
  if (cell_radius_km < 0.0) throw DomainError("layout: cell_radius_km must be >= 0");
  if (!(min_ue_distance_km > 0.0) || min_ue_distance_km >= effective_cell_radius())
    throw DomainError("layout: min_ue_distance_km must be in (0, cell radius)");
}

double NetworkLayout::effective_cell_radius() const {
  return cell_radius_km > 0.0 ? cell_radius_km : inter_site_distance_km / std::numbers::sqrt3;
}

std::vector<Eigen::Vector2d> NetworkLayout::gnb_positions() const {
  struct Site {
    long ring_key;
    double angle;
    Eigen::Vector2d pos;
  };
  std::vector<Site> sites;
  for (int q = -4; q <= 4; ++q) {
    for (int r = -4; r <= 4; ++r) {
      const Eigen::Vector2d p(q + 0.5 * r, std::numbers::sqrt3 / 2.0 * r);
      double a = std::atan2(p.y(), p.x());
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      sites.push_back({std::lround(p.norm() * 1e6), std::round(a * 1e9) / 1e9, p * inter_site_distance_km});
    }
  }
  std::stable_sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    return a.ring_key != b.ring_key ? a.ring_key < b.ring_key : a.angle < b.angle;
  });
  std::vector<Eigen::Vector2d> out;
  for (std::size_t i = 0; i < num_gnbs && i < sites.size(); ++i) out.push_back(sites[i].pos);
  return out;
}

void SimConfig::validate() const {
  if (intervals < 1) throw DomainError("sim: intervals must be >= 1");
  if (mc_ue_drops < 1) throw DomainError("sim: mc_ue_drops must be >= 1");
  if (!(interval_minutes > 0.0)) throw DomainError("sim: interval_minutes must be > 0");
  if (!(noise_stddev >= 0.0)) throw DomainError("sim: noise_stddev must be >= 0");
  if (!(spectral_efficiency_cap > 0.0)) throw DomainError("sim: spectral_efficiency_cap must be > 0");
}

SearchSpace default_search_space() {
  return SearchSpace({
      {"packet_size_kb", DimensionKind::continuous, 0.05, 30.0, "kB"},
      {"interarrival_ms", DimensionKind::continuous, 0.0, 300.0, "ms"},
      {"ues_per_cell", DimensionKind::discrete, 3.0, 50.0, "UEs"},
  });
}

SimParams decode(const SearchSpace& space, const MixedVector& x) {
  space.check_length(x.size());
  SimParams p;
  p.packet_size_kb = x(static_cast<Eigen::Index>(space.index_of("packet_size_kb")));
  p.interarrival_ms = x(static_cast<Eigen::Index>(space.index_of("interarrival_ms")));
  p.ues_per_cell = static_cast<int>(std::lround(x(static_cast<Eigen::Index>(space.index_of("ues_per_cell")))));
  return p;
}

MixedVector encode(const SearchSpace& space, const SimParams& p) {
  MixedVector x = MixedVector::Zero(static_cast<Eigen::Index>(space.size()));
  x(static_cast<Eigen::Index>(space.index_of("packet_size_kb"))) = p.packet_size_kb;
  x(static_cast<Eigen::Index>(space.index_of("interarrival_ms"))) = p.interarrival_ms;
  x(static_cast<Eigen::Index>(space.index_of("ues_per_cell"))) = p.ues_per_cell;
  return x;
}

double path_loss_db(double distance_km) {
  if (!(distance_km > 0.0)) throw DomainError("path_loss_db: distance must be > 0");
  return 128.1 + 37.6 * std::log10(distance_km);
}

double thermal_noise_dbm(const SimConfig& cfg, const BandSpec& band) {
  return cfg.thermal_noise_dbm_hz + 10.0 * std::log10(band.bandwidth_hz());
}

namespace {

double sinr_at(const std::vector<Eigen::Vector2d>& sites, const BandSpec& band, const Eigen::Vector2d& pos,
               const SimConfig& cfg, bool interference) {
  const double eirp = band.tx_power_dbm + band.antenna_gain_dbi;
  const double signal = dbm_to_mw(eirp - path_loss_db(std::max((pos - sites[0]).norm(), 1e-6)));
  double denom = dbm_to_mw(thermal_noise_dbm(cfg, band));
  if (interference)
    for (std::size_t i = 1; i < sites.size(); ++i)
      denom += dbm_to_mw(eirp - path_loss_db(std::max((pos - sites[i]).norm(), 1e-6)));
  return signal / denom;
}

}  // namespace

double ue_sinr(const NetworkLayout& layout, const BandSpec& band, const Eigen::Vector2d& pos, const SimConfig& cfg,
               bool interference) {
  return sinr_at(layout.gnb_positions(), band, pos, cfg, interference);
}

double cell_capacity(const NetworkLayout& layout, const BandSpec& band, const std::vector<Eigen::Vector2d>& ues,
                     const SimConfig& cfg) {
  if (ues.empty()) return 0.0;
  const auto sites = layout.gnb_positions();
  Eigen::VectorXd eff(static_cast<Eigen::Index>(ues.size()));
  for (std::size_t i = 0; i < ues.size(); ++i)
    eff(static_cast<Eigen::Index>(i)) =
        std::max(1e-9, spectral_efficiency(sinr_at(sites, band, ues[i], cfg, true), cfg.spectral_efficiency_cap));
  return harmonic_capacity(band.bandwidth_hz(), eff);
}

std::vector<Eigen::Vector2d> drop_ues(const NetworkLayout& layout, SeededRng& rng, std::size_t count) {
  const double r0 = layout.min_ue_distance_km;
  const double r1 = layout.effective_cell_radius();
  const double half_width = std::numbers::pi / 3.0;
  std::vector<Eigen::Vector2d> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = std::sqrt(r0 * r0 + rng.uniform() * (r1 * r1 - r0 * r0));
    const double a = rng.uniform(-half_width, half_width);
    out.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return out;
}

SeededRng drop_stream(const SimConfig& cfg, std::size_t band, std::size_t drop) {
  return SeededRng(cfg.drop_seed, 0xD209).derive(band).derive(drop);
}

SeededRng interval_stream(std::uint64_t seed, std::size_t band, std::size_t interval) {
  return SeededRng(seed, 0x5E71).derive(band).derive(interval);
}

QueueOutcome processor_sharing_outcome(double offered_bits_per_ms, double capacity_bits_per_ms, int ues,
                                       double interval_ms) {
  QueueOutcome q;
  q.capacity_mb = capacity_bits_per_ms * interval_ms / kBitsPerMb;
  q.rho = capacity_bits_per_ms > 0.0 ? offered_bits_per_ms / capacity_bits_per_ms
                                     : std::numeric_limits<double>::infinity();
  if (q.rho < 1.0) {
    q.cell_load = q.rho;
    q.active_ues = std::min(q.rho / (1.0 - q.rho), static_cast<double>(ues));
    q.dl_volume_mb = offered_bits_per_ms * interval_ms / kBitsPerMb;
  } else {
    q.saturated = true;
    q.cell_load = 1.0;
    q.active_ues = static_cast<double>(ues);
    q.dl_volume_mb = q.capacity_mb;
  }
  return q;
}

namespace {

Eigen::VectorXd inverse_efficiency_prefix(const NetworkLayout& layout, const BandSpec& band, const SimConfig& cfg,
                                          SeededRng rng, int count) {
  const auto ues = drop_ues(layout, rng, static_cast<std::size_t>(count));
  const auto sites = layout.gnb_positions();
  Eigen::VectorXd prefix = Eigen::VectorXd::Zero(count + 1);
  for (int i = 0; i < count; ++i) {
    const double e = std::max(1e-9, spectral_efficiency(sinr_at(sites, band, ues[static_cast<std::size_t>(i)], cfg, true),
                                                        cfg.spectral_efficiency_cap));
    prefix(i + 1) = prefix(i) + 1.0 / e;
  }
  return prefix;
}

// Averages the per-drop queue outcomes and applies observation noise.
template <typename PrefixAt>
IntervalKpis combine_drops(const SimParams& params, const SimConfig& cfg, double bandwidth_hz, PrefixAt&& prefix_at,
                           SeededRng& rng) {
  const int n = params.ues_per_cell;
  if (n < 1) throw DomainError("simulate: ues_per_cell must be >= 1");
  if (!(params.packet_size_kb >= 0.0) || !(params.interarrival_ms >= 0.0))
    throw DomainError("simulate: packet size and inter-arrival mean must be >= 0");
  const double per_ue = params.interarrival_ms > 0.0 ? params.packet_size_kb * kBitsPerKb / params.interarrival_ms
                                                     : std::numeric_limits<double>::infinity();
  const double offered = params.packet_size_kb > 0.0 ? n * per_ue : 0.0;
  IntervalKpis k;
  for (std::size_t j = 0; j < cfg.mc_ue_drops; ++j) {
    const double inv_sum = prefix_at(j)(n);
    const double capacity = bandwidth_hz / 1000.0 * n / inv_sum;
    const QueueOutcome q = processor_sharing_outcome(offered, capacity, n, cfg.interval_ms());
    k.active_ues += q.active_ues;
    k.cell_load += q.cell_load;
    k.dl_volume += q.dl_volume_mb;
    k.capacity_mb += q.capacity_mb;
    if (q.saturated) ++k.saturated_drops;
  }
  const double m = static_cast<double>(cfg.mc_ue_drops);
  k.active_ues /= m;
  k.cell_load /= m;
  k.dl_volume /= m;
  k.capacity_mb /= m;
  if (cfg.noise_stddev > 0.0) {
    const double ea = std::max(0.0, 1.0 + cfg.noise_stddev * rng.normal());
    const double el = std::max(0.0, 1.0 + cfg.noise_stddev * rng.normal());
    const double ev = std::max(0.0, 1.0 + cfg.noise_stddev * rng.normal());
    k.active_ues = std::min(k.active_ues * ea, static_cast<double>(n));
    k.cell_load = std::min(k.cell_load * el, 1.0);
    k.dl_volume = std::min(k.dl_volume * ev, k.capacity_mb);
  }
  return k;
}

}  // namespace

IntervalKpis simulate_interval(const NetworkLayout& layout, std::size_t band, const SimParams& params,
                               const SimConfig& cfg, SeededRng& rng) {
  const BandSpec& b = layout.bands.at(band);
  std::vector<Eigen::VectorXd> prefixes;
  for (std::size_t j = 0; j < cfg.mc_ue_drops; ++j)
    prefixes.push_back(
        inverse_efficiency_prefix(layout, b, cfg, drop_stream(cfg, band, j), std::max(params.ues_per_cell, 1)));
  return combine_drops(params, cfg, b.bandwidth_hz(), [&](std::size_t j) -> const Eigen::VectorXd& {
    return prefixes[j];
  }, rng);
}

ForwardModel::ForwardModel(const NetworkLayout& layout, std::size_t band, const SimConfig& cfg, int max_ues)
    : cfg_(cfg), band_(band), max_ues_(max_ues) {
  layout.validate();
  cfg.validate();
  if (max_ues < 1) throw DomainError("ForwardModel: max_ues must be >= 1");
  const BandSpec& b = layout.bands.at(band);
  bandwidth_hz_ = b.bandwidth_hz();
  inverse_prefix_.reserve(cfg.mc_ue_drops);
  for (std::size_t j = 0; j < cfg.mc_ue_drops; ++j)
    inverse_prefix_.push_back(inverse_efficiency_prefix(layout, b, cfg, drop_stream(cfg, band, j), max_ues));
}

IntervalKpis ForwardModel::interval(const SimParams& params, std::size_t t, SeededRng& rng) const {
  if (params.ues_per_cell > max_ues_)
    throw DomainError("ForwardModel: ues_per_cell " + std::to_string(params.ues_per_cell) +
                      " exceeds precomputed maximum " + std::to_string(max_ues_));
  if (t >= cfg_.intervals) throw DimensionError("ForwardModel: interval index out of range");
  return combine_drops(params, cfg_, bandwidth_hz_, [&](std::size_t j) -> const Eigen::VectorXd& {
    return inverse_prefix_[j];
  }, rng);
}

KpiSeries ForwardModel::simulate(const SimParams& params, std::uint64_t seed) const {
  return simulate(std::vector<SimParams>(cfg_.intervals, params), seed);
}

KpiSeries ForwardModel::simulate(const std::vector<SimParams>& schedule, std::uint64_t seed) const {
  if (schedule.size() != cfg_.intervals)
    throw DimensionError("simulate: schedule has " + std::to_string(schedule.size()) + " entries, expected " +
                         std::to_string(cfg_.intervals));
  KpiSeries s(static_cast<Eigen::Index>(cfg_.intervals));
  for (std::size_t t = 0; t < cfg_.intervals; ++t) {
    SeededRng rng = interval_stream(seed, band_, t);
    const IntervalKpis k = interval(schedule[t], t, rng);
    const auto i = static_cast<Eigen::Index>(t);
    s.active_ues(i) = k.active_ues;
    s.cell_load(i) = k.cell_load;
    s.dl_volume(i) = k.dl_volume;
  }
  return s;
}

KpiSeries simulate_series(const NetworkLayout& layout, std::size_t band, const std::vector<SimParams>& schedule,
                          const SimConfig& cfg, std::uint64_t seed) {
  if (schedule.size() != cfg.intervals)
    throw DimensionError("simulate_series: schedule has " + std::to_string(schedule.size()) + " entries, expected " +
                         std::to_string(cfg.intervals));
  int max_ues = 1;
  for (const auto& p : schedule) max_ues = std::max(max_ues, p.ues_per_cell);
  return ForwardModel(layout, band, cfg, max_ues).simulate(schedule, seed);
}

}  // namespace twincalib::netsim
