#pragma once

// Replication error, preference scalarization and alpha-fair aggregation.
//
// All functions take Eigen dense expressions so callers can pass arrays,
// vectors, blocks or arithmetic expressions without materializing them.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "twincalib/errors.hpp"

namespace twincalib {

inline constexpr std::size_t kNumKpis = 3;
inline constexpr std::array<const char*, kNumKpis> kKpiNames = {"active_ues", "cell_load", "dl_volume"};

/// Three KPI time series for one (site, band) cell.
struct KpiSeries {
  Eigen::VectorXd active_ues;
  Eigen::VectorXd cell_load;  // PRB utilization, [0, 1]
  Eigen::VectorXd dl_volume;  // MB per interval

  KpiSeries() = default;
  explicit KpiSeries(Eigen::Index intervals)
      : active_ues(Eigen::VectorXd::Zero(intervals)),
        cell_load(Eigen::VectorXd::Zero(intervals)),
        dl_volume(Eigen::VectorXd::Zero(intervals)) {}

  Eigen::Index intervals() const { return active_ues.size(); }

  const Eigen::VectorXd& kpi(std::size_t i) const {
    return i == 0 ? active_ues : (i == 1 ? cell_load : dl_volume);
  }
  Eigen::VectorXd& kpi(std::size_t i) { return i == 0 ? active_ues : (i == 1 ? cell_load : dl_volume); }

  /// Throws DimensionError / DomainError when the series invariants fail.
  void validate() const {
    if (cell_load.size() != active_ues.size() || dl_volume.size() != active_ues.size())
      throw DimensionError("KPI series have different lengths");
    if ((active_ues.array() < 0.0).any() || (dl_volume.array() < 0.0).any())
      throw DomainError("KPI series contain negative values");
    if ((cell_load.array() < 0.0).any() || (cell_load.array() > 1.0).any())
      throw DomainError("cell load outside [0, 1]");
  }
};

using ErrorVector = Eigen::Vector3d;

/// Preference weights: positive, summing to one.
class PreferenceVector {
 public:
  explicit PreferenceVector(const Eigen::Vector3d& weights) : weights_(weights) {
    if ((weights_.array() <= 0.0).any() || !weights_.allFinite())
      throw DomainError("preference weights must be positive");
    if (std::abs(weights_.sum() - 1.0) > 1e-9) throw DomainError("preference weights must sum to 1");
  }
  static PreferenceVector uniform() { return PreferenceVector(Eigen::Vector3d::Constant(1.0 / 3.0)); }

  const Eigen::Vector3d& weights() const { return weights_; }
  double operator[](Eigen::Index i) const { return weights_(i); }

 private:
  Eigen::Vector3d weights_;
};

struct FairnessConfig {
  double alpha = 1.0;
  double epsilon_floor = 1e-6;
};

inline constexpr double kDefaultEpsilonFloor = 1e-6;

/// Mean absolute percentage error. Targets with |y| below the floor are left
/// out of the mean.
template <typename DerivedA, typename DerivedB>
double mape(const Eigen::DenseBase<DerivedA>& sim, const Eigen::DenseBase<DerivedB>& target,
            double floor = kDefaultEpsilonFloor) {
  if (sim.size() != target.size()) throw DimensionError("mape: simulated and target lengths differ");
  if (sim.size() == 0) throw DimensionError("mape: empty series");
  double acc = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index t = 0; t < sim.size(); ++t) {
    const double y = static_cast<double>(target.derived().coeff(t));
    if (std::abs(y) < floor) continue;
    acc += std::abs((static_cast<double>(sim.derived().coeff(t)) - y) / y);
    ++used;
  }
  if (used == 0) throw UndefinedTargetError("mape: every target value is below the floor");
  return 100.0 * acc / static_cast<double>(used);
}

inline ErrorVector kpi_error_vector(const KpiSeries& sim, const KpiSeries& target,
                                    double floor = kDefaultEpsilonFloor) {
  if (sim.intervals() != target.intervals())
    throw DimensionError("kpi_error_vector: interval counts differ (" + std::to_string(sim.intervals()) +
                         " vs " + std::to_string(target.intervals()) + ")");
  ErrorVector g;
  for (std::size_t i = 0; i < kNumKpis; ++i)
    g(static_cast<Eigen::Index>(i)) = mape(sim.kpi(i), target.kpi(i), floor);
  return g;
}

/// T_i = p_i * g_i.
template <typename DerivedP, typename DerivedG>
auto weighted_errors(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedG>& g) {
  if (p.size() != g.size()) throw DimensionError("weighted_errors: length mismatch");
  return p.cwiseProduct(g);
}

inline Eigen::Vector3d weighted_errors(const PreferenceVector& p, const ErrorVector& g) {
  return p.weights().cwiseProduct(g);
}

template <typename DerivedP, typename DerivedG>
double scalarized_objective(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedG>& g) {
  return weighted_errors(p, g).sum();
}

inline double scalarized_objective(const PreferenceVector& p, const ErrorVector& g) {
  return weighted_errors(p, g).sum();
}

/// U_alpha(t) = t^(1-alpha)/(1-alpha), or ln t at alpha = 1. t is floored at
/// cfg.epsilon_floor first.
template <typename Scalar>
Scalar alpha_utility(const FairnessConfig& cfg, Scalar t) {
  using std::log;
  using std::pow;
  const Scalar x = t < Scalar(cfg.epsilon_floor) ? Scalar(cfg.epsilon_floor) : t;
  if (cfg.alpha == 1.0) return log(x);
  const Scalar e = Scalar(1.0 - cfg.alpha);
  return pow(x, e) / e;
}

template <typename DerivedP, typename DerivedG>
double fairness_objective(const FairnessConfig& cfg, const Eigen::MatrixBase<DerivedP>& p,
                          const Eigen::MatrixBase<DerivedG>& g) {
  const auto t = weighted_errors(p, g).eval();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) acc += alpha_utility(cfg, static_cast<double>(t(i)));
  return acc;
}

inline double fairness_objective(const FairnessConfig& cfg, const PreferenceVector& p, const ErrorVector& g) {
  return fairness_objective(cfg, p.weights(), g);
}

/// Jain's index (sum T)^2 / (n sum T^2). The all-zero vector counts as
/// perfectly fair.
template <typename Derived>
double jains_index(const Eigen::DenseBase<Derived>& t) {
  if (t.size() == 0) throw DimensionError("jains_index: empty vector");
  const auto a = t.derived().array().template cast<double>();
  const double sq = a.square().sum();
  if (sq == 0.0) return 1.0;
  const double s = a.sum();
  return s * s / (static_cast<double>(t.size()) * sq);
}

}  // namespace twincalib
