#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "twincalib/dataset.hpp"
#include "twincalib/netsim.hpp"
#include "twincalib/objective.hpp"
#include "twincalib/runner.hpp"

namespace twincalib::harness {

/// An optimizer plus the objective it minimizes: the alpha-fair objective
/// when `fairness` is set, the preference-weighted sum otherwise.
struct MethodSpec {
  opt::Algorithm algorithm = opt::Algorithm::mixed_pso;
  bool fairness = false;

  /// "random", "bo", "pso", "mvpso", each optionally suffixed "-fair".
  static MethodSpec parse(const std::string& name);
  std::string name() const;
};

struct ExperimentConfig {
  std::vector<MethodSpec> methods;
  std::vector<PreferenceVector> preferences;
  double alpha = 1.0;
  double epsilon_floor = kDefaultEpsilonFloor;
  std::vector<std::uint64_t> seeds;
  std::size_t iterations = 50;
  opt::PsoConfig pso;
  opt::BoConfig bo;
  double convergence_tolerance = 0.05;
  std::size_t parallel = 1;

  /// random, bo, pso, mvpso-fair; p1..p3 = [0.8,0.1,0.1], [0.1,0.8,0.1],
  /// [0.1,0.1,0.8]; alpha 1; seed 1; 50 iterations.
  static ExperimentConfig defaults();
  void validate() const;
};

struct ExperimentSetup {
  SearchSpace space = netsim::default_search_space();
  netsim::NetworkLayout layout = netsim::NetworkLayout::defaults();
  netsim::SimConfig sim;
  ExperimentConfig experiment = ExperimentConfig::defaults();
};

struct CurvePoint {
  std::size_t iteration = 0;
  std::size_t evaluations = 0;
  double best_objective = 0.0;
};

struct RunRecord {
  std::string method;
  std::size_t preference_index = 0;
  Eigen::Vector3d preference = Eigen::Vector3d::Zero();
  std::string site;
  std::string band;
  std::uint64_t seed = 0;
  MixedVector best_x;
  double best_objective = 0.0;
  ErrorVector kpi_mape = ErrorVector::Zero();
  double mean_mape = 0.0;
  double jain = 1.0;    // over T = p * G
  double jain_g = 1.0;  // over the per-KPI MAPE vector G
  std::size_t convergence_iteration = 0;
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  double wall_seconds = 0.0;  // not serialized
  std::vector<CurvePoint> curve;
};

struct MethodAggregate {
  std::string method;
  std::size_t runs = 0;
  double mape_mean = 0.0;
  double mape_std = 0.0;
  double jain_mean = 0.0;
  double jain_std = 0.0;
  double jain_g_mean = 0.0;
  double jain_g_std = 0.0;
  double convergence_median = 0.0;
  double evaluations_mean = 0.0;
};

struct ExperimentReport {
  std::vector<RunRecord> runs;
  std::vector<MethodAggregate> aggregates;
};

/// Smallest t with best(t) - best(T) <= tau * (best(0) - best(T)); 0 when the
/// trace never improves. Non-finite leading values are skipped as the
/// reference point.
std::size_t convergence_iteration(const std::vector<double>& best_values, double tau);
std::size_t convergence_iteration(const opt::OptimizationTrace& trace, double tau);

/// Objective over calibration points: simulate with constant parameters,
/// compare against `target`, scalarize.
opt::Objective make_objective(const SearchSpace& space, const netsim::ForwardModel& model, const KpiSeries& target,
                              const MethodSpec& method, const PreferenceVector& p, const FairnessConfig& fairness);

/// Metrics of one calibration point against a target.
struct PointMetrics {
  ErrorVector kpi_mape;
  double mean_mape = 0.0;
  double jain = 1.0;
  double jain_g = 1.0;
};
PointMetrics evaluate_point(const SearchSpace& space, const netsim::ForwardModel& model, const KpiSeries& target,
                            const MixedVector& x, const PreferenceVector& p, double epsilon_floor);

/// One model per layout band, sized for the search space's UE bound.
std::vector<netsim::ForwardModel> build_models(const ExperimentSetup& setup);

/// Every (method, preference, site, band, seed) combination, in that nesting
/// order. Runs execute on experiment.parallel threads; the report does not
/// depend on the thread count.
ExperimentReport run_experiment(const ExperimentSetup& setup, const FieldDataset& data);

/// Unweighted mean and sample standard deviation per method, in the order
/// the methods first appear in `runs`.
std::vector<MethodAggregate> aggregate_runs(const std::vector<RunRecord>& runs);

struct MapeRow {
  std::string method;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t runs = 0;
};
struct KpiMapeRow {
  std::string method;
  std::string preference;
  ErrorVector mape;
};
struct JainRow {
  std::string method;
  double mean = 0.0;
  double stddev = 0.0;
  double g_mean = 0.0;
  double g_stddev = 0.0;
};
struct ConvergenceRow {
  std::string method;
  double median_iteration = 0.0;
  double mean_iteration = 0.0;
  double mean_evaluations = 0.0;
};
struct CurveRow {
  std::string method;
  std::string preference;
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  std::size_t evaluations = 0;
  double best_objective = 0.0;  // mean over (site, band) cells
};

struct ComparisonTables {
  std::vector<MapeRow> mape;
  std::vector<KpiMapeRow> kpi_mape;
  std::vector<JainRow> jain;
  std::vector<ConvergenceRow> convergence;
  std::vector<CurveRow> curves;
};

ComparisonTables compare_methods(const ExperimentReport& report);

/// "0.8:0.1:0.1".
std::string preference_label(const Eigen::Vector3d& p);

void write_mape_csv(const ComparisonTables& t, std::ostream& out);
void write_kpi_mape_csv(const ComparisonTables& t, std::ostream& out);
void write_jain_csv(const ComparisonTables& t, std::ostream& out);
void write_convergence_csv(const ComparisonTables& t, std::ostream& out);
void write_curves_csv(const ComparisonTables& t, std::ostream& out);
void write_timings_csv(const ExperimentReport& r, std::ostream& out);

nlohmann::json report_to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const nlohmann::json& j);

}  // namespace twincalib::harness
