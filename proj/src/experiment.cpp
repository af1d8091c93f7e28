#include "twincalib/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

#include "twincalib/errors.hpp"
#include "twincalib/parallel.hpp"

namespace twincalib::harness {

MethodSpec MethodSpec::parse(const std::string& name) {
  MethodSpec m;
  std::string base = name;
  const std::string suffix = "-fair";
  if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    m.fairness = true;
    base.resize(base.size() - suffix.size());
  }
  m.algorithm = opt::parse_algorithm(base);
  return m;
}

std::string MethodSpec::name() const { return opt::to_string(algorithm) + (fairness ? "-fair" : ""); }

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  for (const char* m : {"random", "bo", "pso", "mvpso-fair"}) c.methods.push_back(MethodSpec::parse(m));
  c.preferences = {PreferenceVector(Eigen::Vector3d(0.8, 0.1, 0.1)), PreferenceVector(Eigen::Vector3d(0.1, 0.8, 0.1)),
                   PreferenceVector(Eigen::Vector3d(0.1, 0.1, 0.8))};
  c.seeds = {1};
  return c;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw DomainError("experiment: at least one method is required");
  if (preferences.empty()) throw DomainError("experiment: at least one preference vector is required");
  if (seeds.empty()) throw DomainError("experiment: at least one seed is required");
  if (!(alpha >= 0.0)) throw DomainError("experiment: alpha must be >= 0");
  if (!(epsilon_floor > 0.0)) throw DomainError("experiment: epsilon_floor must be > 0");
  if (!(convergence_tolerance >= 0.0 && convergence_tolerance <= 1.0))
    throw DomainError("experiment: convergence_tolerance must be in [0, 1]");
  if (parallel < 1) throw DomainError("experiment: parallel must be >= 1");
  pso.validate();
  bo.validate();
}

std::size_t convergence_iteration(const std::vector<double>& best, double tau) {
  if (best.empty()) throw DimensionError("convergence_iteration: empty trace");
  std::size_t first = 0;
  while (first < best.size() && !std::isfinite(best[first])) ++first;
  if (first == best.size()) return 0;
  const double final_value = best.back();
  const double gap = best[first] - final_value;
  if (!(gap > 0.0)) return first;
  const double threshold = tau * gap;
  for (std::size_t t = first; t < best.size(); ++t)
    if (best[t] - final_value <= threshold) return t;
  return best.size() - 1;
}

std::size_t convergence_iteration(const opt::OptimizationTrace& trace, double tau) {
  return convergence_iteration(trace.best_values(), tau);
}

opt::Objective make_objective(const SearchSpace& space, const netsim::ForwardModel& model, const KpiSeries& target,
                              const MethodSpec& method, const PreferenceVector& p, const FairnessConfig& fairness) {
  return [&space, &model, target, fair = method.fairness, p, fairness](const MixedVector& x) {
    const KpiSeries sim = model.simulate(netsim::decode(space, x), 0);
    const ErrorVector g = kpi_error_vector(sim, target, fairness.epsilon_floor);
    return fair ? fairness_objective(fairness, p, g) : scalarized_objective(p, g);
  };
}

PointMetrics evaluate_point(const SearchSpace& space, const netsim::ForwardModel& model, const KpiSeries& target,
                            const MixedVector& x, const PreferenceVector& p, double epsilon_floor) {
  PointMetrics m;
  const KpiSeries sim = model.simulate(netsim::decode(space, x), 0);
  m.kpi_mape = kpi_error_vector(sim, target, epsilon_floor);
  m.mean_mape = m.kpi_mape.mean();
  m.jain = jains_index(weighted_errors(p, m.kpi_mape));
  m.jain_g = jains_index(m.kpi_mape);
  return m;
}

std::vector<netsim::ForwardModel> build_models(const ExperimentSetup& setup) {
  netsim::SimConfig sim = setup.sim;
  sim.noise_stddev = 0.0;
  const int max_ues = static_cast<int>(setup.space.upper()(static_cast<Eigen::Index>(setup.space.index_of("ues_per_cell"))));
  std::vector<netsim::ForwardModel> models;
  for (std::size_t b = 0; b < setup.layout.bands.size(); ++b) models.emplace_back(setup.layout, b, sim, max_ues);
  return models;
}

namespace {

struct Cell {
  std::string site;
  std::string band;
  std::size_t band_index = 0;
  KpiSeries target;
};

struct Job {
  std::size_t method = 0;
  std::size_t preference = 0;
  std::size_t cell = 0;
  std::size_t seed = 0;
};

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSetup& setup, const FieldDataset& data) {
  const auto& ex = setup.experiment;
  ex.validate();
  setup.layout.validate();
  setup.sim.validate();
  data.validate();
  if (data.metadata.intervals != setup.sim.intervals)
    throw DataError("dataset has " + std::to_string(data.metadata.intervals) + " intervals per cell, simulator expects " +
                    std::to_string(setup.sim.intervals));

  const auto models = build_models(setup);
  std::vector<Cell> cells;
  for (const auto& site : data.sites()) {
    for (const auto& band : data.bands()) {
      const auto it = std::find_if(setup.layout.bands.begin(), setup.layout.bands.end(),
                                   [&](const netsim::BandSpec& b) { return b.label == band; });
      if (it == setup.layout.bands.end()) throw DataError("dataset band '" + band + "' is not part of the layout");
      cells.push_back({site, band, static_cast<std::size_t>(it - setup.layout.bands.begin()), data.series(site, band)});
    }
  }

  std::vector<Job> jobs;
  for (std::size_t m = 0; m < ex.methods.size(); ++m)
    for (std::size_t p = 0; p < ex.preferences.size(); ++p)
      for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::size_t s = 0; s < ex.seeds.size(); ++s) jobs.push_back({m, p, c, s});

  const FairnessConfig fairness{ex.alpha, ex.epsilon_floor};
  ExperimentReport report;
  report.runs.resize(jobs.size());
  parallel_for(jobs.size(), ex.parallel, [&](std::size_t j) {
    const Job& job = jobs[j];
    const MethodSpec& method = ex.methods[job.method];
    const PreferenceVector& pref = ex.preferences[job.preference];
    const Cell& cell = cells[job.cell];
    const auto& model = models[cell.band_index];
    const auto start = std::chrono::steady_clock::now();

    opt::RunConfig rc;
    rc.algorithm = method.algorithm;
    rc.iterations = ex.iterations;
    rc.pso = ex.pso;
    rc.bo = ex.bo;
    rc.parallel = 1;
    const auto objective = make_objective(setup.space, model, cell.target, method, pref, fairness);
    // Same stream for every method and preference: matched seeds start from
    // the same random state.
    const opt::RunResult res = opt::run(rc, setup.space, objective, SeededRng(ex.seeds[job.seed], job.cell));

    RunRecord& r = report.runs[j];
    r.method = method.name();
    r.preference_index = job.preference;
    r.preference = pref.weights();
    r.site = cell.site;
    r.band = cell.band;
    r.seed = ex.seeds[job.seed];
    r.best_x = res.best;
    r.best_objective = res.best_value;
    const PointMetrics pm = evaluate_point(setup.space, model, cell.target, res.best, pref, ex.epsilon_floor);
    r.kpi_mape = pm.kpi_mape;
    r.mean_mape = pm.mean_mape;
    r.jain = pm.jain;
    r.jain_g = pm.jain_g;
    r.convergence_iteration = convergence_iteration(res.trace, ex.convergence_tolerance);
    r.evaluations = res.evaluations;
    r.failures = res.failures.size();
    for (const auto& rec : res.trace.records) r.curve.push_back({rec.iteration, rec.evaluations, rec.best_value});
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  report.aggregates = aggregate_runs(report.runs);
  return report;
}

std::vector<MethodAggregate> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::vector<std::string> order;
  for (const auto& r : runs)
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  std::vector<MethodAggregate> out;
  for (const auto& name : order) {
    std::vector<double> mape, jain, jain_w, conv, evals;
    for (const auto& r : runs) {
      if (r.method != name) continue;
      mape.push_back(r.mean_mape);
      jain.push_back(r.jain);
      jain_w.push_back(r.jain_g);
      conv.push_back(static_cast<double>(r.convergence_iteration));
      evals.push_back(static_cast<double>(r.evaluations));
    }
    MethodAggregate a;
    a.method = name;
    a.runs = mape.size();
    a.mape_mean = mean_of(mape);
    a.mape_std = sample_std(mape, a.mape_mean);
    a.jain_mean = mean_of(jain);
    a.jain_std = sample_std(jain, a.jain_mean);
    a.jain_g_mean = mean_of(jain_w);
    a.jain_g_std = sample_std(jain_w, a.jain_g_mean);
    a.convergence_median = median_of(conv);
    a.evaluations_mean = mean_of(evals);
    out.push_back(a);
  }
  return out;
}

std::string preference_label(const Eigen::Vector3d& p) {
  return format_double(p(0)) + ":" + format_double(p(1)) + ":" + format_double(p(2));
}

ComparisonTables compare_methods(const ExperimentReport& report) {
  ComparisonTables t;
  const auto aggregates = aggregate_runs(report.runs);
  for (const auto& a : aggregates) {
    t.mape.push_back({a.method, a.mape_mean, a.mape_std, a.runs});
    t.jain.push_back({a.method, a.jain_mean, a.jain_std, a.jain_g_mean, a.jain_g_std});
    std::vector<double> conv;
    for (const auto& r : report.runs)
      if (r.method == a.method) conv.push_back(static_cast<double>(r.convergence_iteration));
    t.convergence.push_back({a.method, median_of(conv), mean_of(conv), a.evaluations_mean});
  }

  // Per-KPI MAPE per (method, preference), in first-appearance order.
  std::vector<std::pair<std::string, std::size_t>> kpi_keys;
  std::map<std::pair<std::string, std::size_t>, std::pair<ErrorVector, std::size_t>> kpi_acc;
  std::map<std::size_t, Eigen::Vector3d> pref_weights;
  for (const auto& r : report.runs) {
    const auto key = std::make_pair(r.method, r.preference_index);
    auto [it, inserted] = kpi_acc.try_emplace(key, ErrorVector::Zero(), 0);
    if (inserted) kpi_keys.push_back(key);
    it->second.first += r.kpi_mape;
    ++it->second.second;
    pref_weights[r.preference_index] = r.preference;
  }
  for (const auto& key : kpi_keys) {
    const auto& [sum, n] = kpi_acc.at(key);
    t.kpi_mape.push_back({key.first, preference_label(pref_weights.at(key.second)), sum / static_cast<double>(n)});
  }

  // Convergence curves averaged over cells.
  struct CurveKey {
    std::string method;
    std::size_t preference;
    std::uint64_t seed;
    bool operator<(const CurveKey& o) const {
      return std::tie(method, preference, seed) < std::tie(o.method, o.preference, o.seed);
    }
  };
  std::vector<CurveKey> curve_keys;
  std::map<CurveKey, std::pair<std::vector<CurvePoint>, std::size_t>> curve_acc;
  for (const auto& r : report.runs) {
    const CurveKey key{r.method, r.preference_index, r.seed};
    auto it = curve_acc.find(key);
    if (it == curve_acc.end()) {
      curve_keys.push_back(key);
      curve_acc.emplace(key, std::make_pair(r.curve, 1));
      continue;
    }
    auto& [acc, n] = it->second;
    if (acc.size() != r.curve.size()) throw DimensionError("compare_methods: runs have different curve lengths");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i].best_objective += r.curve[i].best_objective;
    ++n;
  }
  for (const auto& key : curve_keys) {
    const auto& [acc, n] = curve_acc.at(key);
    for (const auto& pt : acc)
      t.curves.push_back({key.method, preference_label(pref_weights.at(key.preference)), key.seed, pt.iteration,
                          pt.evaluations, pt.best_objective / static_cast<double>(n)});
  }
  return t;
}

void write_mape_csv(const ComparisonTables& t, std::ostream& out) {
  out << "method,mape_mean,mape_std,runs\n";
  for (const auto& r : t.mape)
    out << r.method << ',' << format_double(r.mean) << ',' << format_double(r.stddev) << ',' << r.runs << '\n';
}

void write_kpi_mape_csv(const ComparisonTables& t, std::ostream& out) {
  out << "method,preference,active_ues,cell_load,dl_volume\n";
  for (const auto& r : t.kpi_mape)
    out << r.method << ',' << r.preference << ',' << format_double(r.mape(0)) << ',' << format_double(r.mape(1)) << ','
        << format_double(r.mape(2)) << '\n';
}

void write_jain_csv(const ComparisonTables& t, std::ostream& out) {
  out << "method,jain_mean,jain_std,jain_g_mean,jain_g_std\n";
  for (const auto& r : t.jain)
    out << r.method << ',' << format_double(r.mean) << ',' << format_double(r.stddev) << ','
        << format_double(r.g_mean) << ',' << format_double(r.g_stddev) << '\n';
}

void write_convergence_csv(const ComparisonTables& t, std::ostream& out) {
  out << "method,median_iteration,mean_iteration,mean_evaluations\n";
  for (const auto& r : t.convergence)
    out << r.method << ',' << format_double(r.median_iteration) << ',' << format_double(r.mean_iteration) << ','
        << format_double(r.mean_evaluations) << '\n';
}

void write_curves_csv(const ComparisonTables& t, std::ostream& out) {
  out << "method,preference,seed,iteration,evaluations,best_objective\n";
  for (const auto& r : t.curves)
    out << r.method << ',' << r.preference << ',' << r.seed << ',' << r.iteration << ',' << r.evaluations << ','
        << format_double(r.best_objective) << '\n';
}

void write_timings_csv(const ExperimentReport& r, std::ostream& out) {
  out << "method,preference,site,band,seed,wall_seconds\n";
  for (const auto& run : r.runs)
    out << run.method << ',' << preference_label(run.preference) << ',' << run.site << ',' << run.band << ','
        << run.seed << ',' << format_double(run.wall_seconds) << '\n';
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd json_vec(const nlohmann::json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = a[i].is_null() ? std::numeric_limits<double>::infinity() : a[i].get<double>();
  return v;
}

double json_num(const nlohmann::json& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

}  // namespace

nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json j;
  auto runs = nlohmann::json::array();
  for (const auto& run : r.runs) {
    nlohmann::json o;
    o["method"] = run.method;
    o["preference_index"] = run.preference_index;
    o["preference"] = vec_json(run.preference);
    o["site"] = run.site;
    o["band"] = run.band;
    o["seed"] = run.seed;
    o["best_x"] = vec_json(run.best_x);
    o["best_objective"] = run.best_objective;
    o["kpi_mape"] = vec_json(run.kpi_mape);
    o["mean_mape"] = run.mean_mape;
    o["jain"] = run.jain;
    o["jain_g"] = run.jain_g;
    o["convergence_iteration"] = run.convergence_iteration;
    o["evaluations"] = run.evaluations;
    o["failures"] = run.failures;
    auto curve = nlohmann::json::array();
    for (const auto& pt : run.curve) curve.push_back({pt.iteration, pt.evaluations, pt.best_objective});
    o["curve"] = std::move(curve);
    runs.push_back(std::move(o));
  }
  j["runs"] = std::move(runs);
  auto aggs = nlohmann::json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"method", a.method},
                    {"runs", a.runs},
                    {"mape_mean", a.mape_mean},
                    {"mape_std", a.mape_std},
                    {"jain_mean", a.jain_mean},
                    {"jain_std", a.jain_std},
                    {"jain_g_mean", a.jain_g_mean},
                    {"jain_g_std", a.jain_g_std},
                    {"convergence_median", a.convergence_median},
                    {"evaluations_mean", a.evaluations_mean}});
  }
  j["aggregates"] = std::move(aggs);
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  try {
    for (const auto& o : j.at("runs")) {
      RunRecord run;
      run.method = o.at("method").get<std::string>();
      run.preference_index = o.at("preference_index").get<std::size_t>();
      run.preference = json_vec(o.at("preference"));
      run.site = o.at("site").get<std::string>();
      run.band = o.at("band").get<std::string>();
      run.seed = o.at("seed").get<std::uint64_t>();
      run.best_x = json_vec(o.at("best_x"));
      run.best_objective = json_num(o.at("best_objective"));
      run.kpi_mape = json_vec(o.at("kpi_mape"));
      run.mean_mape = o.at("mean_mape").get<double>();
      run.jain = o.at("jain").get<double>();
      run.jain_g = o.at("jain_g").get<double>();
      run.convergence_iteration = o.at("convergence_iteration").get<std::size_t>();
      run.evaluations = o.at("evaluations").get<std::size_t>();
      run.failures = o.at("failures").get<std::size_t>();
      for (const auto& pt : o.at("curve"))
        run.curve.push_back({pt.at(0).get<std::size_t>(), pt.at(1).get<std::size_t>(), json_num(pt.at(2))});
      r.runs.push_back(std::move(run));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  r.aggregates = aggregate_runs(r.runs);
  return r;
}

}  // namespace twincalib::harness
