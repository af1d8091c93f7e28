// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 when every
// criterion ran to a verdict; with --strict, any FAIL gives exit code 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "twincalib/cli.hpp"
#include "twincalib/dataset.hpp"
#include "twincalib/experiment.hpp"
#include "twincalib/netsim.hpp"
#include "twincalib/objective.hpp"
#include "twincalib/runner.hpp"
#include "twincalib/swarm.hpp"

using namespace twincalib;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double a = 0.0;
  for (double x : v) a += x;
  return a / static_cast<double>(v.size());
}

// Field data with a systematic per-KPI mismatch and observation noise, so the
// three KPIs cannot all be fit at once.
harness::FieldDataset conflict_dataset(const netsim::NetworkLayout& layout, const netsim::SimConfig& sim) {
  harness::FieldConfig f = harness::FieldConfig::defaults();
  f.noise_stddev = 0.05;
  f.kpi_offset = Eigen::Vector3d(0.25, 0.0, -0.25);
  return harness::gen_field_dataset(layout, f, sim, 1);
}

Verdict criterion1() {
  const auto start = Clock::now();
  const FairnessConfig u1{1.0, kDefaultEpsilonFloor}, u0{0.0, kDefaultEpsilonFloor};
  bool ok = alpha_utility(u1, 1.0) == 0.0;
  for (double t : {0.5, 1.0, 7.0}) ok = ok && alpha_utility(u0, t) == t;
  ok = ok && std::abs(jains_index(Eigen::Vector3d::Constant(2.5)) - 1.0) <= 1e-12;
  ok = ok && std::abs(jains_index(Eigen::Vector3d(1, 0, 0)) - 1.0 / 3.0) <= 1e-12;
  ok = ok && std::abs(jains_index(Eigen::Vector3d(1, 2, 3)) - 6.0 / 7.0) <= 1e-12;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(96, 1.0, 50.0);
  ok = ok && mape(y, y) == 0.0;
  ok = ok && netsim::path_loss_db(1.0) == 128.1;
  const double t = seconds_since(start);
  return {ok && t < 1.0, std::string(ok ? "identities hold" : "identity violated") + fmt(" runtime=%.3fs", t)};
}

Verdict criterion2() {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  const double pre = opt::inertia_attraction(1.1, 1.1, 0.8, one, Eigen::VectorXd::Zero(1), one,
                                             Eigen::VectorXd::Constant(1, 2.0), one, one)(0);
  const double err = std::abs(pre - 3.8);

  SearchSpace space({{"a", DimensionKind::continuous, -10.0, 10.0, ""},
                     {"b", DimensionKind::continuous, 0.0, 1.0, ""},
                     {"k", DimensionKind::discrete, 0.0, 20.0, ""}});
  opt::PsoConfig cfg;
  cfg.v_max_fraction = 1.0;
  SeededRng r(2024);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    opt::Particle p;
    p.position = space.sample_uniform(r);
    p.personal_best = p.position;
    p.velocity = Eigen::VectorXd(3);
    for (Eigen::Index d = 0; d < 3; ++d) p.velocity(d) = r.uniform(-0.9, 0.9);
    const Eigen::VectorXd v = opt::velocity_update(cfg, space, p, p.position, r);
    if (((v - cfg.w * p.velocity).array().abs() > 1e-12).any()) ++bad;
  }
  return {err <= 1e-12 && bad == 0, fmt("pre-clip=%.15g", pre) + fmt(" inertia-mismatches=%g/1000", double(bad))};
}

Verdict criterion3() {
  const auto start = Clock::now();
  const auto layout = netsim::NetworkLayout::defaults();
  const netsim::SimConfig sim;
  const auto data = conflict_dataset(layout, sim);
  const KpiSeries target = data.series("site0", "f1");
  const auto base = netsim::default_search_space();
  const netsim::ForwardModel model(layout, 0, sim, static_cast<int>(base.upper()(2)));

  auto level = [&](std::size_t dim, double idx) {
    const double lo = base.lower()(static_cast<Eigen::Index>(dim)), hi = base.upper()(static_cast<Eigen::Index>(dim));
    return lo + idx * (hi - lo) / 8.0;
  };
  auto grid_objective = [&](double i, double j, double k) {
    netsim::SimParams p{level(0, i), level(1, j), static_cast<int>(std::lround(level(2, k)))};
    return scalarized_objective(PreferenceVector::uniform(), kpi_error_vector(model.simulate(p, 0), target));
  };

  double optimum = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j)
      for (int k = 0; k <= 8; ++k) optimum = std::min(optimum, grid_objective(i, j, k));

  // Continuous grid coordinates snap to the nearest level.
  SearchSpace space({{"packet_level", DimensionKind::continuous, 0.0, 8.0, ""},
                     {"interarrival_level", DimensionKind::continuous, 0.0, 8.0, ""},
                     {"ues_level", DimensionKind::discrete, 0.0, 8.0, ""}});
  const opt::Objective f = [&](const MixedVector& x) {
    return grid_objective(std::round(x(0)), std::round(x(1)), x(2));
  };
  opt::RunConfig rc;
  rc.algorithm = opt::Algorithm::mixed_pso;
  rc.iterations = 50;
  rc.pso.num_particles = 5;
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto res = opt::run(rc, space, f, SeededRng(seed));
    if ((res.best_value - optimum) / std::abs(optimum) <= 0.05) ++hits;
  }
  const double t = seconds_since(start);
  return {hits >= 18 && t < 120.0,
          fmt("grid-optimum=%.4f", optimum) + fmt(" within-5%%=%g/20", hits) + fmt(" runtime=%.1fs", t)};
}

Verdict criterion4() {
  const auto start = Clock::now();
  harness::ExperimentSetup s;
  s.experiment.methods = {harness::MethodSpec::parse("mvpso-fair")};
  s.experiment.preferences = {PreferenceVector::uniform()};
  s.experiment.alpha = 1.0;
  s.experiment.iterations = 50;
  s.experiment.pso.num_particles = 5;
  s.experiment.seeds.clear();
  for (std::uint64_t k = 1; k <= 10; ++k) s.experiment.seeds.push_back(k);
  harness::FieldConfig f = harness::FieldConfig::defaults();
  const auto data = harness::gen_field_dataset(s.layout, f, s.sim, 1);
  const auto report = harness::run_experiment(s, data);
  std::map<std::uint64_t, std::vector<double>> per_seed;
  for (const auto& r : report.runs) per_seed[r.seed].push_back(r.mean_mape);
  int ok = 0;
  std::vector<double> means;
  for (const auto& [seed, v] : per_seed) {
    means.push_back(mean(v));
    if (means.back() <= 25.0) ++ok;
  }
  const double t = seconds_since(start);
  return {ok >= 8 && t < 300.0, fmt("seeds-within-25%%=%g/10", ok) + fmt(" median-mean-MAPE=%.2f", median(means)) +
                                    fmt(" runtime=%.1fs", t)};
}

struct ComparisonRun {
  harness::ExperimentReport report;
  std::vector<std::string> baselines;
};

ComparisonRun comparison() {
  harness::ExperimentSetup s;
  s.experiment = harness::ExperimentConfig::defaults();
  s.experiment.seeds.clear();
  for (std::uint64_t k = 1; k <= 20; ++k) s.experiment.seeds.push_back(k);
  s.experiment.parallel = std::max(1u, std::thread::hardware_concurrency());
  const auto data = conflict_dataset(s.layout, s.sim);
  return {harness::run_experiment(s, data), {"random", "bo", "pso"}};
}

using Key = std::tuple<std::size_t, std::string, std::string, std::uint64_t>;

std::map<Key, const harness::RunRecord*> index_runs(const harness::ExperimentReport& r, const std::string& method) {
  std::map<Key, const harness::RunRecord*> out;
  for (const auto& run : r.runs)
    if (run.method == method) out[{run.preference_index, run.site, run.band, run.seed}] = &run;
  return out;
}

Verdict criterion5(const ComparisonRun& c) {
  const auto fair = index_runs(c.report, "mvpso-fair");
  const auto pso = index_runs(c.report, "pso");
  std::vector<double> jf, jp, diff;
  for (const auto& [k, rf] : fair) {
    const auto* rp = pso.at(k);
    jf.push_back(rf->jain);
    jp.push_back(rp->jain);
    diff.push_back(rf->jain - rp->jain);
  }
  const double mf = mean(jf), mp = mean(jp), md = mean(diff);
  return {mf > mp && md > 0.0, fmt("jain mvpso-fair=%.4f", mf) + fmt(" pso=%.4f", mp) + fmt(" paired-diff=%.4f", md) +
                                   fmt(" pairs=%g", double(diff.size()))};
}

Verdict criterion6(const ComparisonRun& c) {
  bool skew_ok = true;
  std::string worst;
  double worst_share = 1.0;
  for (const auto& m : c.baselines) {
    std::map<std::size_t, std::pair<int, int>> counts;
    for (const auto& r : c.report.runs) {
      if (r.method != m) continue;
      Eigen::Index heavy = 0, smallest = 0;
      r.preference.maxCoeff(&heavy);
      r.kpi_mape.minCoeff(&smallest);
      auto& [hit, total] = counts[r.preference_index];
      hit += heavy == smallest;
      ++total;
    }
    for (const auto& [p, ht] : counts) {
      const double share = static_cast<double>(ht.first) / ht.second;
      if (share < 0.7) skew_ok = false;
      if (share < worst_share) {
        worst_share = share;
        worst = m + "/p" + std::to_string(p + 1);
      }
    }
  }
  const auto fair = index_runs(c.report, "mvpso-fair");
  const auto pso = index_runs(c.report, "pso");
  int better = 0;
  for (const auto& [k, rf] : fair)
    if (rf->kpi_mape.maxCoeff() < pso.at(k)->kpi_mape.maxCoeff()) ++better;
  const bool max_ok = 2 * better > static_cast<int>(fair.size());
  return {skew_ok && max_ok, fmt("lowest-skew-share=%.2f", worst_share) + " (" + worst + ")" +
                                 fmt(" max-MAPE-reduced=%g", better) + fmt("/%g", double(fair.size()))};
}

Verdict criterion7(const ComparisonRun& c) {
  std::vector<double> fair, rnd;
  for (const auto& r : c.report.runs) {
    if (r.method == "mvpso-fair") fair.push_back(static_cast<double>(r.convergence_iteration));
    if (r.method == "random") rnd.push_back(static_cast<double>(r.convergence_iteration));
  }
  const double mf = median(fair), mr = median(rnd);
  return {mf <= 10.0 && mf <= mr, fmt("median mvpso-fair=%.1f", mf) + fmt(" random=%.1f", mr)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict criterion8() {
  const fs::path dir = fs::temp_directory_path() / ("twincalib_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "c.toml") << "[sim]\nintervals = 24\n[experiment]\niterations = 10\n";
  std::ostringstream sink;
  auto cli_run = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };
  const auto cfg = (dir / "c.toml").string();
  bool ok = cli_run({"gen-field", "--config", cfg, "--out", (dir / "field.csv").string()}) == 0;
  const std::vector<std::string> base = {"compare", "--config", cfg, "--methods", "random,bo,pso,mvpso-fair",
                                         "--seeds", "1..3", "--data", (dir / "field.csv").string()};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  ok = ok && cli_run(with({"--out", (dir / "a").string()})) == 0;
  ok = ok && cli_run(with({"--out", (dir / "b").string()})) == 0;
  ok = ok && cli_run(with({"--parallel", "8", "--out", (dir / "c").string()})) == 0;
  int identical = 0, compared = 0;
  for (const char* f : {"report.json", "curves.csv", "mape.csv", "kpi_mape.csv", "jain.csv", "convergence.csv"}) {
    const auto a = slurp(dir / "a" / f);
    for (const char* other : {"b", "c"}) {
      ++compared;
      identical += !a.empty() && a == slurp(dir / other / f);
    }
  }
  fs::remove_all(dir);
  return {ok && identical == compared, fmt("identical-files=%g", identical) + fmt("/%g", compared)};
}

Verdict criterion9() {
  const auto start = Clock::now();
  const auto layout = netsim::NetworkLayout::defaults();
  const auto space = netsim::default_search_space();
  const int max_ues = static_cast<int>(space.upper()(2));
  netsim::SimConfig single;
  single.intervals = 1;
  single.mc_ue_drops = 1;
  std::vector<netsim::ForwardModel> drops;
  for (std::uint64_t d = 1; d <= 16; ++d) {
    single.drop_seed = d;
    for (std::size_t b = 0; b < layout.bands.size(); ++b) drops.emplace_back(layout, b, single, max_ues);
  }
  netsim::SimConfig noisy;
  noisy.intervals = 1;
  noisy.noise_stddev = 0.2;
  std::vector<netsim::ForwardModel> averaged;
  for (std::size_t b = 0; b < layout.bands.size(); ++b) averaged.emplace_back(layout, b, noisy, max_ues);

  SeededRng r(99);
  std::size_t violations = 0, mono_checks = 0;
  auto bounded = [&](const netsim::IntervalKpis& k, int n) {
    return k.cell_load >= 0.0 && k.cell_load <= 1.0 && k.active_ues >= 0.0 && k.active_ues <= n &&
           k.dl_volume >= 0.0 && k.dl_volume <= k.capacity_mb * (1.0 + 1e-12);
  };
  for (int i = 0; i < 10000; ++i) {
    const netsim::SimParams p = netsim::decode(space, space.sample_uniform(r));
    const auto& model = drops[static_cast<std::size_t>(r.uniform_int(0, static_cast<std::int64_t>(drops.size()) - 1))];
    SeededRng noise = r.derive(static_cast<std::uint64_t>(i));
    const auto k = model.interval(p, 0, noise);
    if (!bounded(k, p.ues_per_cell)) ++violations;
    const auto kn = averaged[static_cast<std::size_t>(i) % averaged.size()].interval(p, 0, noise);
    if (!bounded(kn, p.ues_per_cell)) ++violations;
    if (k.saturated_drops) continue;

    const double grow = 1.0 + r.uniform(0.0, 0.5);
    auto check = [&](netsim::SimParams q, int direction) {
      const auto kq = model.interval(q, 0, noise);
      if (kq.saturated_drops) return;
      ++mono_checks;
      const double dl = kq.cell_load - k.cell_load, dv = kq.dl_volume - k.dl_volume;
      if (direction * dl < -1e-12 || direction * dv < -1e-9 * std::max(1.0, k.dl_volume)) ++violations;
    };
    netsim::SimParams q = p;
    q.packet_size_kb *= grow;
    check(q, +1);
    q = p;
    q.interarrival_ms *= grow;
    check(q, -1);
    if (p.ues_per_cell < max_ues) {
      q = p;
      q.ues_per_cell += 1;
      check(q, +1);
    }
  }
  const double t = seconds_since(start);
  return {violations == 0, fmt("violations=%g", double(violations)) + fmt(" monotonicity-checks=%g", double(mono_checks)) +
                               fmt(" runtime=%.1fs", t)};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
  int failures = 0;
  auto report = [&](int id, const Verdict& v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << v.detail << std::endl;
    failures += !v.pass;
  };
  try {
    report(1, criterion1());
    report(2, criterion2());
    report(3, criterion3());
    report(4, criterion4());
    const ComparisonRun cmp = comparison();
    report(5, criterion5(cmp));
    report(6, criterion6(cmp));
    report(7, criterion7(cmp));
    report(8, criterion8());
    report(9, criterion9());
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << '\n';
    return 2;
  }
  std::cout << (9 - failures) << "/9 criteria passed" << std::endl;
  return strict && failures ? 1 : 0;
}
