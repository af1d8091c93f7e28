#include "twincalib/runner.hpp"

#include "twincalib/errors.hpp"

namespace twincalib::opt {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::random_search: return "random";
    case Algorithm::bayes_opt: return "bo";
    case Algorithm::standard_pso: return "pso";
    case Algorithm::mixed_pso: return "mvpso";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "random") return Algorithm::random_search;
  if (name == "bo") return Algorithm::bayes_opt;
  if (name == "pso") return Algorithm::standard_pso;
  if (name == "mvpso") return Algorithm::mixed_pso;
  throw DomainError("unknown optimizer '" + name + "'");
}

std::vector<double> OptimizationTrace::best_values() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.best_value);
  return out;
}

MixedVector random_search_suggest(const SearchSpace& space, SeededRng& rng) { return space.sample_uniform(rng); }

namespace {

class Tracker {
 public:
  void offer(const MixedVector& x, double value) {
    if (!have_ || value < best_value_) {
      best_ = x;
      best_value_ = value;
      have_ = true;
    }
  }
  void record(std::size_t iteration, std::size_t evaluations) {
    trace_.records.push_back({iteration, best_value_, best_, evaluations});
  }
  RunResult finish(StepContext& ctx) {
    RunResult r;
    r.trace = std::move(trace_);
    r.best = best_;
    r.best_value = best_value_;
    r.evaluations = ctx.evaluations;
    r.failures = std::move(ctx.failures);
    return r;
  }

 private:
  bool have_ = false;
  MixedVector best_;
  double best_value_ = std::numeric_limits<double>::infinity();
  OptimizationTrace trace_;
};

RunResult run_single_point(const RunConfig& cfg, const SearchSpace& space, const Objective& f, SeededRng rng) {
  StepContext ctx;
  ctx.parallel = 1;
  Tracker tracker;
  std::vector<Observation> history;
  for (std::size_t t = 0; t <= cfg.iterations; ++t) {
    ctx.iteration = t;
    SeededRng it_rng = rng.derive(t);
    MixedVector x = cfg.algorithm == Algorithm::bayes_opt ? bo_suggest(history, space, cfg.bo, it_rng)
                                                          : random_search_suggest(space, it_rng);
    const double value = evaluate_batch(f, {x}, ctx).front();
    tracker.offer(x, value);
    if (cfg.algorithm == Algorithm::bayes_opt) history.push_back({std::move(x), value});
    tracker.record(t, ctx.evaluations);
  }
  return tracker.finish(ctx);
}

RunResult run_swarm(const RunConfig& cfg, const SearchSpace& space, const Objective& f, SeededRng rng) {
  const bool mixed = cfg.algorithm == Algorithm::mixed_pso;
  StepContext ctx;
  ctx.parallel = cfg.parallel;
  Tracker tracker;
  Swarm swarm = init_swarm(cfg.pso, space, f, rng.derive(0), mixed, ctx);
  tracker.offer(swarm.global_best, swarm.global_best_value);
  tracker.record(0, ctx.evaluations);
  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    ctx.iteration = t;
    if (mixed)
      mvpso_step(cfg.pso, space, swarm, f, rng.derive(t), ctx);
    else
      standard_pso_step(cfg.pso, space, swarm, f, rng.derive(t), ctx);
    tracker.offer(swarm.global_best, swarm.global_best_value);
    tracker.record(t, ctx.evaluations);
  }
  return tracker.finish(ctx);
}

}  // namespace

RunResult run(const RunConfig& cfg, const SearchSpace& space, const Objective& f, SeededRng rng) {
  cfg.pso.validate();
  cfg.bo.validate();
  switch (cfg.algorithm) {
    case Algorithm::random_search:
    case Algorithm::bayes_opt:
      return run_single_point(cfg, space, f, rng);
    case Algorithm::standard_pso:
    case Algorithm::mixed_pso:
      return run_swarm(cfg, space, f, rng);
  }
  throw DomainError("unknown algorithm");
}

}  // namespace twincalib::opt
