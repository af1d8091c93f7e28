#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "twincalib/bayes_opt.hpp"
#include "twincalib/swarm.hpp"

namespace twincalib::opt {

enum class Algorithm { random_search, bayes_opt, standard_pso, mixed_pso };

/// "random", "bo", "pso", "mvpso".
std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct RunConfig {
  Algorithm algorithm = Algorithm::mixed_pso;
  /// Iterations after the initial design. PSO variants evaluate
  /// num_particles points per iteration, random search and BO one.
  std::size_t iterations = 50;
  PsoConfig pso;
  BoConfig bo;
  std::size_t parallel = 1;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double best_value = 0.0;
  MixedVector best_position;
  std::size_t evaluations = 0;
};

/// One record per iteration; record 0 is the initial design.
struct OptimizationTrace {
  std::vector<TraceRecord> records;

  std::vector<double> best_values() const;
};

struct RunResult {
  OptimizationTrace trace;
  MixedVector best;
  double best_value = 0.0;
  std::size_t evaluations = 0;
  std::vector<EvaluationFailure> failures;
};

MixedVector random_search_suggest(const SearchSpace& space, SeededRng& rng);

/// Runs one optimizer for cfg.iterations iterations. Deterministic in
/// (cfg, rng) and independent of cfg.parallel.
RunResult run(const RunConfig& cfg, const SearchSpace& space, const Objective& f, SeededRng rng);

}  // namespace twincalib::opt
