#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twincalib/rng.hpp"
#include "twincalib/search_space.hpp"

namespace twincalib::opt {

/// Objective to minimize. May throw; a throwing evaluation counts as a
/// failed evaluation and never becomes a best point.
using Objective = std::function<double(const MixedVector&)>;

struct PsoConfig {
  std::size_t num_particles = 5;
  double w = 1.1;
  double c1 = 1.1;
  double c2 = 0.8;
  double v_max_fraction = 0.2;
  double mutation_rate = 0.1;  // discrete reproduction in the mixed-variable variant

  void validate() const;
};

struct Particle {
  MixedVector position;
  Eigen::VectorXd velocity;
  MixedVector personal_best;
  double personal_best_value = std::numeric_limits<double>::infinity();
};

struct Swarm {
  std::vector<Particle> particles;
  MixedVector global_best;
  double global_best_value = std::numeric_limits<double>::infinity();
};

struct EvaluationFailure {
  std::size_t iteration = 0;
  std::size_t slot = 0;  // particle index, or 0 for single-point methods
  std::string message;
};

/// Bookkeeping shared by the step functions.
struct StepContext {
  std::size_t iteration = 0;
  std::size_t parallel = 1;
  std::size_t evaluations = 0;
  std::vector<EvaluationFailure> failures;
};

/// Evaluates every point (concurrently when ctx.parallel > 1). Failed or NaN
/// evaluations yield +inf and are appended to ctx.failures in slot order.
std::vector<double> evaluate_batch(const Objective& f, const std::vector<MixedVector>& points, StepContext& ctx);

/// w*v + c1*r1*(pb - x) + c2*r2*(gb - x), elementwise, before any clipping.
template <typename V, typename X, typename P, typename G, typename R1, typename R2>
auto inertia_attraction(double w, double c1, double c2, const Eigen::MatrixBase<V>& v,
                        const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<P>& pb,
                        const Eigen::MatrixBase<G>& gb, const Eigen::MatrixBase<R1>& r1,
                        const Eigen::MatrixBase<R2>& r2) {
  return (w * v.array() + c1 * r1.array() * (pb - x).array() + c2 * r2.array() * (gb - x).array()).matrix();
}

/// Clips each |v_d| to v_max_fraction * range_d.
Eigen::VectorXd clip_velocity(const Eigen::VectorXd& v, const Eigen::VectorXd& range, double v_max_fraction);

/// Velocity update on the leading `dims` coordinates (all coordinates when
/// dims is npos). Trailing coordinates keep their old velocity. r1 and r2 are
/// drawn per dimension from rng.
Eigen::VectorXd velocity_update(const PsoConfig& cfg, const SearchSpace& space, const Particle& p,
                                const MixedVector& gb, SeededRng& rng,
                                std::size_t dims = static_cast<std::size_t>(-1));

/// clamp(x + v_new).
MixedVector position_update(const SearchSpace& space, const Particle& p, const Eigen::VectorXd& v_new);

/// Discrete segment of the offspring (length L). Per discrete dimension: with
/// probability mutation_rate a uniform feasible value, otherwise one of
/// {x_d, pb_d, gb_d} chosen with probabilities proportional to
/// {w, c1*r1_d, c2*r2_d}.
Eigen::VectorXd discrete_reproduce(const PsoConfig& cfg, const SearchSpace& space, const Particle& p,
                                   const MixedVector& gb, SeededRng& rng);

/// Picks one of three sources with probability proportional to `weights`
/// (all-zero weights keep source 0), or a uniform integer in [lo, hi] with
/// probability mutation_rate.
double reproduce_discrete_value(double x, double pb, double gb, const Eigen::Vector3d& weights,
                                double mutation_rate, double lo, double hi, SeededRng& rng);

/// Random positions and velocities (|v_d| <= v_max_d), evaluated once.
/// Velocities of discrete dimensions start at zero when `mixed` is set.
Swarm init_swarm(const PsoConfig& cfg, const SearchSpace& space, const Objective& f, SeededRng rng,
                 bool mixed, StepContext& ctx);

/// Mixed-variable step: continuous segment by velocity/position update,
/// discrete segment by discrete_reproduce, recombined in encoding order.
void mvpso_step(const PsoConfig& cfg, const SearchSpace& space, Swarm& swarm, const Objective& f,
                SeededRng rng, StepContext& ctx);

/// Standard step: every dimension treated as continuous, discrete entries
/// rounded when clamped.
void standard_pso_step(const PsoConfig& cfg, const SearchSpace& space, Swarm& swarm, const Objective& f,
                       SeededRng rng, StepContext& ctx);

}  // namespace twincalib::opt
