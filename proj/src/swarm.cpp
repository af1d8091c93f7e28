#include "twincalib/swarm.hpp"

#include <cmath>

#include "twincalib/errors.hpp"
#include "twincalib/parallel.hpp"

namespace twincalib::opt {

void PsoConfig::validate() const {
  if (num_particles < 1) throw DomainError("pso: num_particles must be >= 1");
  if (!(w >= 0.0 && c1 >= 0.0 && c2 >= 0.0)) throw DomainError("pso: w, c1, c2 must be >= 0");
  if (!(v_max_fraction > 0.0 && v_max_fraction <= 1.0)) throw DomainError("pso: v_max_fraction must be in (0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw DomainError("pso: mutation_rate must be in [0, 1]");
}

std::vector<double> evaluate_batch(const Objective& f, const std::vector<MixedVector>& points, StepContext& ctx) {
  std::vector<double> values(points.size(), std::numeric_limits<double>::infinity());
  std::vector<std::string> errors(points.size());
  parallel_for(points.size(), ctx.parallel, [&](std::size_t i) {
    try {
      const double v = f(points[i]);
      if (std::isnan(v))
        errors[i] = "objective returned NaN";
      else
        values[i] = v;
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "objective failed";
    } catch (...) {
      errors[i] = "objective failed";
    }
  });
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!errors[i].empty()) ctx.failures.push_back({ctx.iteration, i, errors[i]});
  ctx.evaluations += points.size();
  return values;
}

Eigen::VectorXd clip_velocity(const Eigen::VectorXd& v, const Eigen::VectorXd& range, double v_max_fraction) {
  const Eigen::VectorXd vmax = v_max_fraction * range;
  return v.cwiseMax(-vmax).cwiseMin(vmax);
}

Eigen::VectorXd velocity_update(const PsoConfig& cfg, const SearchSpace& space, const Particle& p,
                                const MixedVector& gb, SeededRng& rng, std::size_t dims) {
  const auto n = static_cast<Eigen::Index>(space.size());
  const auto k = static_cast<Eigen::Index>(std::min(dims, space.size()));
  Eigen::VectorXd r1(k), r2(k);
  for (Eigen::Index d = 0; d < k; ++d) {
    r1(d) = rng.uniform();
    r2(d) = rng.uniform();
  }
  Eigen::VectorXd out = p.velocity;
  if (out.size() != n) out = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd raw = inertia_attraction(cfg.w, cfg.c1, cfg.c2, p.velocity.head(k), p.position.head(k),
                                                 p.personal_best.head(k), gb.head(k), r1, r2);
  out.head(k) = clip_velocity(raw, space.range().head(k), cfg.v_max_fraction);
  return out;
}

MixedVector position_update(const SearchSpace& space, const Particle& p, const Eigen::VectorXd& v_new) {
  return space.clamp(p.position + v_new);
}

double reproduce_discrete_value(double x, double pb, double gb, const Eigen::Vector3d& weights,
                                double mutation_rate, double lo, double hi, SeededRng& rng) {
  if (rng.uniform() < mutation_rate)
    return static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
  const double total = weights.sum();
  if (!(total > 0.0)) return x;
  const double pick = rng.uniform() * total;
  if (pick < weights(0)) return x;
  if (pick < weights(0) + weights(1)) return pb;
  return gb;
}

Eigen::VectorXd discrete_reproduce(const PsoConfig& cfg, const SearchSpace& space, const Particle& p,
                                   const MixedVector& gb, SeededRng& rng) {
  const auto z = static_cast<Eigen::Index>(space.continuous_count());
  const auto l = static_cast<Eigen::Index>(space.discrete_count());
  Eigen::VectorXd out(l);
  for (Eigen::Index j = 0; j < l; ++j) {
    const Eigen::Index d = z + j;
    const double r1 = rng.uniform();
    const double r2 = rng.uniform();
    const Eigen::Vector3d weights(cfg.w, cfg.c1 * r1, cfg.c2 * r2);
    out(j) = reproduce_discrete_value(p.position(d), p.personal_best(d), gb(d), weights, cfg.mutation_rate,
                                      space.lower()(d), space.upper()(d), rng);
  }
  return out;
}

namespace {

void absorb_values(Swarm& swarm, const std::vector<double>& values) {
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    auto& p = swarm.particles[i];
    if (values[i] < p.personal_best_value) {
      p.personal_best_value = values[i];
      p.personal_best = p.position;
    }
  }
  for (const auto& p : swarm.particles) {
    if (p.personal_best_value < swarm.global_best_value) {
      swarm.global_best_value = p.personal_best_value;
      swarm.global_best = p.personal_best;
    }
  }
}

std::vector<MixedVector> positions_of(const Swarm& swarm) {
  std::vector<MixedVector> xs;
  xs.reserve(swarm.particles.size());
  for (const auto& p : swarm.particles) xs.push_back(p.position);
  return xs;
}

}  // namespace

Swarm init_swarm(const PsoConfig& cfg, const SearchSpace& space, const Objective& f, SeededRng rng, bool mixed,
                 StepContext& ctx) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(space.size());
  const auto vdims = static_cast<Eigen::Index>(mixed ? space.continuous_count() : space.size());
  const Eigen::VectorXd vmax = cfg.v_max_fraction * space.range();
  Swarm swarm;
  swarm.particles.resize(cfg.num_particles);
  for (std::size_t i = 0; i < cfg.num_particles; ++i) {
    SeededRng prng = rng.derive(i);
    SeededRng pos_rng = prng.derive(0);
    SeededRng vel_rng = prng.derive(1);
    auto& p = swarm.particles[i];
    p.position = space.sample_uniform(pos_rng);
    p.velocity = Eigen::VectorXd::Zero(n);
    for (Eigen::Index d = 0; d < vdims; ++d) p.velocity(d) = vel_rng.uniform(-vmax(d), vmax(d));
    p.personal_best = p.position;
  }
  swarm.global_best = swarm.particles.front().position;
  absorb_values(swarm, evaluate_batch(f, positions_of(swarm), ctx));
  return swarm;
}

void mvpso_step(const PsoConfig& cfg, const SearchSpace& space, Swarm& swarm, const Objective& f, SeededRng rng,
                StepContext& ctx) {
  const MixedVector gb = swarm.global_best;
  const std::size_t z = space.continuous_count();
  const auto l = static_cast<Eigen::Index>(space.discrete_count());
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    auto& p = swarm.particles[i];
    SeededRng prng = rng.derive(i);
    SeededRng vel_rng = prng.derive(0);
    SeededRng disc_rng = prng.derive(1);
    const Eigen::VectorXd v_new = velocity_update(cfg, space, p, gb, vel_rng, z);
    MixedVector offspring = p.position + v_new;
    if (l > 0) offspring.tail(l) = discrete_reproduce(cfg, space, p, gb, disc_rng);
    p.velocity = v_new;
    p.position = space.clamp(offspring);
  }
  absorb_values(swarm, evaluate_batch(f, positions_of(swarm), ctx));
}

void standard_pso_step(const PsoConfig& cfg, const SearchSpace& space, Swarm& swarm, const Objective& f,
                       SeededRng rng, StepContext& ctx) {
  const MixedVector gb = swarm.global_best;
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    auto& p = swarm.particles[i];
    SeededRng vel_rng = rng.derive(i).derive(0);
    const Eigen::VectorXd v_new = velocity_update(cfg, space, p, gb, vel_rng);
    p.position = position_update(space, p, v_new);
    p.velocity = v_new;
  }
  absorb_values(swarm, evaluate_batch(f, positions_of(swarm), ctx));
}

}  // namespace twincalib::opt
