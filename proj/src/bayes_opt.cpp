#include "twincalib/bayes_opt.hpp"

#include <cmath>
#include <numbers>

#include "twincalib/errors.hpp"

namespace twincalib::opt {

void BoConfig::validate() const {
  if (candidates < 1) throw DomainError("bo: candidates must be >= 1");
  if (!(length_scale > 0.0)) throw DomainError("bo: length_scale must be > 0");
  if (!(jitter > 0.0) || !(max_jitter >= jitter)) throw DomainError("bo: need 0 < jitter <= max_jitter");
}

std::optional<GaussianProcess> GaussianProcess::fit(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                                                    double length_scale, double jitter, double max_jitter) {
  const Eigen::Index n = inputs.rows();
  if (targets.size() != n) throw DimensionError("GaussianProcess::fit: inputs and targets differ in length");
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      k(i, j) = k(j, i) = se_kernel(inputs.row(i), inputs.row(j), length_scale);

  for (double eps = jitter; eps <= max_jitter * (1.0 + 1e-9); eps *= 10.0) {
    GaussianProcess gp;
    gp.chol_.compute(k + eps * Eigen::MatrixXd::Identity(n, n));
    if (gp.chol_.info() != Eigen::Success) continue;
    gp.weights_ = gp.chol_.solve(targets);
    if (!gp.weights_.allFinite()) continue;
    gp.inputs_ = std::move(inputs);
    gp.length_scale_ = length_scale;
    gp.jitter_ = eps;
    return gp;
  }
  return std::nullopt;
}

Prediction GaussianProcess::predict(const Eigen::VectorXd& u) const {
  const Eigen::Index n = inputs_.rows();
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = se_kernel(inputs_.row(i).transpose(), u, length_scale_);
  Prediction p;
  p.mean = ks.dot(weights_);
  const Eigen::VectorXd v = chol_.matrixL().solve(ks);
  p.variance = std::max(0.0, 1.0 - v.squaredNorm() - jitter_);
  return p;
}

double expected_improvement(double mean, double stddev, double best) {
  const double imp = best - mean;
  if (!(stddev > 0.0)) return std::max(imp, 0.0);
  const double z = imp / stddev;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, imp * cdf + stddev * pdf);
}

BoProposal bo_propose(const std::vector<Observation>& history, const SearchSpace& space, const BoConfig& cfg,
                      SeededRng& rng) {
  std::vector<const Observation*> valid;
  for (const auto& o : history)
    if (std::isfinite(o.value)) valid.push_back(&o);

  BoProposal out;
  if (valid.size() < std::max<std::size_t>(cfg.init_design, 1)) {
    out.point = space.sample_uniform(rng);
    return out;
  }

  const auto n = static_cast<Eigen::Index>(valid.size());
  Eigen::MatrixXd inputs(n, static_cast<Eigen::Index>(space.size()));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inputs.row(i) = space.normalize(valid[static_cast<std::size_t>(i)]->x).transpose();
    y(i) = valid[static_cast<std::size_t>(i)]->value;
  }
  const double mu = y.mean();
  const double sd = std::sqrt((y.array() - mu).square().sum() / static_cast<double>(n));
  const Eigen::VectorXd ys = (y.array() - mu) / (sd > 0.0 ? sd : 1.0);

  auto gp = GaussianProcess::fit(std::move(inputs), ys, cfg.length_scale, cfg.jitter, cfg.max_jitter);
  if (!gp) {
    out.point = space.sample_uniform(rng);
    return out;
  }

  const double best = ys.minCoeff();
  out.model_used = true;
  out.jitter = gp->jitter();
  out.candidates.reserve(cfg.candidates);
  out.scores.resize(static_cast<Eigen::Index>(cfg.candidates));
  std::size_t arg = 0;
  for (std::size_t c = 0; c < cfg.candidates; ++c) {
    out.candidates.push_back(space.sample_uniform(rng));
    const Prediction pr = gp->predict(space.normalize(out.candidates.back()));
    const double ei = expected_improvement(pr.mean, std::sqrt(pr.variance), best);
    out.scores(static_cast<Eigen::Index>(c)) = ei;
    if (ei > out.scores(static_cast<Eigen::Index>(arg))) arg = c;
  }
  out.point = out.candidates[arg];
  return out;
}

MixedVector bo_suggest(const std::vector<Observation>& history, const SearchSpace& space, const BoConfig& cfg,
                       SeededRng& rng) {
  return bo_propose(history, space, cfg, rng).point;
}

}  // namespace twincalib::opt
