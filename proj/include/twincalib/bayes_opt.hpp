#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "twincalib/rng.hpp"
#include "twincalib/search_space.hpp"

namespace twincalib::opt {

struct BoConfig {
  std::size_t init_design = 5;
  std::size_t candidates = 1024;
  double length_scale = 0.2;
  double jitter = 1e-6;
  double max_jitter = 1e-2;

  void validate() const;
};

struct Observation {
  MixedVector x;
  double value = 0.0;
};

/// Squared-exponential kernel exp(-|a - b|^2 / (2 l^2)).
template <typename A, typename B>
double se_kernel(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, double length_scale) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * length_scale * length_scale));
}

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean GP regression with a fixed-length-scale SE kernel. Inputs are
/// rows of `inputs`; `jitter` is added to the kernel diagonal.
class GaussianProcess {
 public:
  /// Tries jitter, 10*jitter, ... up to max_jitter; nullopt when the kernel
  /// matrix is never positive definite.
  static std::optional<GaussianProcess> fit(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                                            double length_scale, double jitter, double max_jitter);

  /// Posterior at u. The variance has the jitter level subtracted (floored at
  /// zero): observations are noiseless and the jitter only conditions K.
  Prediction predict(const Eigen::VectorXd& u) const;

  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd weights_;  // K^-1 y
  double length_scale_ = 0.2;
  double jitter_ = 0.0;
};

/// Expected improvement below `best` for a Gaussian prediction. Zero
/// standard deviation gives max(best - mean, 0).
double expected_improvement(double mean, double stddev, double best);

struct BoProposal {
  MixedVector point;
  std::vector<MixedVector> candidates;  // empty when no model was used
  Eigen::VectorXd scores;               // EI per candidate, standardized units
  bool model_used = false;
  double jitter = 0.0;
};

/// Full proposal with the scored candidate set, for inspection and tests.
BoProposal bo_propose(const std::vector<Observation>& history, const SearchSpace& space, const BoConfig& cfg,
                      SeededRng& rng);

/// Next point to evaluate: a uniform sample while fewer than init_design
/// finite observations exist, else the EI argmax over random candidates.
MixedVector bo_suggest(const std::vector<Observation>& history, const SearchSpace& space, const BoConfig& cfg,
                       SeededRng& rng);

}  // namespace twincalib::opt
