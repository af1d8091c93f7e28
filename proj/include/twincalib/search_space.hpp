#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twincalib/errors.hpp"
#include "twincalib/rng.hpp"

namespace twincalib {

template <typename Scalar>
using MixedVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Candidate parameter point: Z continuous entries followed by L discrete ones.
using MixedVector = MixedVectorT<double>;

enum class DimensionKind { continuous, discrete };

struct DimensionSpec {
  std::string name;
  DimensionKind kind = DimensionKind::continuous;
  double lower = 0.0;
  double upper = 0.0;
  std::string unit;
};

/// Round half away from zero; std::round already does this and is
/// independent of the floating-point rounding mode.
inline double round_half_away(double x) { return std::round(x); }

/// Mixed continuous/discrete box. Continuous dimensions are stored first, in
/// declaration order, followed by the discrete ones (also in declaration
/// order); a declaration that interleaves kinds is stably partitioned.
class SearchSpace {
 public:
  explicit SearchSpace(std::vector<DimensionSpec> dims);

  std::size_t size() const { return dims_.size(); }
  std::size_t continuous_count() const { return z_; }
  std::size_t discrete_count() const { return dims_.size() - z_; }
  const std::vector<DimensionSpec>& dims() const { return dims_; }
  const DimensionSpec& dim(std::size_t i) const { return dims_.at(i); }
  bool is_discrete(std::size_t i) const { return i >= z_; }

  /// Index of the dimension called `name`; throws std::out_of_range.
  std::size_t index_of(const std::string& name) const;

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  /// upper - lower per dimension.
  Eigen::VectorXd range() const { return upper_ - lower_; }

  MixedVector sample_uniform(SeededRng& rng) const;

  template <typename Derived>
  MixedVector clamp(const Eigen::MatrixBase<Derived>& v) const {
    check_length(v.size());
    MixedVector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      double x = static_cast<double>(v(i));
      if (is_discrete(static_cast<std::size_t>(i))) x = round_half_away(x);
      out(i) = std::clamp(x, lower_(i), upper_(i));
    }
    return out;
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& v) const {
    if (v.size() != static_cast<Eigen::Index>(size())) return false;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double x = static_cast<double>(v(i));
      if (!(x >= lower_(i) && x <= upper_(i))) return false;
      if (is_discrete(static_cast<std::size_t>(i)) && x != std::floor(x)) return false;
    }
    return true;
  }

  /// Affine map to the unit cube. Zero-width dimensions map to 0.5.
  Eigen::VectorXd normalize(const MixedVector& v) const;
  /// Inverse of normalize followed by clamp (re-rounds discrete entries).
  MixedVector denormalize(const Eigen::VectorXd& u) const;

  void check_length(Eigen::Index n) const;

 private:
  std::vector<DimensionSpec> dims_;
  std::size_t z_ = 0;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// Free-function spellings of the SearchSpace operations.
inline MixedVector sample_uniform(const SearchSpace& space, SeededRng& rng) {
  return space.sample_uniform(rng);
}
template <typename Derived>
MixedVector clamp(const SearchSpace& space, const Eigen::MatrixBase<Derived>& v) {
  return space.clamp(v);
}
inline Eigen::VectorXd normalize(const SearchSpace& space, const MixedVector& v) {
  return space.normalize(v);
}
inline MixedVector denormalize(const SearchSpace& space, const Eigen::VectorXd& u) {
  return space.denormalize(u);
}

}  // namespace twincalib
