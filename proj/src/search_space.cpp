#include "twincalib/search_space.hpp"

#include <stdexcept>

namespace twincalib {

SearchSpace::SearchSpace(std::vector<DimensionSpec> dims) {
  if (dims.empty()) throw DimensionError("search space needs at least one dimension");
  for (std::size_t i = 0; i < dims.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (dims[i].name == dims[j].name) throw DomainError("duplicate dimension name '" + dims[i].name + "'");
  for (const auto& d : dims) {
    if (!std::isfinite(d.lower) || !std::isfinite(d.upper))
      throw DomainError("dimension '" + d.name + "': bounds must be finite");
    if (d.kind == DimensionKind::continuous) {
      if (d.lower > d.upper)
        throw DomainError("dimension '" + d.name + "': lower bound exceeds upper bound");
    } else {
      if (d.lower != std::floor(d.lower) || d.upper != std::floor(d.upper))
        throw DomainError("dimension '" + d.name + "': discrete bounds must be integers");
      if (d.lower > d.upper)
        throw DomainError("dimension '" + d.name + "': empty integer range");
    }
  }
  std::stable_partition(dims.begin(), dims.end(),
                        [](const DimensionSpec& d) { return d.kind == DimensionKind::continuous; });
  z_ = static_cast<std::size_t>(std::count_if(dims.begin(), dims.end(), [](const DimensionSpec& d) {
    return d.kind == DimensionKind::continuous;
  }));
  dims_ = std::move(dims);
  lower_.resize(static_cast<Eigen::Index>(dims_.size()));
  upper_.resize(static_cast<Eigen::Index>(dims_.size()));
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    lower_(static_cast<Eigen::Index>(i)) = dims_[i].lower;
    upper_(static_cast<Eigen::Index>(i)) = dims_[i].upper;
  }
}

std::size_t SearchSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i)
    if (dims_[i].name == name) return i;
  throw std::out_of_range("no dimension named '" + name + "'");
}

void SearchSpace::check_length(Eigen::Index n) const {
  if (n != static_cast<Eigen::Index>(dims_.size()))
    throw DimensionError("vector of length " + std::to_string(n) + " does not match search space of size " +
                         std::to_string(dims_.size()));
}

MixedVector SearchSpace::sample_uniform(SeededRng& rng) const {
  MixedVector v(static_cast<Eigen::Index>(dims_.size()));
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    v(static_cast<Eigen::Index>(i)) =
        is_discrete(i) ? static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(d.lower),
                                                             static_cast<std::int64_t>(d.upper)))
                       : rng.uniform(d.lower, d.upper);
  }
  return v;
}

Eigen::VectorXd SearchSpace::normalize(const MixedVector& v) const {
  check_length(v.size());
  Eigen::VectorXd u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double width = upper_(i) - lower_(i);
    u(i) = width > 0.0 ? (v(i) - lower_(i)) / width : 0.5;
  }
  return u;
}

MixedVector SearchSpace::denormalize(const Eigen::VectorXd& u) const {
  check_length(u.size());
  const Eigen::VectorXd raw = lower_ + u.cwiseProduct(upper_ - lower_);
  return clamp(raw);
}

}  // namespace twincalib
