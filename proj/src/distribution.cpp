#include "spad/distribution.hpp"

#include <stdexcept>

namespace spad {

void EmpiricalDistribution::merge(const EmpiricalDistribution& other) {
  if (other.mass_.size() != mass_.size()) throw std::invalid_argument("merge: state counts differ");
  for (std::size_t k = 0; k < mass_.size(); ++k) mass_[k] += other.mass_[k];
  total_ += other.total_;
  samples_ += other.samples_;
}

Distribution EmpiricalDistribution::normalized() const {
  double total = 0.0;
  for (double m : mass_) total += m;
  if (!(total > 0.0)) throw std::domain_error("empirical distribution has no mass");
  Distribution d;
  d.probs.resize(mass_.size());
  for (std::size_t k = 0; k < mass_.size(); ++k) d.probs[k] = mass_[k] / total;
  return d;
}

}  // namespace spad
