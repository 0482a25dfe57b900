#pragma once

#include <span>
#include <vector>

#include "spad/model.hpp"

namespace spad {

/// Probability vector over canonical state indices.
struct Distribution {
  std::vector<double> probs;
  double temperature = 0.0;  // 0 when not produced at a fixed temperature
};

/// One entry of a sample stream. Dwell-weighted streams carry the dwell time
/// as `weight`; clocked streams carry weight 1. `time` is when the sample
/// starts (dwell) or the tick time (clocked).
struct Sample {
  StateIndex index = 0;
  double weight = 1.0;
  double time = 0.0;
};

/// Counts or dwell-time mass per canonical state.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(StateIndex states) : mass_(states, 0.0) {}

  void add(StateIndex index, double weight = 1.0) {
    mass_.at(index) += weight;
    total_ += weight;
    ++samples_;
  }
  void add(const Sample& s) { add(s.index, s.weight); }
  void add(std::span<const Sample> samples) {
    for (const auto& s : samples) add(s);
  }
  void merge(const EmpiricalDistribution& other);

  std::span<const double> mass() const noexcept { return mass_; }
  double total() const noexcept { return total_; }
  std::size_t samples() const noexcept { return samples_; }
  StateIndex states() const noexcept { return mass_.size(); }

  /// Normalized copy; throws if no mass has been accumulated.
  Distribution normalized() const;

 private:
  std::vector<double> mass_;
  double total_ = 0.0;
  std::size_t samples_ = 0;
};

}  // namespace spad
