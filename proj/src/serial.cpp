#include "spad/serial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spad/reference.hpp"
#include "spad/rng.hpp"

namespace spad::serial {

std::vector<double> enumerate_energies(const Model& model) {
  const StateIndex count = state_count(model);
  if (count > kMaxEnumeratedStates) throw std::invalid_argument("state space too large for exhaustive enumeration");
  std::vector<double> energies(count);
  for (StateIndex s = 0; s < count; ++s) energies[s] = energy_at(model, s);
  return energies;
}

Distribution exact_boltzmann(const Model& model, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("temperature must be positive and finite");
  const auto energies = serial::enumerate_energies(model);
  const double min_energy = *std::min_element(energies.begin(), energies.end());
  Distribution dist;
  dist.temperature = T;
  dist.probs.resize(energies.size());
  double z = 0.0;
  for (StateIndex lo = 0; lo < energies.size(); lo += kSumBlock) {
    const StateIndex hi = std::min<StateIndex>(energies.size(), lo + kSumBlock);
    double sum = 0.0;
    for (StateIndex s = lo; s < hi; ++s) {
      dist.probs[s] = std::exp(-(energies[s] - min_energy) / T);
      sum += dist.probs[s];
    }
    z += sum;
  }
  const double inv = 1.0 / z;
  for (auto& p : dist.probs) p *= inv;
  return dist;
}

std::vector<RatePoint> transfer_function(const Trace& trace, std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw std::invalid_argument("transfer_function: thresholds must be sorted ascending");
  std::vector<RatePoint> curve;
  curve.reserve(thresholds.size());
  for (double u : thresholds) {
    const auto crossings = count_crossings(trace, u);
    curve.push_back(RatePoint{u, crossings.rate, crossings.times.size()});
  }
  return curve;
}

std::vector<TransferPoint> ising_transfer_sweep(const Network& network, std::size_t neuron,
                                                std::span<const double> bias_values, const SweepConfig& config) {
  std::vector<TransferPoint> curve;
  curve.reserve(bias_values.size());
  for (std::size_t k = 0; k < bias_values.size(); ++k)
    curve.push_back(TransferPoint{bias_values[k],
                                  transfer_point(network, neuron, bias_values[k], config.samples_per_point,
                                                 config.sample_period, stream_seed(config.seed, k))});
  return curve;
}

std::vector<AnnealResult> anneal_replicas(const Network& network, const SimConfig& config, std::size_t count,
                                          double window) {
  std::vector<AnnealResult> results;
  results.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    SimConfig replica = config;
    replica.seed = stream_seed(config.seed, r);
    auto result = anneal(network, replica, window);
    result.samples = {};
    result.energies = {};
    result.running_mean = {};
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace spad::serial
