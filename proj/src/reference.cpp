#include "spad/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spad/parallel.hpp"
#include "spad/rng.hpp"

namespace spad {

namespace {

void check_temperature(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("temperature must be positive and finite");
}

void check_enumerable(const Model& model) {
  if (state_count(model) > kMaxEnumeratedStates)
    throw std::invalid_argument("state space too large for exhaustive enumeration");
}

// Fixed-size blocks keep the reduction order independent of the team size.

// Energies of states [lo, hi) with one scratch state per block.
void block_energies(const Model& model, StateIndex lo, StateIndex hi, std::span<double> out) {
  if (const auto* ising = std::get_if<IsingModel>(&model)) {
    const std::size_t n = ising->size();
    std::vector<int> spins(n);
    for (StateIndex s = lo; s < hi; ++s) {
      for (std::size_t i = 0; i < n; ++i) spins[i] = ((s >> i) & 1U) ? 1 : -1;
      double pair = 0.0;
      double field = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = ising->weight_row(i);
        double acc = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) acc += row[j] * spins[j];
        pair += acc * spins[i];
        field += ising->bias(i) * spins[i];
      }
      out[s] = -(pair + field);
    }
    return;
  }
  const auto& potts = std::get<PottsModel>(model);
  PottsState state{std::vector<int>(potts.size())};
  for (StateIndex s = lo; s < hi; ++s) {
    StateIndex rest = s;
    for (std::size_t i = 0; i < potts.size(); ++i) {
      const auto q = static_cast<StateIndex>(potts.states(i));
      state.labels[i] = static_cast<int>(rest % q);
      rest /= q;
    }
    double pair = 0.0;
    double field = 0.0;
    for (std::size_t i = 0; i < potts.size(); ++i) {
      const auto row = potts.weight_row(i, state.labels[i]);
      for (std::size_t j = i + 1; j < potts.size(); ++j) pair += row[potts.offset(j) + state.labels[j]];
      field += potts.bias(i, state.labels[i]);
    }
    out[s] = -(pair + field);
  }
}

}  // namespace

std::vector<double> enumerate_energies(const Model& model) {
  check_enumerable(model);
  const StateIndex count = state_count(model);
  std::vector<double> energies(count);
  const StateIndex blocks = (count + kSumBlock - 1) / kSumBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const StateIndex lo = b * kSumBlock;
    const StateIndex hi = std::min(count, lo + kSumBlock);
    block_energies(model, lo, hi, energies);
  });
  return energies;
}

Distribution boltzmann_from_energies(std::span<const double> energies, double T) {
  check_temperature(T);
  if (energies.empty()) throw std::invalid_argument("boltzmann: no states");
  const double min_energy = *std::min_element(energies.begin(), energies.end());
  Distribution dist;
  dist.temperature = T;
  dist.probs.resize(energies.size());

  const StateIndex count = energies.size();
  const StateIndex blocks = (count + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t b) {
    const StateIndex lo = b * kSumBlock;
    const StateIndex hi = std::min(count, lo + kSumBlock);
    double sum = 0.0;
    for (StateIndex s = lo; s < hi; ++s) {
      dist.probs[s] = std::exp(-(energies[s] - min_energy) / T);
      sum += dist.probs[s];
    }
    partial[b] = sum;
  });
  double z = 0.0;
  for (double p : partial) z += p;
  const double inv = 1.0 / z;
  for (auto& p : dist.probs) p *= inv;
  return dist;
}

Distribution exact_boltzmann(const Model& model, double T) {
  check_temperature(T);
  return boltzmann_from_energies(enumerate_energies(model), T);
}

Distribution exact_boltzmann(const IsingModel& model, double T) { return exact_boltzmann(Model{model}, T); }
Distribution exact_boltzmann(const PottsModel& model, double T) { return exact_boltzmann(Model{model}, T); }

GroundState ground_state(const Model& model) {
  const auto energies = enumerate_energies(model);
  const auto it = std::min_element(energies.begin(), energies.end());
  return GroundState{static_cast<StateIndex>(it - energies.begin()), *it};
}

double tanh_update_probability(double delta_energy, double T) {
  check_temperature(T);
  return 0.5 * (1.0 + std::tanh(-delta_energy / (2.0 * T)));
}

std::vector<double> conditional_probabilities(std::span<const double> energies, double T) {
  check_temperature(T);
  if (energies.empty()) throw std::invalid_argument("conditional_probabilities: no candidates");
  const double min_energy = *std::min_element(energies.begin(), energies.end());
  std::vector<double> p(energies.size());
  double z = 0.0;
  for (std::size_t k = 0; k < energies.size(); ++k) {
    p[k] = std::exp(-(energies[k] - min_energy) / T);
    z += p[k];
  }
  for (auto& v : p) v /= z;
  return p;
}

std::vector<StateIndex> gibbs_run(const Model& model, double T, std::uint64_t sweeps, std::uint64_t seed) {
  check_temperature(T);
  Rng rng(seed);
  std::vector<StateIndex> samples;
  samples.reserve(sweeps);

  if (const auto* ising = std::get_if<IsingModel>(&model)) {
    const std::size_t n = ising->size();
    if (n >= 63) throw std::invalid_argument("gibbs_run: state space too large to index");
    std::vector<int> spins(n, -1);
    StateIndex index = 0;
    for (std::uint64_t sweep = 0; sweep < sweeps; ++sweep) {
      for (std::size_t i = 0; i < n; ++i) {
        const double field = local_field(*ising, spins, i);
        const double p_plus = tanh_update_probability(-2.0 * field, T);
        spins[i] = rng.uniform() < p_plus ? 1 : -1;
        if (spins[i] > 0)
          index |= StateIndex{1} << i;
        else
          index &= ~(StateIndex{1} << i);
      }
      samples.push_back(index);
    }
    return samples;
  }

  const auto& potts = std::get<PottsModel>(model);
  state_count(potts);  // throws when the index would overflow
  std::vector<int> labels(potts.size(), 0);
  std::vector<double> energies;
  for (std::uint64_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < potts.size(); ++i) {
      energies.resize(static_cast<std::size_t>(potts.states(i)));
      potts_conditional_into(potts, labels, i, energies);
      const auto p = conditional_probabilities(energies, T);
      const double u = rng.uniform();
      double cumulative = 0.0;
      int pick = static_cast<int>(p.size()) - 1;
      for (std::size_t a = 0; a < p.size(); ++a) {
        cumulative += p[a];
        if (u < cumulative) {
          pick = static_cast<int>(a);
          break;
        }
      }
      labels[i] = pick;
    }
    samples.push_back(state_index(potts, PottsState{labels}));
  }
  return samples;
}

}  // namespace spad
