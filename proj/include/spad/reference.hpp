#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spad/distribution.hpp"
#include "spad/model.hpp"

namespace spad {

/// Largest joint state space `exact_boltzmann` will enumerate.
inline constexpr StateIndex kMaxEnumeratedStates = StateIndex{1} << 24;

/// States per partial sum of the partition function. Fixed blocks keep the
/// summation order, and so the result, independent of the thread count.
inline constexpr StateIndex kSumBlock = 4096;

/// Energy of every joint state by canonical index (OpenMP over states).
std::vector<double> enumerate_energies(const Model& model);

/// Boltzmann law by exhaustive enumeration, normalized with a max-shift in
/// the log domain. Throws std::invalid_argument for T <= 0 or a state space
/// above kMaxEnumeratedStates.
Distribution exact_boltzmann(const Model& model, double T);
Distribution exact_boltzmann(const IsingModel& model, double T);
Distribution exact_boltzmann(const PottsModel& model, double T);

/// Boltzmann law from precomputed energies (same normalization as above).
Distribution boltzmann_from_energies(std::span<const double> energies, double T);

struct GroundState {
  StateIndex index = 0;
  double energy = 0.0;
};
/// Exhaustive minimum; ties resolve to the lowest index.
GroundState ground_state(const Model& model);

/// P(n_i = +1) = (1 + tanh(-dE / 2T)) / 2 with dE = E(+1) - E(-1).
double tanh_update_probability(double delta_energy, double T);

/// Conditional Gibbs law over candidate values: exp(-E_Q/T) / sum exp(-E_Q'/T).
std::vector<double> conditional_probabilities(std::span<const double> energies, double T);

/// Sequential-scan Gibbs sampler. One sample (canonical index) per sweep.
/// Starts from all -1 / label 0; Ising nodes use the tanh form.
std::vector<StateIndex> gibbs_run(const Model& model, double T, std::uint64_t sweeps, std::uint64_t seed);

}  // namespace spad
