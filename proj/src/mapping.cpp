#include "spad/mapping.hpp"

#include <stdexcept>

namespace spad {

PottsModel ising_to_potts(const IsingModel& model) {
  const std::size_t n = model.size();
  if (n % 2 != 0) throw std::invalid_argument("ising_to_potts: Ising model needs an even neuron count");
  const std::size_t nodes = n / 2;
  PottsModel potts(std::vector<int>(nodes, 4));

  for (std::size_t k = 0; k < nodes; ++k) {
    const std::size_t u = 2 * k;
    const std::size_t v = 2 * k + 1;
    for (int a = 0; a < 4; ++a) {
      const auto [su, sv] = PairEncoding::spins(a);
      potts.set_bias(k, a, model.bias(u) * su + model.bias(v) * sv + model.weight(u, v) * su * sv);
    }
  }

  for (std::size_t k = 0; k < nodes; ++k) {
    for (std::size_t l = k + 1; l < nodes; ++l) {
      for (int a = 0; a < 4; ++a) {
        const auto [s0, s1] = PairEncoding::spins(a);
        const std::array<int, 2> sk{s0, s1};
        for (int b = 0; b < 4; ++b) {
          const auto [t0, t1] = PairEncoding::spins(b);
          const std::array<int, 2> sl{t0, t1};
          double w = 0.0;
          for (std::size_t p = 0; p < 2; ++p)
            for (std::size_t r = 0; r < 2; ++r) w += model.weight(2 * k + p, 2 * l + r) * sk[p] * sl[r];
          potts.set_weight(k, l, a, b, w);
        }
      }
    }
  }
  return potts;
}

PottsState ising_state_to_potts(const IsingState& state) {
  const auto& s = state.spins;
  if (s.size() % 2 != 0) throw std::invalid_argument("ising_state_to_potts: odd state length");
  PottsState out{std::vector<int>(s.size() / 2)};
  for (std::size_t k = 0; k < out.labels.size(); ++k) {
    const int a = s[2 * k];
    const int b = s[2 * k + 1];
    if ((a != -1 && a != 1) || (b != -1 && b != 1))
      throw std::invalid_argument("ising_state_to_potts: spins must be -1 or +1");
    out.labels[k] = PairEncoding::label(a, b);
  }
  return out;
}

IsingState potts_state_to_ising(const PottsState& state) {
  IsingState out{std::vector<int>(state.labels.size() * 2)};
  for (std::size_t k = 0; k < state.labels.size(); ++k) {
    const int label = state.labels[k];
    if (label < 0 || label > 3) throw std::invalid_argument("potts_state_to_ising: labels must be in [0, 4)");
    const auto [a, b] = PairEncoding::spins(label);
    out.spins[2 * k] = a;
    out.spins[2 * k + 1] = b;
  }
  return out;
}

std::vector<StateIndex> ising_to_potts_index_map(std::size_t ising_neurons) {
  if (ising_neurons % 2 != 0) throw std::invalid_argument("ising_to_potts_index_map: odd neuron count");
  if (ising_neurons >= 32) throw std::invalid_argument("ising_to_potts_index_map: state space too large");
  const StateIndex count = StateIndex{1} << ising_neurons;
  std::vector<StateIndex> map(count);
  for (StateIndex s = 0; s < count; ++s) {
    StateIndex potts = 0;
    for (std::size_t k = 0; k < ising_neurons / 2; ++k) {
      const StateIndex first = (s >> (2 * k)) & 1U;
      const StateIndex second = (s >> (2 * k + 1)) & 1U;
      potts |= (2 * first + second) << (2 * k);
    }
    map[s] = potts;
  }
  return map;
}

}  // namespace spad
