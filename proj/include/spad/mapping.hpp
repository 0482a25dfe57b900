#pragma once

#include <array>
#include <utility>
#include <vector>

#include "spad/model.hpp"

namespace spad {

/// Potts label <-> spin pair for the q = 4 grouping of two Ising spins.
/// Label bits count the pair in binary with -1 as 0: the first spin of the
/// pair is the high bit.
struct PairEncoding {
  static constexpr std::array<std::pair<int, int>, 4> pairs{{{-1, -1}, {-1, +1}, {+1, -1}, {+1, +1}}};

  static constexpr std::pair<int, int> spins(int label) { return pairs[static_cast<std::size_t>(label)]; }
  static constexpr int label(int first, int second) { return (first > 0 ? 2 : 0) + (second > 0 ? 1 : 0); }
};

/// Groups spins (2k, 2k+1) into Potts node k with q = 4. The intra-pair
/// weight is folded into the node bias; cross-pair weights become the 4x4
/// block sum_{u in k, v in l} w_uv s_u(a) s_v(b).
PottsModel ising_to_potts(const IsingModel& model);

PottsState ising_state_to_potts(const IsingState& state);
IsingState potts_state_to_ising(const PottsState& state);

/// Canonical Potts index of the mapped image of each Ising index (a permutation).
std::vector<StateIndex> ising_to_potts_index_map(std::size_t ising_neurons);

}  // namespace spad
