#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace spad {

/// Canonical joint-state index. Ising: bit i = (s_i + 1) / 2, little-endian.
/// Potts: mixed-radix little-endian over labels (node 0 is the fastest digit).
using StateIndex = std::uint64_t;

/// Dense Ising model. Energy: -(1/2 sum_ij w_ij s_i s_j + sum_i h_i s_i).
/// Weights are kept symmetric with a zero diagonal by construction.
class IsingModel {
 public:
  explicit IsingModel(std::size_t n);
  /// `weights` is n*n row-major. Throws if not symmetric or the diagonal is nonzero.
  IsingModel(std::vector<double> weights, std::vector<double> biases);

  std::size_t size() const noexcept { return n_; }
  double weight(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
  double bias(std::size_t i) const { return biases_[i]; }
  std::span<const double> weight_row(std::size_t i) const { return {weights_.data() + i * n_, n_}; }
  std::span<const double> biases() const noexcept { return biases_; }

  /// Sets w_ij and w_ji together; i != j.
  void set_weight(std::size_t i, std::size_t j, double w);
  void set_bias(std::size_t i, double h);

  bool operator==(const IsingModel&) const = default;

 private:
  std::size_t n_;
  std::vector<double> weights_;
  std::vector<double> biases_;
};

/// Dense Potts model over nodes with q_i >= 2 labels each.
/// Energy: -(1/2 sum_{i != j} W_ij(n_i, n_j) + sum_i h_i(n_i)), W_ij(a,b) = W_ji(b,a).
/// Storage is one symmetric matrix over the flattened label space, with
/// zero blocks on the diagonal (no self-weights).
class PottsModel {
 public:
  explicit PottsModel(std::vector<int> sizes);

  std::size_t size() const noexcept { return sizes_.size(); }
  int states(std::size_t i) const { return sizes_[i]; }
  std::span<const int> sizes() const noexcept { return sizes_; }
  /// Offset of node i's first label in the flattened label space.
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::size_t label_count() const noexcept { return labels_; }

  double weight(std::size_t i, std::size_t j, int a, int b) const {
    return weights_[(offsets_[i] + a) * labels_ + offsets_[j] + b];
  }
  double bias(std::size_t i, int a) const { return biases_[offsets_[i] + a]; }
  /// Row of the flattened weight matrix for label `a` of node `i`.
  std::span<const double> weight_row(std::size_t i, int a) const {
    return {weights_.data() + (offsets_[i] + a) * labels_, labels_};
  }

  /// Sets W_ij(a,b) and the mirrored W_ji(b,a); i != j.
  void set_weight(std::size_t i, std::size_t j, int a, int b, double w);
  void set_bias(std::size_t i, int a, double h);

  bool operator==(const PottsModel&) const = default;

 private:
  void check_label(std::size_t i, int a) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t labels_ = 0;
  std::vector<double> weights_;
  std::vector<double> biases_;
};

using Model = std::variant<IsingModel, PottsModel>;

struct IsingState {
  std::vector<int> spins;  // each -1 or +1
  bool operator==(const IsingState&) const = default;
};

struct PottsState {
  std::vector<int> labels;  // label i in [0, q_i)
  bool operator==(const PottsState&) const = default;
};

double ising_energy(const IsingModel& model, const IsingState& state);
double potts_energy(const PottsModel& model, const PottsState& state);

/// Energies of every candidate value of node `i` with the rest of the state
/// held fixed. Only terms that depend on node i are included; the dropped
/// remainder is the same for every candidate, so differences are exact.
/// Ising: {E(-1), E(+1)}. Potts: one entry per label.
std::vector<double> conditional_energies(const IsingModel& model, const IsingState& state, std::size_t i);
std::vector<double> conditional_energies(const PottsModel& model, const PottsState& state, std::size_t i);

/// sum_j w_ij s_j + h_i. Conditional energies are {+field, -field}.
double local_field(const IsingModel& model, std::span<const int> spins, std::size_t i);

/// Writes node i's conditional energies for every label into `out` (size q_i).
void potts_conditional_into(const PottsModel& model, std::span<const int> labels, std::size_t i,
                            std::span<double> out);

/// Weights (upper triangle, mirrored) then biases, each drawn uniformly from
/// the integers in [lo, hi].
IsingModel random_model(std::size_t n, int lo, int hi, std::uint64_t seed);

StateIndex state_count(const IsingModel& model);
StateIndex state_count(const PottsModel& model);

StateIndex state_index(const IsingState& state);
StateIndex state_index(const PottsModel& model, const PottsState& state);
IsingState ising_state_at(std::size_t n, StateIndex index);
PottsState potts_state_at(const PottsModel& model, StateIndex index);

/// Joint-state energy by canonical index.
double energy_at(const IsingModel& model, StateIndex index);
double energy_at(const PottsModel& model, StateIndex index);
double energy_at(const Model& model, StateIndex index);
StateIndex state_count(const Model& model);

/// Whether nodes i and j share any nonzero weight.
bool coupled(const IsingModel& model, std::size_t i, std::size_t j);
bool coupled(const PottsModel& model, std::size_t i, std::size_t j);

}  // namespace spad
