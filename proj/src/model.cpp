#include "spad/model.hpp"

#include <stdexcept>
#include <string>

#include "spad/rng.hpp"

namespace spad {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

IsingModel::IsingModel(std::size_t n) : n_(n), weights_(n * n, 0.0), biases_(n, 0.0) {
  require(n >= 1, "IsingModel: n must be at least 1");
}

IsingModel::IsingModel(std::vector<double> weights, std::vector<double> biases)
    : n_(biases.size()), weights_(std::move(weights)), biases_(std::move(biases)) {
  require(n_ >= 1, "IsingModel: n must be at least 1");
  require(weights_.size() == n_ * n_, "IsingModel: weights must be n x n");
  for (std::size_t i = 0; i < n_; ++i) {
    require(weights_[i * n_ + i] == 0.0, "IsingModel: self-coupling must be zero");
    for (std::size_t j = i + 1; j < n_; ++j)
      require(weights_[i * n_ + j] == weights_[j * n_ + i], "IsingModel: weights must be symmetric");
  }
}

void IsingModel::set_weight(std::size_t i, std::size_t j, double w) {
  require(i < n_ && j < n_, "IsingModel::set_weight: index out of range");
  require(i != j, "IsingModel::set_weight: self-coupling is not allowed");
  weights_[i * n_ + j] = w;
  weights_[j * n_ + i] = w;
}

void IsingModel::set_bias(std::size_t i, double h) {
  require(i < n_, "IsingModel::set_bias: index out of range");
  biases_[i] = h;
}

PottsModel::PottsModel(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  require(!sizes_.empty(), "PottsModel: at least one node required");
  offsets_.reserve(sizes_.size());
  for (int q : sizes_) {
    require(q >= 2, "PottsModel: every node needs q >= 2");
    offsets_.push_back(labels_);
    labels_ += static_cast<std::size_t>(q);
  }
  weights_.assign(labels_ * labels_, 0.0);
  biases_.assign(labels_, 0.0);
}

void PottsModel::check_label(std::size_t i, int a) const {
  require(i < sizes_.size(), "PottsModel: node index out of range");
  require(a >= 0 && a < sizes_[i], "PottsModel: label out of range");
}

void PottsModel::set_weight(std::size_t i, std::size_t j, int a, int b, double w) {
  check_label(i, a);
  check_label(j, b);
  require(i != j, "PottsModel::set_weight: self-weights are not allowed");
  weights_[(offsets_[i] + a) * labels_ + offsets_[j] + b] = w;
  weights_[(offsets_[j] + b) * labels_ + offsets_[i] + a] = w;
}

void PottsModel::set_bias(std::size_t i, int a, double h) {
  check_label(i, a);
  biases_[offsets_[i] + a] = h;
}

namespace {

void check_state(const IsingModel& model, std::span<const int> spins) {
  require(spins.size() == model.size(), "Ising state length does not match model");
  for (int s : spins) require(s == -1 || s == 1, "Ising spins must be -1 or +1");
}

void check_state(const PottsModel& model, std::span<const int> labels) {
  require(labels.size() == model.size(), "Potts state length does not match model");
  for (std::size_t i = 0; i < labels.size(); ++i)
    require(labels[i] >= 0 && labels[i] < model.states(i), "Potts label out of range");
}

}  // namespace

double ising_energy(const IsingModel& model, const IsingState& state) {
  check_state(model, state.spins);
  const std::size_t n = model.size();
  double pair = 0.0;
  double field = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = model.weight_row(i);
    for (std::size_t j = 0; j < n; ++j) pair += row[j] * state.spins[i] * state.spins[j];
    field += model.bias(i) * state.spins[i];
  }
  return -(0.5 * pair + field);
}

double potts_energy(const PottsModel& model, const PottsState& state) {
  check_state(model, state.labels);
  const std::size_t n = model.size();
  double pair = 0.0;
  double field = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = model.weight_row(i, state.labels[i]);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) pair += row[model.offset(j) + state.labels[j]];
    field += model.bias(i, state.labels[i]);
  }
  return -(0.5 * pair + field);
}

double local_field(const IsingModel& model, std::span<const int> spins, std::size_t i) {
  const auto row = model.weight_row(i);
  double field = model.bias(i);
  for (std::size_t j = 0; j < spins.size(); ++j) field += row[j] * spins[j];
  return field;
}

void potts_conditional_into(const PottsModel& model, std::span<const int> labels, std::size_t i,
                            std::span<double> out) {
  const int q = model.states(i);
  for (int a = 0; a < q; ++a) {
    const auto row = model.weight_row(i, a);
    double sum = model.bias(i, a);
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (j != i) sum += row[model.offset(j) + labels[j]];
    out[a] = -sum;
  }
}

std::vector<double> conditional_energies(const IsingModel& model, const IsingState& state, std::size_t i) {
  check_state(model, state.spins);
  require(i < model.size(), "conditional_energies: node index out of range");
  const double field = local_field(model, state.spins, i);
  return {field, -field};
}

std::vector<double> conditional_energies(const PottsModel& model, const PottsState& state, std::size_t i) {
  check_state(model, state.labels);
  require(i < model.size(), "conditional_energies: node index out of range");
  std::vector<double> out(static_cast<std::size_t>(model.states(i)));
  potts_conditional_into(model, state.labels, i, out);
  return out;
}

IsingModel random_model(std::size_t n, int lo, int hi, std::uint64_t seed) {
  require(n >= 1, "random_model: n must be at least 1");
  require(lo <= hi, "random_model: invalid weight range");
  Rng rng(seed);
  IsingModel model(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      model.set_weight(i, j, static_cast<double>(rng.uniform_int(lo, hi)));
  for (std::size_t i = 0; i < n; ++i) model.set_bias(i, static_cast<double>(rng.uniform_int(lo, hi)));
  return model;
}

StateIndex state_count(const IsingModel& model) {
  require(model.size() < 63, "state space too large to index");
  return StateIndex{1} << model.size();
}

StateIndex state_count(const PottsModel& model) {
  StateIndex count = 1;
  for (int q : model.sizes()) {
    require(count <= (StateIndex{1} << 62) / static_cast<StateIndex>(q), "state space too large to index");
    count *= static_cast<StateIndex>(q);
  }
  return count;
}

StateIndex state_count(const Model& model) {
  return std::visit([](const auto& m) { return state_count(m); }, model);
}

StateIndex state_index(const IsingState& state) {
  require(state.spins.size() < 63, "state too long to index");
  StateIndex index = 0;
  for (std::size_t i = 0; i < state.spins.size(); ++i) {
    require(state.spins[i] == -1 || state.spins[i] == 1, "Ising spins must be -1 or +1");
    if (state.spins[i] > 0) index |= StateIndex{1} << i;
  }
  return index;
}

StateIndex state_index(const PottsModel& model, const PottsState& state) {
  check_state(model, state.labels);
  StateIndex index = 0;
  for (std::size_t k = state.labels.size(); k-- > 0;)
    index = index * static_cast<StateIndex>(model.states(k)) + static_cast<StateIndex>(state.labels[k]);
  return index;
}

IsingState ising_state_at(std::size_t n, StateIndex index) {
  require(n < 63 && index < (StateIndex{1} << n), "Ising state index out of range");
  IsingState state{std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) state.spins[i] = ((index >> i) & 1U) ? 1 : -1;
  return state;
}

PottsState potts_state_at(const PottsModel& model, StateIndex index) {
  require(index < state_count(model), "Potts state index out of range");
  PottsState state{std::vector<int>(model.size())};
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto q = static_cast<StateIndex>(model.states(i));
    state.labels[i] = static_cast<int>(index % q);
    index /= q;
  }
  return state;
}

double energy_at(const IsingModel& model, StateIndex index) {
  return ising_energy(model, ising_state_at(model.size(), index));
}

double energy_at(const PottsModel& model, StateIndex index) {
  return potts_energy(model, potts_state_at(model, index));
}

double energy_at(const Model& model, StateIndex index) {
  return std::visit([index](const auto& m) { return energy_at(m, index); }, model);
}

bool coupled(const IsingModel& model, std::size_t i, std::size_t j) {
  return i != j && model.weight(i, j) != 0.0;
}

bool coupled(const PottsModel& model, std::size_t i, std::size_t j) {
  if (i == j) return false;
  for (int a = 0; a < model.states(i); ++a)
    for (int b = 0; b < model.states(j); ++b)
      if (model.weight(i, j, a, b) != 0.0) return true;
  return false;
}

}  // namespace spad
