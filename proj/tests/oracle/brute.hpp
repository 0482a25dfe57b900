#pragma once

// Deliberately naive reimplementations used as test oracles. Nothing here
// shares code with the library beyond the model accessors.

#include <cmath>
#include <cstdint>
#include <vector>

#include "spad/model.hpp"

namespace oracle {

inline std::vector<int> spins_of(std::size_t n, std::uint64_t index) {
  std::vector<int> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (index >> i) & 1U ? +1 : -1;
  return s;
}

inline std::vector<int> labels_of(const spad::PottsModel& m, std::uint64_t index) {
  std::vector<int> labels(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    labels[i] = static_cast<int>(index % static_cast<std::uint64_t>(m.states(i)));
    index /= static_cast<std::uint64_t>(m.states(i));
  }
  return labels;
}

// E = -(1/2 sum_{i,j} w_ij s_i s_j + sum_i h_i s_i), literal double sum in long double.
inline double ising_energy(const spad::IsingModel& m, const std::vector<int>& s) {
  long double pair = 0.0L;
  long double field = 0.0L;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) pair += 0.5L * m.weight(i, j) * s[i] * s[j];
    field += static_cast<long double>(m.bias(i)) * s[i];
  }
  return static_cast<double>(-(pair + field));
}

inline double potts_energy(const spad::PottsModel& m, const std::vector<int>& labels) {
  long double pair = 0.0L;
  long double field = 0.0L;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j)
      if (i != j) pair += 0.5L * m.weight(i, j, labels[i], labels[j]);
    field += m.bias(i, labels[i]);
  }
  return static_cast<double>(-(pair + field));
}

inline std::vector<double> boltzmann(const std::vector<double>& energies, double T) {
  long double z = 0.0L;
  std::vector<long double> w(energies.size());
  double lo = energies[0];
  for (double e : energies) lo = std::min(lo, e);
  for (std::size_t s = 0; s < energies.size(); ++s) {
    w[s] = std::exp(-static_cast<long double>(energies[s] - lo) / T);
    z += w[s];
  }
  std::vector<double> p(energies.size());
  for (std::size_t s = 0; s < energies.size(); ++s) p[s] = static_cast<double>(w[s] / z);
  return p;
}

inline std::vector<double> ising_energies(const spad::IsingModel& m) {
  std::vector<double> e(std::uint64_t{1} << m.size());
  for (std::uint64_t s = 0; s < e.size(); ++s) e[s] = ising_energy(m, spins_of(m.size(), s));
  return e;
}

// Plain (non-OpenMP) Kullback-Leibler in nats.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] > 0.0) d += p[k] * std::log(p[k] / q[k]);
  return d;
}

}  // namespace oracle
