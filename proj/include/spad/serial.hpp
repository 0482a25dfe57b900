#pragma once

#include <span>
#include <vector>

#include "spad/ctmc.hpp"
#include "spad/distribution.hpp"
#include "spad/model.hpp"
#include "spad/pulsesim.hpp"

/// Single-threaded counterparts of the OpenMP kernels. Each produces the
/// same result as its parallel version and exists for testing and benchmarks.
namespace spad::serial {

std::vector<double> enumerate_energies(const Model& model);
Distribution exact_boltzmann(const Model& model, double T);

std::vector<RatePoint> transfer_function(const Trace& trace, std::span<const double> thresholds);

std::vector<TransferPoint> ising_transfer_sweep(const Network& network, std::size_t neuron,
                                                std::span<const double> bias_values, const SweepConfig& config);

std::vector<AnnealResult> anneal_replicas(const Network& network, const SimConfig& config, std::size_t count,
                                          double window = 0.1);

}  // namespace spad::serial
