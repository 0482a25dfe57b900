// Serial vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "spad/ctmc.hpp"
#include "spad/pulsesim.hpp"
#include "spad/reference.hpp"
#include "spad/serial.hpp"

namespace {

using namespace spad;

const Model& ising16() {
  static const Model m = random_model(16, -8, 8, 1);
  return m;
}

void BM_EnumerateSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(serial::enumerate_energies(ising16()));
}
void BM_EnumerateParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_energies(ising16()));
}

void BM_BoltzmannSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(serial::exact_boltzmann(ising16(), 20.0));
}
void BM_BoltzmannParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(exact_boltzmann(ising16(), 20.0));
}

const Trace& pulse_trace() {
  static const Trace t = [] {
    PulseConfig c;
    c.duration = 2e-2;
    return generate_trace(c, 3);
  }();
  return t;
}

std::vector<double> thresholds() {
  std::vector<double> th;
  for (int k = 0; k < 64; ++k) th.push_back(0.0625 * k);
  return th;
}

void BM_TransferSerial(benchmark::State& state) {
  const auto th = thresholds();
  for (auto _ : state) benchmark::DoNotOptimize(serial::transfer_function(pulse_trace(), th));
}
void BM_TransferParallel(benchmark::State& state) {
  const auto th = thresholds();
  for (auto _ : state) benchmark::DoNotOptimize(transfer_function(pulse_trace(), th));
}

Network sweep_network() { return Network::ising(IsingModel(1), RateFunction::exponential(1e6, 10.0)); }

std::vector<double> sweep_biases() {
  std::vector<double> b;
  for (int k = -16; k <= 16; ++k) b.push_back(2.0 * k);
  return b;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto net = sweep_network();
  const auto biases = sweep_biases();
  SweepConfig cfg;
  cfg.samples_per_point = 5000;
  for (auto _ : state) benchmark::DoNotOptimize(serial::ising_transfer_sweep(net, 0, biases, cfg));
}
void BM_SweepParallel(benchmark::State& state) {
  const auto net = sweep_network();
  const auto biases = sweep_biases();
  SweepConfig cfg;
  cfg.samples_per_point = 5000;
  for (auto _ : state) benchmark::DoNotOptimize(ising_transfer_sweep(net, 0, biases, cfg));
}

SimConfig anneal_config() {
  SimConfig sim;
  sim.max_events = 20000;
  sim.schedule = Schedule::linear(20.0, 5.0, 1e-3);
  return sim;
}

void BM_AnnealSerial(benchmark::State& state) {
  const auto net = Network::ising(random_model(8, -8, 8, 2), RateFunction::exponential(1e6, 20.0));
  for (auto _ : state) benchmark::DoNotOptimize(serial::anneal_replicas(net, anneal_config(), 8));
}
void BM_AnnealParallel(benchmark::State& state) {
  const auto net = Network::ising(random_model(8, -8, 8, 2), RateFunction::exponential(1e6, 20.0));
  for (auto _ : state) benchmark::DoNotOptimize(anneal_replicas(net, anneal_config(), 8));
}

void BM_CtmcEvents(benchmark::State& state) {
  const auto net = Network::ising(random_model(8, -8, 8, 3), RateFunction::exponential(1e6, 12.0));
  SimConfig sim;
  sim.max_events = 100000;
  sim.cache_rates = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_distribution(net, sim));
  state.SetItemsProcessed(state.iterations() * 100000);
}

}  // namespace

BENCHMARK(BM_EnumerateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BoltzmannSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoltzmannParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TransferSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TransferParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AnnealSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnnealParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CtmcEvents)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
