#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "spad/distribution.hpp"
#include "spad/model.hpp"
#include "spad/ratefn.hpp"
#include "spad/rng.hpp"

namespace spad {

/// A model wired to variable-rate circuits. Every node value has one clock;
/// when a clock fires the owning node jumps to that clock's value.
///
/// Ising neuron i owns clocks 2i (-> -1) and 2i+1 (-> +1). Potts node i owns
/// clocks offset(i) .. offset(i)+q_i-1 in label order.
///
/// Differential drive (`ising_split`, the default): the two clocks of an Ising
/// neuron see -dE/2 and +dE/2 with dE = E(+1) - E(-1), so exponential clocks
/// run at r0 * exp(+-dE / 2T). Without it each clock sees the absolute
/// energy of the joint state it would produce; the common term cancels in
/// the stationary law but changes the total event rate.
class Network {
 public:
  static Network ising(IsingModel model, std::vector<RateFunction> clocks, bool split = true);
  static Network ising(IsingModel model, const RateFunction& shared, bool split = true);
  static Network potts(PottsModel model, std::vector<RateFunction> clocks);
  static Network potts(PottsModel model, const RateFunction& shared);

  const Model& model() const noexcept { return model_; }
  bool is_ising() const noexcept { return std::holds_alternative<IsingModel>(model_); }
  bool ising_split() const noexcept { return split_; }

  std::size_t node_count() const noexcept { return node_states_.size(); }
  std::size_t clock_count() const noexcept { return clocks_.size(); }
  int node_states(std::size_t i) const { return node_states_[i]; }
  std::size_t clock_offset(std::size_t i) const { return clock_offsets_[i]; }
  std::span<const RateFunction> clocks() const noexcept { return clocks_; }
  /// Nodes whose clock rates depend on node i (coupled neighbours).
  std::span<const std::size_t> neighbours(std::size_t i) const { return neighbours_[i]; }

  std::size_t clock_node(std::size_t clock) const { return clock_node_.at(clock); }
  /// Node value a clock drives to: a spin for Ising, a label for Potts.
  int clock_value(std::size_t clock) const;

  /// Copy with every clock's temperature replaced.
  Network with_temperature(double T) const;
  /// Copy with the clocks replaced (same count).
  Network with_clocks(std::vector<RateFunction> clocks) const;

 private:
  Network(Model model, std::vector<RateFunction> clocks, bool split);

  Model model_;
  std::vector<RateFunction> clocks_;
  bool split_ = true;
  std::vector<int> node_states_;
  std::vector<std::size_t> clock_offsets_;
  std::vector<std::size_t> clock_node_;
  std::vector<std::vector<std::size_t>> neighbours_;
};

/// Spins (Ising) or labels (Potts), one per node.
struct NetworkState {
  std::vector<int> values;
  bool operator==(const NetworkState&) const = default;
};

/// All spins -1 / all labels 0.
NetworkState ground_initial_state(const Network& network);
StateIndex state_index(const Network& network, const NetworkState& state);
NetworkState network_state_at(const Network& network, StateIndex index);
void validate_state(const Network& network, const NetworkState& state);

struct EventRecord {
  double time = 0.0;  // seconds, wall time including any blackout
  std::size_t node = 0;
  int new_value = 0;  // spin or label
  double rates_total = 0.0;
  bool operator==(const EventRecord&) const = default;
};

struct StepResult {
  double dt = 0.0;
  EventRecord event;
};

/// Event-clock rates for every clock given the joint state, at temperature T
/// (nullopt: each clock's own temperature).
std::vector<double> clock_rates(const Network& network, const NetworkState& state,
                                std::optional<double> T = std::nullopt);

/// One Gillespie direct-method step with every rate recomputed from `state`.
/// Draws dt ~ Exp(R) then the clock with probability r_k / R, and moves the
/// owning node to that clock's value (possibly its current value).
/// Throws std::domain_error when the total rate is zero or not finite.
StepResult step(const Network& network, NetworkState& state, Rng& rng, double now = 0.0);

/// Piecewise-linear temperature against simulated time, held constant
/// outside the breakpoints.
struct Schedule {
  std::vector<std::pair<double, double>> points;  // (time, T), time strictly increasing

  double at(double t) const;
  bool non_increasing() const;
  void validate() const;
  static Schedule constant(double T) { return Schedule{{{0.0, T}}}; }
  static Schedule linear(double T_start, double T_end, double duration) {
    return Schedule{{{0.0, T_start}, {duration, T_end}}};
  }
};

struct LatchConfig {
  double stage_delay = 0.0;  // seconds per latch stage
  int q = 2;
};

enum class SampleMode { dwell, clocked };

struct SimConfig {
  std::uint64_t seed = 0;
  /// Exactly one stop criterion must be set.
  std::optional<std::uint64_t> max_events;
  std::optional<double> max_time;
  /// Dead time after every event during which no clock fires (0 disables).
  double blackout = 0.0;
  SampleMode sample_mode = SampleMode::dwell;
  double sample_period = 0.0;  // clocked mode only
  std::optional<LatchConfig> latch;
  std::optional<Schedule> schedule;
  std::optional<NetworkState> initial;
  /// Recompute only the clocks of the fired node and its neighbours.
  /// Output is bitwise identical to full recomputation.
  bool cache_rates = true;

  void validate() const;
};

class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_event(const EventRecord&) {}
  virtual void on_sample(const Sample&) {}
};

struct RunSummary {
  std::uint64_t events = 0;
  std::uint64_t self_transitions = 0;
  std::uint64_t samples = 0;
  double end_time = 0.0;     // wall time
  double active_time = 0.0;  // wall time minus blackout
  NetworkState final_state;
  /// Mean fraction of time a latch spends settling; set when a latch is configured.
  std::optional<double> latch_invalid_fraction;
};

/// Iterates `step` until the stop criterion.
///
/// Dwell-weighted mode emits one sample per event: the state left behind and
/// its active dwell (blackout excluded, since every clock is suspended then).
/// Clocked mode emits the state at every positive multiple of the period in
/// wall time. A schedule sets every clock's T to schedule.at(t) at the start
/// of each waiting period.
RunSummary run(const Network& network, const SimConfig& config, RunObserver& observer);

struct RunResult {
  std::vector<EventRecord> events;
  std::vector<Sample> samples;
  RunSummary summary;
};
RunResult run(const Network& network, const SimConfig& config);

/// Accumulates the sample stream of one run.
EmpiricalDistribution sample_distribution(const Network& network, const SimConfig& config,
                                          RunSummary* summary = nullptr);

/// Settling-time fraction of a one-hot latch: event_rate * q * stage_delay, clamped to 1.
double latch_invalid_fraction(double event_rate, int q, double stage_delay);

struct TransferPoint {
  double bias = 0.0;
  double p_plus = 0.0;
};

struct SweepConfig {
  std::uint64_t samples_per_point = 100000;
  double sample_period = 5e-6;  // seconds between clocked samples
  std::uint64_t seed = 0;
};

/// Isolated Ising neuron built from `neuron`'s two clocks, with its weights
/// unused and its bias set to `bias`. Fraction of clocked samples at +1.
double transfer_point(const Network& network, std::size_t neuron, double bias, std::uint64_t samples,
                      double period, std::uint64_t seed);

/// Bias sweep of one Ising neuron; points run concurrently, each with its own
/// stream stream_seed(seed, point).
std::vector<TransferPoint> ising_transfer_sweep(const Network& network, std::size_t neuron,
                                                std::span<const double> bias_values, const SweepConfig& config);

struct AnnealResult {
  std::vector<Sample> samples;
  std::vector<double> energies;
  std::vector<double> running_mean;  // weighted by dwell (or sample count when clocked)
  StateIndex best_state = 0;
  double best_energy = 0.0;
  double initial_window_mean = 0.0;  // weighted mean over the first `window` of run time
  double final_mean = 0.0;           // running mean at the end of the run
  RunSummary summary;
};

/// Runs with the configured schedule (which must be non-increasing) and
/// tracks sample energies and the lowest-energy state entered.
AnnealResult anneal(const Network& network, const SimConfig& config, double window = 0.1);

/// Independent annealing runs; replica r uses seed stream_seed(config.seed, r).
std::vector<AnnealResult> anneal_replicas(const Network& network, const SimConfig& config, std::size_t count,
                                          double window = 0.1);

}  // namespace spad
