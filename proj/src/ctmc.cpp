#include "spad/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spad/parallel.hpp"

namespace spad {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Network

Network::Network(Model model, std::vector<RateFunction> clocks, bool split)
    : model_(std::move(model)), clocks_(std::move(clocks)), split_(split) {
  if (const auto* ising = std::get_if<IsingModel>(&model_)) {
    node_states_.assign(ising->size(), 2);
  } else {
    const auto& potts = std::get<PottsModel>(model_);
    node_states_.assign(potts.sizes().begin(), potts.sizes().end());
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < node_states_.size(); ++i) {
    clock_offsets_.push_back(offset);
    for (int a = 0; a < node_states_[i]; ++a) clock_node_.push_back(i);
    offset += static_cast<std::size_t>(node_states_[i]);
  }
  require(clocks_.size() == offset, "Network: clock count must equal the total number of node values");

  neighbours_.resize(node_states_.size());
  for (std::size_t i = 0; i < node_states_.size(); ++i)
    for (std::size_t j = 0; j < node_states_.size(); ++j) {
      const bool linked = std::visit([&](const auto& m) { return coupled(m, i, j); }, model_);
      if (linked) neighbours_[i].push_back(j);
    }
}

Network Network::ising(IsingModel model, std::vector<RateFunction> clocks, bool split) {
  return Network(Model{std::move(model)}, std::move(clocks), split);
}

Network Network::ising(IsingModel model, const RateFunction& shared, bool split) {
  const std::size_t n = model.size();
  return ising(std::move(model), std::vector<RateFunction>(2 * n, shared), split);
}

Network Network::potts(PottsModel model, std::vector<RateFunction> clocks) {
  return Network(Model{std::move(model)}, std::move(clocks), true);
}

Network Network::potts(PottsModel model, const RateFunction& shared) {
  const std::size_t labels = model.label_count();
  return potts(std::move(model), std::vector<RateFunction>(labels, shared));
}

int Network::clock_value(std::size_t clock) const {
  const std::size_t node = clock_node_.at(clock);
  const int local = static_cast<int>(clock - clock_offsets_[node]);
  return is_ising() ? (local == 0 ? -1 : 1) : local;
}

Network Network::with_temperature(double T) const {
  Network copy = *this;
  for (auto& f : copy.clocks_) f = f.with_temperature(T);
  return copy;
}

Network Network::with_clocks(std::vector<RateFunction> clocks) const {
  require(clocks.size() == clocks_.size(), "Network::with_clocks: clock count mismatch");
  Network copy = *this;
  copy.clocks_ = std::move(clocks);
  return copy;
}

// ---------------------------------------------------------------------------
// States

NetworkState ground_initial_state(const Network& network) {
  return NetworkState{std::vector<int>(network.node_count(), network.is_ising() ? -1 : 0)};
}

void validate_state(const Network& network, const NetworkState& state) {
  require(state.values.size() == network.node_count(), "network state length does not match the network");
  for (std::size_t i = 0; i < state.values.size(); ++i) {
    const int v = state.values[i];
    if (network.is_ising())
      require(v == -1 || v == 1, "Ising spins must be -1 or +1");
    else
      require(v >= 0 && v < network.node_states(i), "Potts label out of range");
  }
}

StateIndex state_index(const Network& network, const NetworkState& state) {
  StateIndex index = 0;
  if (network.is_ising()) {
    for (std::size_t i = 0; i < state.values.size(); ++i)
      if (state.values[i] > 0) index |= StateIndex{1} << i;
    return index;
  }
  for (std::size_t k = state.values.size(); k-- > 0;)
    index = index * static_cast<StateIndex>(network.node_states(k)) + static_cast<StateIndex>(state.values[k]);
  return index;
}

NetworkState network_state_at(const Network& network, StateIndex index) {
  if (const auto* ising = std::get_if<IsingModel>(&network.model()))
    return NetworkState{ising_state_at(ising->size(), index).spins};
  return NetworkState{potts_state_at(std::get<PottsModel>(network.model()), index).labels};
}

// ---------------------------------------------------------------------------
// Rates

namespace {

double total_energy(const Network& network, std::span<const int> values) {
  const auto& ising = std::get<IsingModel>(network.model());
  return ising_energy(ising, IsingState{std::vector<int>(values.begin(), values.end())});
}

// Writes node i's clock rates into `out`. `energy` is the joint-state energy,
// only read by the absolute Ising drive.
void node_rates(const Network& network, std::span<const int> values, std::size_t i, std::optional<double> T,
                double energy, std::span<double> out) {
  const auto clocks = network.clocks().subspan(network.clock_offset(i));
  auto eval = [&](std::size_t k, double e) { return clocks[k].at(e, T ? *T : clocks[k].temperature()); };

  if (const auto* ising = std::get_if<IsingModel>(&network.model())) {
    const double field = local_field(*ising, values, i);
    // Node-dependent conditional energies: E(-1) = field, E(+1) = -field.
    if (network.ising_split()) {
      // +-dE/2 with dE = E(+1) - E(-1) = -2 field.
      out[0] = eval(0, field);
      out[1] = eval(1, -field);
    } else {
      const double own = values[i] > 0 ? -field : field;
      const double rest = energy - own;
      out[0] = eval(0, rest + field);
      out[1] = eval(1, rest - field);
    }
    return;
  }
  const auto& potts = std::get<PottsModel>(network.model());
  const int q = potts.states(i);
  double buf[64];
  std::vector<double> heap;
  std::span<double> energies;
  if (q <= 64) {
    energies = std::span<double>(buf, static_cast<std::size_t>(q));
  } else {
    heap.resize(static_cast<std::size_t>(q));
    energies = heap;
  }
  potts_conditional_into(potts, values, i, energies);
  for (int a = 0; a < q; ++a) out[a] = eval(static_cast<std::size_t>(a), energies[a]);
}

bool absolute_drive(const Network& network) { return network.is_ising() && !network.ising_split(); }

std::size_t select_clock(std::span<const double> rates, double total, double u) {
  const double target = u * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] > 0.0) last_positive = k;
    cumulative += rates[k];
    if (target < cumulative) return k;
  }
  return last_positive;
}

double checked_total(std::span<const double> rates) {
  double total = 0.0;
  for (double r : rates) total += r;
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::domain_error("ctmc: total event rate is zero or not finite (degenerate rate functions)");
  return total;
}

// Rate cache over all clocks. With `cache` set, only clocks whose inputs
// changed are recomputed; every value is produced by node_rates either way,
// so the sums and selections are bitwise identical.
class Engine {
 public:
  Engine(const Network& network, NetworkState state, bool cache)
      : network_(network), state_(std::move(state)), cache_(cache), rates_(network.clock_count(), 0.0) {}

  void prepare(std::optional<double> T) {
    const bool same_T = valid_ && T == T_;
    if (cache_ && same_T && dirty_.empty()) return;
    const double energy = absolute_drive(network_) ? total_energy(network_, state_.values) : 0.0;
    if (cache_ && same_T && !absolute_drive(network_)) {
      for (std::size_t i : dirty_) refresh(i, T, energy);
    } else {
      for (std::size_t i = 0; i < network_.node_count(); ++i) refresh(i, T, energy);
    }
    dirty_.clear();
    T_ = T;
    valid_ = true;
    total_ = checked_total(rates_);
  }

  double total() const noexcept { return total_; }
  std::span<const double> rates() const noexcept { return rates_; }

  // Applies the clock's transition; returns whether the node changed value.
  bool fire(std::size_t clock, std::size_t& node, int& value) {
    value = network_.clock_value(clock);
    node = network_.clock_node(clock);
    if (state_.values[node] == value) {
      if (!cache_) dirty_all();
      return false;
    }
    state_.values[node] = value;
    if (cache_) {
      dirty_.push_back(node);
      for (std::size_t j : network_.neighbours(node))
        if (j != node) dirty_.push_back(j);
    } else {
      dirty_all();
    }
    return true;
  }

  const NetworkState& state() const noexcept { return state_; }

 private:
  void refresh(std::size_t i, std::optional<double> T, double energy) {
    const std::size_t off = network_.clock_offset(i);
    node_rates(network_, state_.values, i, T, energy,
               std::span<double>(rates_).subspan(off, static_cast<std::size_t>(network_.node_states(i))));
  }

  void dirty_all() {
    dirty_.clear();
    valid_ = false;
  }

  const Network& network_;
  NetworkState state_;
  bool cache_;
  std::vector<double> rates_;
  std::vector<std::size_t> dirty_;
  std::optional<double> T_;
  bool valid_ = false;
  double total_ = 0.0;
};

}  // namespace

std::vector<double> clock_rates(const Network& network, const NetworkState& state, std::optional<double> T) {
  validate_state(network, state);
  std::vector<double> rates(network.clock_count());
  const double energy = absolute_drive(network) ? total_energy(network, state.values) : 0.0;
  for (std::size_t i = 0; i < network.node_count(); ++i)
    node_rates(network, state.values, i, T, energy,
               std::span<double>(rates).subspan(network.clock_offset(i),
                                                static_cast<std::size_t>(network.node_states(i))));
  return rates;
}

StepResult step(const Network& network, NetworkState& state, Rng& rng, double now) {
  const auto rates = clock_rates(network, state);
  const double total = checked_total(rates);
  StepResult result;
  result.dt = rng.exponential(total);
  const std::size_t clock = select_clock(rates, total, rng.uniform());
  const std::size_t node = network.clock_node(clock);
  const int value = network.clock_value(clock);
  state.values[node] = value;
  result.event = EventRecord{now + result.dt, node, value, total};
  return result;
}

// ---------------------------------------------------------------------------
// Schedule / config

double Schedule::at(double t) const {
  if (points.empty()) throw std::invalid_argument("schedule: no breakpoints");
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  const auto hi = std::upper_bound(points.begin(), points.end(), t,
                                   [](double v, const auto& p) { return v < p.first; });
  const auto lo = hi - 1;
  const double frac = (t - lo->first) / (hi->first - lo->first);
  return lo->second + frac * (hi->second - lo->second);
}

bool Schedule::non_increasing() const {
  for (std::size_t k = 1; k < points.size(); ++k)
    if (points[k].second > points[k - 1].second) return false;
  return true;
}

void Schedule::validate() const {
  require(!points.empty(), "schedule: at least one breakpoint required");
  for (std::size_t k = 0; k < points.size(); ++k) {
    require(std::isfinite(points[k].first) && points[k].first >= 0.0, "schedule: times must be finite and >= 0");
    require(std::isfinite(points[k].second) && points[k].second > 0.0, "schedule: temperatures must be positive");
    if (k > 0) require(points[k].first > points[k - 1].first, "schedule: times must be strictly increasing");
  }
}

void SimConfig::validate() const {
  require(max_events.has_value() != max_time.has_value(), "config: exactly one stop criterion (events or time) required");
  if (max_time) require(std::isfinite(*max_time) && *max_time > 0.0, "config: max_time must be positive");
  if (max_events) require(*max_events > 0, "config: max_events must be positive");
  require(std::isfinite(blackout) && blackout >= 0.0, "config: blackout must be >= 0");
  if (sample_mode == SampleMode::clocked)
    require(std::isfinite(sample_period) && sample_period > 0.0, "config: clocked period must be positive");
  if (latch) require(latch->q >= 1 && latch->stage_delay >= 0.0, "config: invalid latch parameters");
  if (schedule) schedule->validate();
}

double latch_invalid_fraction(double event_rate, int q, double stage_delay) {
  require(event_rate >= 0.0 && q >= 0 && stage_delay >= 0.0, "latch_invalid_fraction: inputs must be non-negative");
  return std::min(1.0, event_rate * q * stage_delay);
}

// ---------------------------------------------------------------------------
// run

RunSummary run(const Network& network, const SimConfig& config, RunObserver& observer) {
  config.validate();
  NetworkState initial = config.initial ? *config.initial : ground_initial_state(network);
  validate_state(network, initial);

  Engine engine(network, std::move(initial), config.cache_rates);
  Rng rng(config.seed);
  const bool clocked = config.sample_mode == SampleMode::clocked;
  const double period = config.sample_period;

  RunSummary summary;
  std::vector<std::uint64_t> changes(network.node_count(), 0);
  StateIndex index = state_index(network, engine.state());
  double t = 0.0;
  std::uint64_t tick = 1;

  auto emit_ticks_before = [&](double limit, bool inclusive) {
    while (true) {
      const double tick_time = static_cast<double>(tick) * period;
      if (inclusive ? tick_time > limit : tick_time >= limit) break;
      observer.on_sample(Sample{index, 1.0, tick_time});
      ++summary.samples;
      ++tick;
    }
  };

  while (true) {
    const double start = summary.events > 0 ? t + config.blackout : t;
    if (config.max_time && start >= *config.max_time) {
      if (clocked) emit_ticks_before(*config.max_time, true);
      summary.end_time = *config.max_time;
      break;
    }
    std::optional<double> T;
    if (config.schedule) T = config.schedule->at(start);
    engine.prepare(T);
    const double total = engine.total();
    const double dt = rng.exponential(total);
    const double t_event = start + dt;

    if (config.max_time && t_event > *config.max_time) {
      const double dwell = *config.max_time - start;
      if (clocked) {
        emit_ticks_before(*config.max_time, true);
      } else {
        observer.on_sample(Sample{index, dwell, start});
        ++summary.samples;
      }
      summary.active_time += dwell;
      summary.end_time = *config.max_time;
      break;
    }

    if (clocked) {
      emit_ticks_before(t_event, false);
    } else {
      observer.on_sample(Sample{index, dt, start});
      ++summary.samples;
    }
    summary.active_time += dt;

    const std::size_t clock = select_clock(engine.rates(), total, rng.uniform());
    std::size_t node = 0;
    int value = 0;
    if (engine.fire(clock, node, value)) {
      ++changes[node];
      index = state_index(network, engine.state());
    } else {
      ++summary.self_transitions;
    }
    observer.on_event(EventRecord{t_event, node, value, total});
    ++summary.events;
    t = t_event;
    if (config.max_events && summary.events >= *config.max_events) {
      summary.end_time = t;
      break;
    }
  }

  summary.final_state = engine.state();
  if (config.latch && summary.end_time > 0.0) {
    double per_latch = 0.0;
    for (auto c : changes) per_latch += static_cast<double>(c) / summary.end_time;
    per_latch /= static_cast<double>(network.node_count());
    summary.latch_invalid_fraction = latch_invalid_fraction(per_latch, config.latch->q, config.latch->stage_delay);
  }
  return summary;
}

namespace {

class CollectObserver : public RunObserver {
 public:
  explicit CollectObserver(RunResult& out) : out_(out) {}
  void on_event(const EventRecord& e) override { out_.events.push_back(e); }
  void on_sample(const Sample& s) override { out_.samples.push_back(s); }

 private:
  RunResult& out_;
};

class DistributionObserver : public RunObserver {
 public:
  explicit DistributionObserver(EmpiricalDistribution& dist) : dist_(dist) {}
  void on_sample(const Sample& s) override { dist_.add(s); }

 private:
  EmpiricalDistribution& dist_;
};

}  // namespace

RunResult run(const Network& network, const SimConfig& config) {
  RunResult result;
  CollectObserver observer(result);
  result.summary = run(network, config, observer);
  return result;
}

EmpiricalDistribution sample_distribution(const Network& network, const SimConfig& config, RunSummary* summary) {
  EmpiricalDistribution dist(state_count(network.model()));
  DistributionObserver observer(dist);
  auto s = run(network, config, observer);
  if (summary) *summary = std::move(s);
  return dist;
}

// ---------------------------------------------------------------------------
// Transfer sweep

namespace {

class PlusCounter : public RunObserver {
 public:
  void on_sample(const Sample& s) override {
    ++total;
    if (s.index == 1) ++plus;
  }
  std::uint64_t plus = 0;
  std::uint64_t total = 0;
};

}  // namespace

double transfer_point(const Network& network, std::size_t neuron, double bias, std::uint64_t samples, double period,
                      std::uint64_t seed) {
  require(network.is_ising(), "transfer sweep: Ising network required");
  require(neuron < network.node_count(), "transfer sweep: neuron index out of range");
  require(samples > 0, "transfer sweep: samples must be positive");
  IsingModel single(1);
  single.set_bias(0, bias);
  const auto clocks = network.clocks();
  const Network isolated =
      Network::ising(std::move(single), {clocks[2 * neuron], clocks[2 * neuron + 1]}, network.ising_split());

  SimConfig config;
  config.seed = seed;
  config.sample_mode = SampleMode::clocked;
  config.sample_period = period;
  config.max_time = static_cast<double>(samples) * period;
  PlusCounter counter;
  run(isolated, config, counter);
  return static_cast<double>(counter.plus) / static_cast<double>(counter.total);
}

std::vector<TransferPoint> ising_transfer_sweep(const Network& network, std::size_t neuron,
                                                std::span<const double> bias_values, const SweepConfig& config) {
  std::vector<TransferPoint> curve(bias_values.size());
  parallel_for(bias_values.size(), [&](std::size_t k) {
    curve[k] = TransferPoint{bias_values[k], transfer_point(network, neuron, bias_values[k], config.samples_per_point,
                                                            config.sample_period, stream_seed(config.seed, k))};
  });
  return curve;
}

// ---------------------------------------------------------------------------
// Annealing

namespace {

class EnergyTable {
 public:
  explicit EnergyTable(const Model& model) : model_(model) {
    const StateIndex count = state_count(model);
    if (count <= (StateIndex{1} << 20)) {
      table_.resize(count);
      for (StateIndex s = 0; s < count; ++s) table_[s] = energy_at(model, s);
    }
  }
  double operator()(StateIndex s) const { return table_.empty() ? energy_at(model_, s) : table_[s]; }

 private:
  const Model& model_;
  std::vector<double> table_;
};

// Records samples and tracks the lowest-energy state entered via the event stream.
class AnnealObserver : public RunObserver {
 public:
  AnnealObserver(const Network& network, NetworkState state, const EnergyTable& energy, AnnealResult& out)
      : network_(network), state_(std::move(state)), energy_(energy), out_(out) {
    visit(state_index(network_, state_));
  }

  void on_sample(const Sample& s) override { out_.samples.push_back(s); }

  void on_event(const EventRecord& e) override {
    if (state_.values[e.node] == e.new_value) return;
    state_.values[e.node] = e.new_value;
    visit(state_index(network_, state_));
  }

 private:
  void visit(StateIndex s) {
    const double e = energy_(s);
    if (!seen_ || e < out_.best_energy) {
      out_.best_energy = e;
      out_.best_state = s;
      seen_ = true;
    }
  }

  const Network& network_;
  NetworkState state_;
  const EnergyTable& energy_;
  AnnealResult& out_;
  bool seen_ = false;
};

}  // namespace

AnnealResult anneal(const Network& network, const SimConfig& config, double window) {
  require(window > 0.0 && window <= 1.0, "anneal: window must be in (0, 1]");
  if (config.schedule) {
    config.schedule->validate();
    require(config.schedule->non_increasing(), "anneal: schedule temperature must be non-increasing");
  }
  const EnergyTable energy(network.model());
  AnnealResult result;
  AnnealObserver observer(network, config.initial ? *config.initial : ground_initial_state(network), energy, result);
  result.summary = run(network, config, observer);

  result.energies.reserve(result.samples.size());
  result.running_mean.reserve(result.samples.size());
  double weighted = 0.0;
  double mass = 0.0;
  double window_weighted = 0.0;
  double window_mass = 0.0;
  const double window_end = window * result.summary.end_time;
  for (const auto& s : result.samples) {
    const double e = energy(s.index);
    result.energies.push_back(e);
    weighted += e * s.weight;
    mass += s.weight;
    result.running_mean.push_back(mass > 0.0 ? weighted / mass : e);
    if (s.time < window_end) {
      window_weighted += e * s.weight;
      window_mass += s.weight;
    }
  }
  result.final_mean = result.running_mean.empty() ? 0.0 : result.running_mean.back();
  result.initial_window_mean = window_mass > 0.0 ? window_weighted / window_mass : result.final_mean;
  return result;
}

std::vector<AnnealResult> anneal_replicas(const Network& network, const SimConfig& config, std::size_t count,
                                          double window) {
  std::vector<AnnealResult> results(count);
  parallel_for(count, [&](std::size_t r) {
    SimConfig replica = config;
    replica.seed = stream_seed(config.seed, r);
    auto result = anneal(network, replica, window);
    result.samples = {};
    result.energies = {};
    result.running_mean = {};
    results[r] = std::move(result);
  });
  return results;
}

}  // namespace spad
