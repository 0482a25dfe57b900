#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spad {

struct PulseConfig {
  double photon_rate = 1e6;  // arrivals per second (1 / tau_p)
  double filter_tau = 1e-6;  // seconds
  double amplitude = 1.0;    // per-avalanche impulse weight
  double duration = 1e-2;    // seconds
  double dt = 5e-8;          // trace step, at most filter_tau / 20
  std::optional<double> refilter_tau;

  /// Throws std::invalid_argument on non-positive fields or a coarse dt.
  void validate() const;
};

/// Filtered pulse train sampled at k * dt, k = 0 .. samples.size() - 1.
struct Trace {
  double dt = 0.0;
  std::vector<double> samples;

  double duration() const noexcept { return dt * static_cast<double>(samples.size()); }
};

/// Poisson arrivals on [0, duration) filtered by amplitude * exp(-t / filter_tau).
/// Each step decays the previous sample exactly and adds the arrivals inside
/// the step at their decayed weight. The trace starts empty at t = 0.
Trace generate_trace(const PulseConfig& config, std::uint64_t seed);

/// First-order low-pass with unit DC gain; the output starts at samples[0].
Trace low_pass(const Trace& trace, double tau);

struct Crossings {
  std::vector<double> times;  // seconds
  double rate = 0.0;          // count / trace duration
};

/// Upward threshold crossings on the sample grid: sample k is an event when
/// samples[k] > threshold >= samples[k - 1]. Low-passed first when
/// `refilter_tau` is given.
Crossings count_crossings(const Trace& trace, double threshold, std::optional<double> refilter_tau = std::nullopt);

struct RatePoint {
  double threshold = 0.0;
  double rate = 0.0;
  std::uint64_t count = 0;
};

/// One trace, crossing-counted at every threshold (thresholds run concurrently).
/// Uses config.refilter_tau when set.
std::vector<RatePoint> transfer_function(const PulseConfig& config, std::span<const double> thresholds,
                                         std::uint64_t seed);
/// Counting step alone, for a trace already generated (and refiltered).
std::vector<RatePoint> transfer_function(const Trace& trace, std::span<const double> thresholds);

/// Points above the rate peak whose count is at least `min_count` and whose
/// rate is at most `max_fraction` of the peak rate: the decaying tail used
/// for rate fits. With max_fraction = 1 the peak itself is included.
std::vector<RatePoint> tail_points(std::span<const RatePoint> curve, std::uint64_t min_count,
                                   double max_fraction = 1.0);

struct IntervalStats {
  std::vector<double> bin_edges;        // bins + 1 edges from 0
  std::vector<std::uint64_t> counts;    // intervals per bin
  double rate = 0.0;                    // maximum likelihood: 1 / mean interval
  double ks = 0.0;                      // KS statistic against Exp(rate)
  double ks_pvalue = 0.0;
  std::size_t intervals = 0;
};

/// Inter-event interval statistics. Needs at least 100 events
/// (std::invalid_argument otherwise).
IntervalStats interval_statistics(std::span<const double> event_times, std::size_t bins = 50);

}  // namespace spad
