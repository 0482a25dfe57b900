#include "spad/pulsesim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spad/parallel.hpp"
#include "spad/rng.hpp"
#include "spad/stats.hpp"

namespace spad {

void PulseConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!(photon_rate >= 0.0) || !std::isfinite(photon_rate))
    throw std::invalid_argument("pulse config: photon_rate must be non-negative");
  if (!positive(filter_tau)) throw std::invalid_argument("pulse config: filter_tau must be positive");
  if (!positive(amplitude)) throw std::invalid_argument("pulse config: amplitude must be positive");
  if (!positive(duration)) throw std::invalid_argument("pulse config: duration must be positive");
  if (!positive(dt)) throw std::invalid_argument("pulse config: dt must be positive");
  if (dt > filter_tau / 20.0 * (1.0 + 1e-12)) throw std::invalid_argument("pulse config: dt must be at most filter_tau / 20");
  if (refilter_tau && !positive(*refilter_tau)) throw std::invalid_argument("pulse config: refilter_tau must be positive");
  if (duration / dt > 4e9) throw std::invalid_argument("pulse config: trace too long");
}

Trace generate_trace(const PulseConfig& config, std::uint64_t seed) {
  config.validate();
  const auto n = static_cast<std::size_t>(std::llround(config.duration / config.dt));
  Trace trace{config.dt, std::vector<double>(std::max<std::size_t>(n, 1), 0.0)};
  if (config.photon_rate == 0.0) return trace;

  Rng rng(seed);
  const double decay = std::exp(-config.dt / config.filter_tau);
  double next_arrival = rng.exponential(config.photon_rate);
  double level = 0.0;
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    const double t_end = static_cast<double>(k) * config.dt;
    level *= decay;
    while (next_arrival <= t_end) {
      level += config.amplitude * std::exp(-(t_end - next_arrival) / config.filter_tau);
      next_arrival += rng.exponential(config.photon_rate);
    }
    trace.samples[k] = level;
  }
  return trace;
}

Trace low_pass(const Trace& trace, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("low_pass: tau must be positive");
  Trace out{trace.dt, std::vector<double>(trace.samples.size())};
  if (trace.samples.empty()) return out;
  const double keep = std::exp(-trace.dt / tau);
  double z = trace.samples[0];
  out.samples[0] = z;
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    z = keep * z + (1.0 - keep) * trace.samples[k];
    out.samples[k] = z;
  }
  return out;
}

namespace {

std::uint64_t crossing_count(std::span<const double> y, double threshold, std::vector<double>* times, double dt) {
  if (y.empty()) return 0;
  std::uint64_t count = 0;
  bool above = y[0] > threshold;
  for (std::size_t k = 1; k < y.size(); ++k) {
    const bool now = y[k] > threshold;
    if (now && !above) {
      ++count;
      if (times) times->push_back(static_cast<double>(k) * dt);
    }
    above = now;
  }
  return count;
}

}  // namespace

Crossings count_crossings(const Trace& trace, double threshold, std::optional<double> refilter_tau) {
  if (!std::isfinite(threshold)) throw std::invalid_argument("count_crossings: threshold must be finite");
  Crossings out;
  const Trace* source = &trace;
  Trace filtered;
  if (refilter_tau) {
    filtered = low_pass(trace, *refilter_tau);
    source = &filtered;
  }
  crossing_count(source->samples, threshold, &out.times, trace.dt);
  out.rate = trace.samples.empty() ? 0.0 : static_cast<double>(out.times.size()) / trace.duration();
  return out;
}

std::vector<RatePoint> transfer_function(const Trace& trace, std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw std::invalid_argument("transfer_function: thresholds must be sorted ascending");
  for (double u : thresholds)
    if (!std::isfinite(u)) throw std::invalid_argument("transfer_function: thresholds must be finite");
  std::vector<RatePoint> curve(thresholds.size());
  const double duration = trace.duration();
  parallel_for(thresholds.size(), [&](std::size_t k) {
    const auto count = crossing_count(trace.samples, thresholds[k], nullptr, trace.dt);
    curve[k] = RatePoint{thresholds[k], duration > 0.0 ? static_cast<double>(count) / duration : 0.0, count};
  });
  return curve;
}

std::vector<RatePoint> transfer_function(const PulseConfig& config, std::span<const double> thresholds,
                                         std::uint64_t seed) {
  const Trace raw = generate_trace(config, seed);
  if (config.refilter_tau) return transfer_function(low_pass(raw, *config.refilter_tau), thresholds);
  return transfer_function(raw, thresholds);
}

std::vector<RatePoint> tail_points(std::span<const RatePoint> curve, std::uint64_t min_count, double max_fraction) {
  if (!(max_fraction > 0.0 && max_fraction <= 1.0)) throw std::invalid_argument("tail_points: max_fraction must be in (0, 1]");
  std::vector<RatePoint> tail;
  if (curve.empty()) return tail;
  const auto peak = std::max_element(curve.begin(), curve.end(),
                                     [](const RatePoint& a, const RatePoint& b) { return a.rate < b.rate; });
  for (auto it = peak; it != curve.end(); ++it)
    if (it->count >= min_count && it->rate <= max_fraction * peak->rate) tail.push_back(*it);
  return tail;
}

IntervalStats interval_statistics(std::span<const double> event_times, std::size_t bins) {
  if (event_times.size() < 100) throw std::invalid_argument("interval_statistics: need at least 100 events");
  if (bins == 0) throw std::invalid_argument("interval_statistics: bins must be positive");
  std::vector<double> intervals;
  intervals.reserve(event_times.size() - 1);
  for (std::size_t k = 1; k < event_times.size(); ++k) {
    const double gap = event_times[k] - event_times[k - 1];
    if (!(gap >= 0.0)) throw std::invalid_argument("interval_statistics: event times must be non-decreasing");
    intervals.push_back(gap);
  }
  double sum = 0.0;
  for (double v : intervals) sum += v;
  const double mean = sum / static_cast<double>(intervals.size());
  if (!(mean > 0.0)) throw std::domain_error("interval_statistics: all intervals are zero");

  IntervalStats out;
  out.intervals = intervals.size();
  out.rate = 1.0 / mean;
  out.ks = ks_statistic_exponential(intervals, out.rate);
  out.ks_pvalue = ks_pvalue(out.ks, intervals.size());

  const double top = *std::max_element(intervals.begin(), intervals.end());
  const double width = top / static_cast<double>(bins);
  out.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) out.bin_edges[b] = width * static_cast<double>(b);
  out.counts.assign(bins, 0);
  for (double v : intervals) {
    auto b = width > 0.0 ? static_cast<std::size_t>(v / width) : 0;
    ++out.counts[std::min(b, bins - 1)];
  }
  return out;
}

}  // namespace spad
