#pragma once

#include <span>
#include <vector>

namespace spad {

enum class RateKind { exponential, erfc, tabulated };

/// Energy -> event-rate transfer function of one variable-rate circuit.
///
/// exponential: r0 * exp(-(E - offset) / T)
/// erfc:        r0 * erfc((E - offset) / T') / erfc(0)
/// tabulated:   log-linear interpolation of a measured (x, rate) table at
///              x = (E - offset) / T, clamped to the end rates. T is the
///              energy per table unit (1 reads the table raw); r0 reports the
///              table rate at x = 0.
///
/// `temperature()` is T for the exponential and tabulated kinds and T' for erfc.
class RateFunction {
 public:
  static RateFunction exponential(double r0, double T, double offset = 0.0);
  static RateFunction erfc(double r0, double T_prime, double offset = 0.0);
  /// `x` strictly increasing, `rates` positive and non-increasing.
  static RateFunction tabulated(std::vector<double> x, std::vector<double> rates, double T = 1.0,
                                double offset = 0.0);

  double operator()(double energy) const { return at(energy, T_); }
  /// Rate with `T` standing in for the stored temperature.
  double at(double energy, double T) const;

  RateKind kind() const noexcept { return kind_; }
  double r0() const noexcept { return r0_; }
  double temperature() const noexcept { return T_; }
  double offset() const noexcept { return offset_; }
  std::span<const double> table_x() const noexcept { return x_; }
  std::span<const double> table_rates() const noexcept { return rates_; }

  RateFunction with_offset(double offset) const;
  /// Copy with T (or T') replaced; r0 and offset unchanged. Throws if T_new <= 0.
  RateFunction with_temperature(double T_new) const;

  /// Lowest and highest rate reachable at any energy (range of rate(0) over offsets).
  double min_rate() const noexcept;
  double max_rate() const noexcept;

  bool operator==(const RateFunction&) const = default;

 private:
  RateFunction() = default;
  double table_rate(double x) const;

  RateKind kind_ = RateKind::exponential;
  double r0_ = 1.0;
  double T_ = 1.0;
  double offset_ = 0.0;
  std::vector<double> x_;
  std::vector<double> log_rates_;
  std::vector<double> rates_;
};

inline double rate(const RateFunction& f, double energy) { return f(energy); }

/// Offsets putting every circuit at `target_rate` for zero input energy.
/// Exponential is closed form; erfc and tabulated are bisected.
std::vector<double> calibrate(std::span<const RateFunction> fs, double target_rate);

/// Same as `calibrate` but returns the calibrated functions.
std::vector<RateFunction> calibrated(std::span<const RateFunction> fs, double target_rate);

RateFunction temperature_schedule_apply(const RateFunction& f, double T_new);

}  // namespace spad
