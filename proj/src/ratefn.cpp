#include "spad/ratefn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace spad {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

RateFunction RateFunction::exponential(double r0, double T, double offset) {
  require(positive_finite(r0), "rate function: r0 must be positive");
  require(positive_finite(T), "rate function: T must be positive");
  require(std::isfinite(offset), "rate function: offset must be finite");
  RateFunction f;
  f.kind_ = RateKind::exponential;
  f.r0_ = r0;
  f.T_ = T;
  f.offset_ = offset;
  return f;
}

RateFunction RateFunction::erfc(double r0, double T_prime, double offset) {
  RateFunction f = exponential(r0, T_prime, offset);
  f.kind_ = RateKind::erfc;
  return f;
}

RateFunction RateFunction::tabulated(std::vector<double> x, std::vector<double> rates, double T, double offset) {
  require(x.size() >= 2 && x.size() == rates.size(), "tabulated rate: need at least two (x, rate) pairs");
  require(positive_finite(T), "rate function: T must be positive");
  require(std::isfinite(offset), "rate function: offset must be finite");
  for (std::size_t k = 0; k < x.size(); ++k) {
    require(std::isfinite(x[k]), "tabulated rate: x must be finite");
    require(positive_finite(rates[k]), "tabulated rate: rates must be positive");
    if (k > 0) {
      require(x[k] > x[k - 1], "tabulated rate: x must be strictly increasing");
      require(rates[k] <= rates[k - 1], "tabulated rate: rates must be non-increasing");
    }
  }
  RateFunction f;
  f.kind_ = RateKind::tabulated;
  f.T_ = T;
  f.offset_ = offset;
  f.log_rates_.reserve(rates.size());
  for (double r : rates) f.log_rates_.push_back(std::log(r));
  f.x_ = std::move(x);
  f.rates_ = std::move(rates);
  f.r0_ = f.table_rate(0.0);
  return f;
}

double RateFunction::table_rate(double x) const {
  if (x <= x_.front()) return rates_.front();
  if (x >= x_.back()) return rates_.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - x_[lo]) / (x_[hi] - x_[lo]);
  return std::exp(log_rates_[lo] + t * (log_rates_[hi] - log_rates_[lo]));
}

double RateFunction::at(double energy, double T) const {
  if (!std::isfinite(energy)) throw std::domain_error("rate: energy must be finite");
  const double e = energy - offset_;
  switch (kind_) {
    case RateKind::exponential:
      return r0_ * std::exp(-e / T);
    case RateKind::erfc:
      return r0_ * std::erfc(e / T);  // erfc(0) == 1
    case RateKind::tabulated:
      return table_rate(e / T);
  }
  return 0.0;
}

RateFunction RateFunction::with_offset(double offset) const {
  require(std::isfinite(offset), "rate function: offset must be finite");
  RateFunction f = *this;
  f.offset_ = offset;
  return f;
}

RateFunction RateFunction::with_temperature(double T_new) const {
  require(positive_finite(T_new), "rate function: temperature must be positive");
  RateFunction f = *this;
  f.T_ = T_new;
  return f;
}

double RateFunction::min_rate() const noexcept {
  return kind_ == RateKind::tabulated ? rates_.back() : 0.0;
}

double RateFunction::max_rate() const noexcept {
  switch (kind_) {
    case RateKind::exponential:
      return std::numeric_limits<double>::infinity();
    case RateKind::erfc:
      return 2.0 * r0_;
    case RateKind::tabulated:
      return rates_.front();
  }
  return 0.0;
}

namespace {

// rate(0) as a function of the offset is non-decreasing; bisect for target.
double bisect_offset(const RateFunction& f, double target, double lo, double hi) {
  auto at = [&](double o) { return f.with_offset(o)(0.0); };
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = at(mid);
    if (std::abs(r - target) <= 1e-13 * target) return mid;
    (r < target ? lo : hi) = mid;
  }
  const double o = 0.5 * (lo + hi);
  if (std::abs(at(o) - target) > 1e-9 * target)
    throw std::domain_error("calibrate: bisection did not reach the target rate");
  return o;
}

double calibrate_one(const RateFunction& f, double target) {
  const bool reachable = f.kind() == RateKind::tabulated
                             ? target >= f.min_rate() && target <= f.max_rate()
                             : target > f.min_rate() && target < f.max_rate();
  if (!reachable)
    throw std::domain_error("calibrate: target rate is not reachable by this circuit");
  const double T = f.temperature();
  switch (f.kind()) {
    case RateKind::exponential:
      return T * std::log(target / f.r0());
    case RateKind::erfc:
      // erfc(z) spans (1e-300, 2) for z in (-27, 27).
      return bisect_offset(f, target, -27.0 * T, 27.0 * T);
    case RateKind::tabulated: {
      const auto x = f.table_x();
      return bisect_offset(f, target, -T * x.back(), -T * x.front());
    }
  }
  return 0.0;
}

}  // namespace

std::vector<double> calibrate(std::span<const RateFunction> fs, double target_rate) {
  require(positive_finite(target_rate), "calibrate: target rate must be positive");
  std::vector<double> offsets;
  offsets.reserve(fs.size());
  for (const auto& f : fs) offsets.push_back(calibrate_one(f, target_rate));
  return offsets;
}

std::vector<RateFunction> calibrated(std::span<const RateFunction> fs, double target_rate) {
  const auto offsets = calibrate(fs, target_rate);
  std::vector<RateFunction> out;
  out.reserve(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) out.push_back(fs[k].with_offset(offsets[k]));
  return out;
}

RateFunction temperature_schedule_apply(const RateFunction& f, double T_new) { return f.with_temperature(T_new); }

}  // namespace spad
