#include "spad/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace spad {

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: distributions differ in size");
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    if (!(q[k] > 0.0)) throw std::domain_error("kl_divergence: Q is zero where P is positive");
    kl += p[k] * std::log(p[k] / q[k]);
  }
  return kl;
}

double kl_divergence(const Distribution& p, const Distribution& q) { return kl_divergence(p.probs, q.probs); }

double kl_floor(std::size_t states, double samples) {
  return (static_cast<double>(states) - 1.0) / (2.0 * samples);
}

namespace {

template <typename Item, typename IndexOf, typename WeightOf>
std::vector<KlPoint> convergence(std::span<const Item> samples, std::size_t n_batches, const Distribution& q,
                                 IndexOf index_of, WeightOf weight_of) {
  if (n_batches < 1) throw std::invalid_argument("kl_convergence: need at least one batch");
  if (samples.empty()) throw std::invalid_argument("kl_convergence: no samples");
  EmpiricalDistribution acc(q.probs.size());
  std::vector<KlPoint> curve;
  curve.reserve(n_batches);
  const std::size_t n = samples.size();
  std::size_t next = 0;
  for (std::size_t b = 1; b <= n_batches; ++b) {
    const std::size_t end = n * b / n_batches;
    for (; next < end; ++next) acc.add(index_of(samples[next]), weight_of(samples[next]));
    if (acc.total() <= 0.0) continue;
    curve.push_back(KlPoint{end, kl_divergence(acc.normalized(), q)});
  }
  return curve;
}

}  // namespace

std::vector<KlPoint> kl_convergence(std::span<const Sample> samples, std::size_t n_batches, const Distribution& q) {
  return convergence(samples, n_batches, q, [](const Sample& s) { return s.index; },
                     [](const Sample& s) { return s.weight; });
}

std::vector<KlPoint> kl_convergence(std::span<const StateIndex> samples, std::size_t n_batches,
                                    const Distribution& q) {
  return convergence(samples, n_batches, q, [](StateIndex s) { return s; }, [](StateIndex) { return 1.0; });
}

double poisson_relative_error(double count) {
  if (!(count >= 1.0)) throw std::invalid_argument("poisson_relative_error: count must be at least 1");
  return 1.0 / std::sqrt(count);
}

EnergyTrace energy_trace(std::span<const Sample> samples, const Model& model) {
  EnergyTrace trace;
  trace.energies.reserve(samples.size());
  trace.running_mean.reserve(samples.size());
  double weighted = 0.0;
  double mass = 0.0;
  for (const auto& s : samples) {
    const double e = energy_at(model, s.index);
    trace.energies.push_back(e);
    weighted += e * s.weight;
    mass += s.weight;
    trace.running_mean.push_back(mass > 0.0 ? weighted / mass : e);
  }
  return trace;
}

double log_erfc(double z) {
  if (z < 20.0) return std::log(std::erfc(z));
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / (2.0 * z2) + 3.0 / (4.0 * z2 * z2) - 15.0 / (8.0 * z2 * z2 * z2);
  return -z2 - std::log(z * std::sqrt(std::numbers::pi)) + std::log(series);
}

// ---------------------------------------------------------------------------
// Least squares

namespace {

using ResidualFn = std::function<void(std::span<const double>, std::span<double>)>;

// Solves A x = b in place (A is n x n row-major) by Gaussian elimination with
// partial pivoting. Returns false when singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[pivot * n + c])) pivot = r;
    if (a[pivot * n + c] == 0.0 || !std::isfinite(a[pivot * n + c])) return false;
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[pivot * n + k]);
      std::swap(b[c], b[pivot]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    double v = b[c];
    for (std::size_t k = c + 1; k < n; ++k) v -= a[c * n + k] * b[k];
    b[c] = v / a[c * n + c];
  }
  return true;
}

double sum_squares(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

// Levenberg-Marquardt with a central-difference Jacobian. `valid` rejects
// parameter vectors outside the model's domain.
std::vector<double> levenberg_marquardt(const ResidualFn& residuals, std::vector<double> params, std::size_t m,
                                        const std::function<bool(std::span<const double>)>& valid) {
  const std::size_t n = params.size();
  std::vector<double> r(m), r_try(m), r_plus(m), r_minus(m), jac(m * n);
  residuals(params, r);
  double cost = sum_squares(r);
  double lambda = 1e-3;
  for (int iter = 0; iter < 500; ++iter) {
    for (std::size_t k = 0; k < n; ++k) {
      const double h = 1e-6 * std::max(std::abs(params[k]), 1e-3);
      std::vector<double> p = params;
      p[k] = params[k] + h;
      residuals(p, r_plus);
      p[k] = params[k] - h;
      residuals(p, r_minus);
      for (std::size_t i = 0; i < m; ++i) jac[i * n + k] = (r_plus[i] - r_minus[i]) / (2.0 * h);
    }
    std::vector<double> jtj(n * n, 0.0), jtr(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t a = 0; a < n; ++a) {
        jtr[a] += jac[i * n + a] * r[i];
        for (std::size_t b = 0; b < n; ++b) jtj[a * n + b] += jac[i * n + a] * jac[i * n + b];
      }

    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      std::vector<double> a = jtj;
      std::vector<double> delta(n);
      for (std::size_t k = 0; k < n; ++k) {
        a[k * n + k] += lambda * std::max(jtj[k * n + k], 1e-300);
        delta[k] = -jtr[k];
      }
      if (!solve_dense(a, delta, n)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = params[k] + delta[k];
      if (!valid(trial)) {
        lambda *= 10.0;
        continue;
      }
      residuals(trial, r_try);
      const double trial_cost = sum_squares(r_try);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double gain = cost - trial_cost;
        params = std::move(trial);
        std::swap(r, r_try);
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
        if (gain <= 1e-30 + 1e-15 * cost) return params;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return params;
}

double tanh_model(double b, double T, double offset) { return 0.5 * (1.0 + std::tanh((b - offset) / T)); }

}  // namespace

TanhFit fit_tanh(std::span<const CurvePoint> curve) {
  if (curve.size() < 5) throw std::invalid_argument("fit_tanh: need at least 5 points");
  const bool degenerate = std::all_of(curve.begin(), curve.end(), [&](const CurvePoint& p) { return p.y == curve[0].y; });
  const bool flat_x = std::all_of(curve.begin(), curve.end(), [&](const CurvePoint& p) { return p.x == curve[0].x; });
  if (degenerate || flat_x) throw std::domain_error("fit_tanh: degenerate data");

  // Start from a regression of atanh(2p - 1) = (b - offset) / T on interior points.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (const auto& p : curve) {
    if (p.y <= 0.02 || p.y >= 0.98) continue;
    const double z = std::atanh(2.0 * p.y - 1.0);
    sx += p.x;
    sy += z;
    sxx += p.x * p.x;
    sxy += p.x * z;
    ++used;
  }
  const auto [xmin, xmax] = std::minmax_element(curve.begin(), curve.end(),
                                                [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
  double T0 = (xmax->x - xmin->x) / 4.0;
  double offset0 = 0.5 * (xmax->x + xmin->x);
  if (used >= 2) {
    const double denom = used * sxx - sx * sx;
    const double slope = denom != 0.0 ? (used * sxy - sx * sy) / denom : 0.0;
    if (slope > 0.0) {
      const double intercept = (sy - slope * sx) / static_cast<double>(used);
      T0 = 1.0 / slope;
      offset0 = -intercept / slope;
    }
  }

  const ResidualFn residuals = [&](std::span<const double> q, std::span<double> r) {
    for (std::size_t k = 0; k < curve.size(); ++k) r[k] = tanh_model(curve[k].x, q[0], q[1]) - curve[k].y;
  };
  const auto params = levenberg_marquardt(residuals, {T0, offset0}, curve.size(),
                                          [](std::span<const double> q) { return q[0] > 0.0; });
  std::vector<double> r(curve.size());
  residuals(params, r);
  return TanhFit{params[0], params[1], std::sqrt(sum_squares(r) / static_cast<double>(curve.size()))};
}

RateFit fit_rate(std::span<const CurvePoint> curve, RateKind kind) {
  if (curve.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  for (const auto& p : curve)
    if (!(p.y > 0.0) || !std::isfinite(p.y) || !std::isfinite(p.x))
      throw std::domain_error("fit_rate: rates must be positive and finite");
  const std::size_t m = curve.size();
  std::vector<double> logs(m);
  for (std::size_t k = 0; k < m; ++k) logs[k] = std::log(curve[k].y);
  const double mean_log = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(m);
  double ss_tot = 0.0;
  for (double v : logs) ss_tot += (v - mean_log) * (v - mean_log);

  auto finish = [&](RateFit fit, std::span<const double> r) {
    const double ss_res = sum_squares(r);
    fit.residual = std::sqrt(ss_res / static_cast<double>(m));
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
  };

  if (kind == RateKind::exponential) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < m; ++k) {
      sx += curve[k].x;
      sy += logs[k];
      sxx += curve[k].x * curve[k].x;
      sxy += curve[k].x * logs[k];
    }
    const double n = static_cast<double>(m);
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::domain_error("fit_rate: energies are all equal");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    if (!(slope < 0.0)) throw std::domain_error("fit_rate: rate does not decrease with energy");
    std::vector<double> r(m);
    for (std::size_t k = 0; k < m; ++k) r[k] = intercept + slope * curve[k].x - logs[k];
    return finish(RateFit{RateKind::exponential, std::exp(intercept), -1.0 / slope, 0.0}, r);
  }
  if (kind != RateKind::erfc) throw std::invalid_argument("fit_rate: only exponential and erfc fits are supported");

  // ln r = ln r0 + ln erfc((E - offset) / T'); params (ln r0, offset, T').
  const ResidualFn residuals = [&](std::span<const double> q, std::span<double> r) {
    for (std::size_t k = 0; k < m; ++k) r[k] = q[0] + log_erfc((curve[k].x - q[1]) / q[2]) - logs[k];
  };
  // Coarse grid over (offset, T') with ln r0 profiled out.
  const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end(),
                                            [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
  const double span = std::max(hi->x - lo->x, 1e-12);
  std::vector<double> best{mean_log, lo->x, span};
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> r(m);
  for (int ti = 0; ti <= 40; ++ti) {
    const double Tp = span * std::pow(10.0, -2.0 + 4.0 * ti / 40.0);
    for (int oi = 0; oi <= 60; ++oi) {
      const double off = lo->x - 5.0 * span + 6.0 * span * oi / 60.0;
      double shift = 0.0;
      for (std::size_t k = 0; k < m; ++k) shift += logs[k] - log_erfc((curve[k].x - off) / Tp);
      shift /= static_cast<double>(m);
      const std::vector<double> q{shift, off, Tp};
      residuals(q, r);
      const double cost = sum_squares(r);
      if (cost < best_cost) {
        best_cost = cost;
        best = q;
      }
    }
  }
  const auto params =
      levenberg_marquardt(residuals, best, m, [](std::span<const double> q) { return q[2] > 0.0; });
  residuals(params, r);
  return finish(RateFit{RateKind::erfc, std::exp(params[0]), params[2], params[1]}, r);
}

// ---------------------------------------------------------------------------
// Goodness of fit

double ks_statistic_exponential(std::span<const double> data, double rate) {
  if (data.empty()) throw std::invalid_argument("ks_statistic: no data");
  if (!(rate > 0.0)) throw std::invalid_argument("ks_statistic: rate must be positive");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double cdf = -std::expm1(-rate * sorted[k]);
    d = std::max({d, (static_cast<double>(k) + 1.0) / n - cdf, cdf - static_cast<double>(k) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(std::size_t n, double alpha) {
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ks_pvalue(mid, n) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double chi_square_pvalue(double statistic, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

}  // namespace spad
