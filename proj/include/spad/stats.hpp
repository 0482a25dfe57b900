#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spad/distribution.hpp"
#include "spad/model.hpp"
#include "spad/ratefn.hpp"

namespace spad {

/// Kullback-Leibler divergence sum P ln(P/Q) in nats, with 0 ln 0 = 0.
/// Throws std::domain_error where P > 0 but Q == 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Distribution& p, const Distribution& q);

/// Expected plug-in KL of N independent draws over K states: (K - 1) / (2N).
double kl_floor(std::size_t states, double samples);

struct KlPoint {
  std::uint64_t samples = 0;  // cumulative sample count
  double kl = 0.0;
};

/// Cumulative KL after each of `n_batches` contiguous sub-batches.
std::vector<KlPoint> kl_convergence(std::span<const Sample> samples, std::size_t n_batches, const Distribution& q);
std::vector<KlPoint> kl_convergence(std::span<const StateIndex> samples, std::size_t n_batches, const Distribution& q);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

struct TanhFit {
  double T = 0.0;
  double offset = 0.0;
  double residual = 0.0;  // RMS probability error
};

/// Least squares on probability of p = (1 + tanh((b - offset) / T)) / 2.
/// For a bias-only neuron dE = -2b, so the fitted T is the model temperature.
TanhFit fit_tanh(std::span<const CurvePoint> curve);

struct RateFit {
  RateKind kind = RateKind::exponential;
  double r0 = 0.0;
  double T = 0.0;  // T for exponential, T' for erfc
  double offset = 0.0;
  double residual = 0.0;  // RMS error of ln(rate)
  double r_squared = 0.0;  // in ln(rate)
};

/// exponential: linear regression of ln(rate) on E (offset fixed at 0, since
/// it is degenerate with r0). erfc: nonlinear least squares in ln(rate).
/// Residuals share one metric so kinds can be compared directly.
RateFit fit_rate(std::span<const CurvePoint> curve, RateKind kind);

/// Relative standard error of a Poisson count: 1 / sqrt(count).
double poisson_relative_error(double count);

struct EnergyTrace {
  std::vector<double> energies;
  std::vector<double> running_mean;  // weighted by sample weight (dwell time)
};
EnergyTrace energy_trace(std::span<const Sample> samples, const Model& model);

/// ln(erfc(z)), finite for large z.
double log_erfc(double z);

/// One-sample Kolmogorov-Smirnov statistic of data against Exp(rate).
double ks_statistic_exponential(std::span<const double> data, double rate);
/// Asymptotic Kolmogorov p-value for statistic d at sample size n.
double ks_pvalue(double d, std::size_t n);
/// Critical value of the KS statistic at significance `alpha` (asymptotic).
double ks_critical_value(std::size_t n, double alpha);

/// Upper-tail probability of a chi-square statistic.
double chi_square_pvalue(double statistic, double dof);

}  // namespace spad
