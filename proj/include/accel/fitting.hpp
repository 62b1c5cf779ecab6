#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "accel/distributions.hpp"

namespace accel {

enum class PieceFamily { Exponential, Normal, MixtureNormal };

struct PieceSpec {
  PieceFamily family = PieceFamily::Exponential;
  int components = 1;  // MixtureNormal only
};

struct FitConfig {
  // Explicit interior cut points win over the quantile rule.
  std::vector<double> cuts;
  std::vector<double> cut_quantiles = {0.80, 0.99};
  // One entry per piece; empty means all-exponential pieces.
  std::vector<PieceSpec> pieces;
  double ll_tol = 1e-8;
  int max_iterations = 500;
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct FitReport {
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<std::size_t> piece_counts;  // |S_i|
};

// pi_i = |S_i| / n with S_i = { j : gamma_{i-1} <= X_j < gamma_i }.
std::vector<double> fit_piece_weights(const std::vector<double>& data,
                                      const std::vector<double>& cuts);

// 1-D MLE for the truncated families. Data must lie in [lo, hi).
double fit_bounded_exponential(const std::vector<double>& data, double lo,
                               double hi);
double fit_bounded_normal(const std::vector<double>& data, double lo,
                          double hi);

// Log-likelihoods of the fitted objectives (also used by the
// stationarity tests).
double bounded_exp_loglik(const std::vector<double>& data, double lo,
                          double hi, double rate);
double bounded_normal_loglik(const std::vector<double>& data, double lo,
                             double hi, double sigma);
double mixture_loglik(const std::vector<double>& data,
                      const MixtureBoundedNormal& mix);

struct MixtureFit {
  std::vector<double> weights;
  std::vector<double> sigmas;
  FitReport report;
  std::vector<double> ll_trace;  // per-iteration log-likelihood, best restart
};

MixtureFit fit_mixture_em(const std::vector<double>& data, double lo,
                          double hi, int components, const FitConfig& config);

// End-to-end piecewise pipeline: cut selection, weights, per-piece MLE.
std::pair<PiecewiseMixture, FitReport> fit_piecewise(std::vector<double> data,
                                                     const FitConfig& config);

struct SingleBaselines {
  BoundedExponential exponential;
  Pareto pareto;
};

SingleBaselines fit_single_baselines(const std::vector<double>& data);

}  // namespace accel
