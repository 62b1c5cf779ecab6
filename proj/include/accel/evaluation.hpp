#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "accel/scenario.hpp"

namespace accel {

// --- stopping rule and results -----------------------------------------

struct StoppingRule {
  double alpha = 0.2;          // confidence complement
  double beta = 0.2;           // relative half-width target
  std::size_t cadence = 100;   // samples between CI checks
  std::size_t min_samples = 500;
  std::size_t max_samples = 100000000;
};

void validate(const StoppingRule& rule);

struct TracePoint {
  std::size_t n;
  double estimate;
  double rel_half_width;
};

struct EstimationResult {
  double p_hat = 0.0;
  std::vector<TracePoint> trace;
  std::size_t samples = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

// z_{alpha/2}: the (1 - alpha/2) standard normal quantile.
double z_quantile(double alpha);

// z * s / (sqrt(n) * p_hat); +inf when p_hat <= 0.
double relative_half_width(double p_hat, double sample_std, std::size_t n,
                           double alpha);

// Predicted crude-MC sample count to reach the rule: z^2 (1-p) / (beta^2 p).
double crude_sample_size(double p_hat, double alpha, double beta);

// --- generic sequential engine -----------------------------------------

// Streams weighted indicator terms term(i), checking the stopping rule at
// cadence boundaries. Per-index substreams make the result independent of
// the worker count; workers only parallelize within a batch.
EstimationResult estimate_stream(
    const std::function<double(std::size_t)>& term, const StoppingRule& rule,
    std::uint64_t seed, int workers = 1);

// --- scenario estimators ------------------------------------------------

// Per-variable accelerated sampling measures: one TTC^-1 distribution per
// segment plus the global R^-1 distribution. v_L always follows the
// original sampler.
struct AcceleratedModel {
  std::vector<AnyDistribution> ttc_inv;
  AnyDistribution r_inv;
};

// Accelerated model that reuses the original distributions unchanged
// (weights identically 1, traces match crude_mc on the same seed).
AcceleratedModel identity_acceleration(const ScenarioModel& model);

EstimationResult crude_mc(const ScenarioModel& model, const EgoConfig& ego,
                          const StoppingRule& rule, std::uint64_t seed,
                          int workers = 1);

EstimationResult is_estimate(const ScenarioModel& model,
                             const AcceleratedModel& accelerated,
                             const EgoConfig& ego, const StoppingRule& rule,
                             std::uint64_t seed, int workers = 1);

// --- cross-entropy tuning ----------------------------------------------

struct CEConfig {
  std::size_t batch = 1000;
  double elite_fraction = 0.1;
  double smoothing = 0.7;
  int max_iterations = 20;
  bool tune_piece_weights = true;
};

void validate(const CEConfig& config);

// Alternative base distributions to accelerate from (the single-IS
// harness tilts exponential fits instead of the model's own pieces).
struct AccelerationBases {
  std::vector<Distribution> ttc_inv;
  Distribution r_inv;
};

AccelerationBases own_bases(const ScenarioModel& model);
// Moment-matched single exponential bases, derived by sampling the model.
AccelerationBases single_exponential_bases(const ScenarioModel& model,
                                           std::uint64_t seed,
                                           std::size_t n = 100000);

// Multi-level CE over per-piece tilts (and optionally piece weights),
// scored jointly by simulated severity (minimum range; crash at <= 0).
AcceleratedModel cross_entropy_tune(const ScenarioModel& model,
                                    const EgoConfig& ego,
                                    const AccelerationBases& bases,
                                    const CEConfig& config,
                                    std::uint64_t seed);

AcceleratedModel cross_entropy_tune(const ScenarioModel& model,
                                    const EgoConfig& ego,
                                    const CEConfig& config,
                                    std::uint64_t seed);

// Scalar variant for analytic problems: tune a tilt of `base` for the
// tail event {x >= level}.
TiltedDistribution ce_tune_scalar(const Distribution& base, double level,
                                  const CEConfig& config, std::uint64_t seed);

// IS (or crude, with sampling == original) estimate of P(X >= level).
EstimationResult estimate_scalar_event(const Distribution& original,
                                       const AnyDistribution& sampling,
                                       double level, const StoppingRule& rule,
                                       std::uint64_t seed);

// --- comparison harness -------------------------------------------------

enum class Method { PiecewiseIS, SingleIS, Crude };
std::string method_name(Method m);

struct MethodSummary {
  Method method = Method::Crude;
  bool ok = false;
  std::string error;                 // set when the method failed
  double mean_samples = 0.0;         // mean N to convergence
  double mean_p = 0.0;               // mean of per-repeat estimates
  double ratio_to_piecewise = 0.0;   // mean_samples normalized
  std::vector<std::size_t> samples;  // per repeat
  std::vector<double> estimates;     // per repeat
  std::vector<TracePoint> trace;     // first repeat, for plotting
};

struct ComparisonReport {
  std::vector<MethodSummary> rows;
  int repeats = 0;
};

ComparisonReport compare_harness(const ScenarioModel& model,
                                 const EgoConfig& ego,
                                 const std::vector<Method>& methods,
                                 int repeats, const StoppingRule& rule,
                                 const CEConfig& ce, std::uint64_t seed,
                                 int workers = 1);

// --- serialization ------------------------------------------------------

nlohmann::json to_json(const EstimationResult& result);
nlohmann::json to_json(const ComparisonReport& report);
nlohmann::json to_json(const StoppingRule& rule);
StoppingRule stopping_rule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CEConfig& config);
CEConfig ce_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AcceleratedModel& model);
AcceleratedModel accelerated_model_from_json(const nlohmann::json& j);

// Flat trace CSV: header `n,estimate,rel_half_width`.
void write_trace_csv(const std::string& path,
                     const std::vector<TracePoint>& trace);

// Sub-seed derivation shared by the CLI so matched-seed runs line up.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace accel
