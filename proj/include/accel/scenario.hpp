#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "accel/distributions.hpp"

namespace accel {

// One cut-in record. range_rate() is negative while closing.
struct LaneChangeEvent {
  double v_l = 0.0;    // lead speed, m/s
  double r_l = 0.0;    // initial range, m
  double ttc_l = 0.0;  // time to collision, s (may be +inf: no closure)

  double range_rate() const { return -r_l / ttc_l; }
};

// Lead-speed sampler: uniform interval or empirical resampling.
struct VelocitySampler {
  enum class Kind { Uniform, Empirical };
  Kind kind = Kind::Uniform;
  double lower = 5.0;
  double upper = 35.0;
  std::vector<double> values;  // Empirical only

  double sample(Rng& rng) const;
};

// Segmented statistical model of the encounter: v_L picks a segment,
// the segment picks the TTC^-1 model; R^-1 is global and independent.
struct ScenarioModel {
  VelocitySampler v_l;
  std::vector<double> segment_bounds = {5.0, 15.0, 25.0, 35.0};
  std::vector<Distribution> ttc_inv;  // one per segment
  Distribution r_inv;

  std::size_t segment_of(double v) const;
};

void validate(const ScenarioModel& model);

// Ego vehicle: constant-time-headway ACC with comfort-limited
// acceleration, overridden by full AEB braking below a TTC threshold;
// commands take effect after an actuator delay.
struct EgoConfig {
  double headway = 1.5;        // s
  double acc_gain_range = 0.2; // 1/s^2, on the range error
  double acc_gain_rate = 0.6;  // 1/s, on the range rate
  double aeb_ttc = 1.5;        // s
  double max_brake = 8.0;      // m/s^2, AEB deceleration
  double comfort_brake = 4.0;  // m/s^2, ACC deceleration limit
  double max_accel = 2.0;      // m/s^2, ACC acceleration limit
  double delay = 0.1;          // s, actuator delay
  double step = 0.01;          // s
  double horizon = 15.0;       // s
};

void validate(const EgoConfig& ego);

struct TracePoint3 {
  double t;
  double range;
  double ego_speed;
};

struct SimResult {
  bool crashed = false;
  double min_range = 0.0;
  std::vector<TracePoint3> trace;  // only filled when requested
};

LaneChangeEvent sample_event(const ScenarioModel& model, Rng& rng);

SimResult simulate(const LaneChangeEvent& event, const EgoConfig& ego,
                   bool with_trace = false);

inline int indicator(const LaneChangeEvent& event, const EgoConfig& ego) {
  return simulate(event, ego).crashed ? 1 : 0;
}

// Fully specified ground-truth models for synthetic experiments. Known
// presets: "desk-rare" (crash probability of order 1e-5 to 1e-4 under the
// default EgoConfig) and "desk-common" (crash probability of order 0.3).
// Deterministic: the seed only tags the model, presets are fixed.
ScenarioModel synthetic_model(const std::string& preset,
                              std::uint64_t seed = 0);

// --- serialization ------------------------------------------------------

nlohmann::json to_json(const ScenarioModel& model);
ScenarioModel scenario_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EgoConfig& ego);
EgoConfig ego_config_from_json(const nlohmann::json& j);

}  // namespace accel
