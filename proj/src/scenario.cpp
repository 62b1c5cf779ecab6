#include "accel/scenario.hpp"

#include "accel/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace accel {

using nlohmann::json;

double VelocitySampler::sample(Rng& rng) const {
  if (kind == Kind::Uniform) return lower + (upper - lower) * u01(rng);
  if (values.empty())
    throw std::logic_error("empirical velocity sampler has no values");
  auto i = static_cast<std::size_t>(u01(rng) *
                                    static_cast<double>(values.size()));
  return values[std::min(i, values.size() - 1)];
}

std::size_t ScenarioModel::segment_of(double v) const {
  // Clamp outside values into the boundary segments.
  for (std::size_t i = 1; i + 1 < segment_bounds.size(); ++i)
    if (v < segment_bounds[i]) return i - 1;
  return segment_bounds.size() - 2;
}

void validate(const ScenarioModel& model) {
  if (model.segment_bounds.size() < 2)
    throw std::invalid_argument("scenario: need at least one segment");
  if (model.ttc_inv.size() + 1 != model.segment_bounds.size())
    throw std::invalid_argument(
        "scenario: one TTC^-1 distribution per segment required");
  for (const auto& d : model.ttc_inv) validate(d);
  validate(model.r_inv);
  double lo = model.v_l.kind == VelocitySampler::Kind::Uniform
                  ? model.v_l.lower
                  : *std::min_element(model.v_l.values.begin(),
                                      model.v_l.values.end());
  double hi = model.v_l.kind == VelocitySampler::Kind::Uniform
                  ? model.v_l.upper
                  : *std::max_element(model.v_l.values.begin(),
                                      model.v_l.values.end());
  if (lo < model.segment_bounds.front() || hi > model.segment_bounds.back())
    throw std::invalid_argument(
        "scenario: segment bounds do not cover the v_L support");
}

void validate(const EgoConfig& e) {
  auto pos = [](double v) { return v > 0.0; };
  if (!(pos(e.headway) && pos(e.acc_gain_range) && pos(e.acc_gain_rate) &&
        pos(e.aeb_ttc) && pos(e.max_brake) && pos(e.comfort_brake) &&
        pos(e.max_accel) && pos(e.delay) && pos(e.step) && pos(e.horizon)))
    throw std::invalid_argument("ego config: all parameters must be positive");
  if (e.step > 0.1) throw std::invalid_argument("ego config: step > 0.1 s");
  if (e.horizon < 5.0)
    throw std::invalid_argument("ego config: horizon < 5 s");
}

LaneChangeEvent sample_event(const ScenarioModel& model, Rng& rng) {
  LaneChangeEvent ev;
  ev.v_l = model.v_l.sample(rng);
  std::size_t seg = model.segment_of(ev.v_l);
  double ttc_inv = sample(model.ttc_inv[seg], rng);
  double r_inv = sample(model.r_inv, rng);
  ev.ttc_l = 1.0 / ttc_inv;
  ev.r_l = 1.0 / r_inv;
  return ev;
}

SimResult simulate(const LaneChangeEvent& event, const EgoConfig& ego,
                   bool with_trace) {
  const double dt = ego.step;
  const double v_lead = event.v_l;
  double range = event.r_l;
  double v_ego = std::isinf(event.ttc_l)
                     ? v_lead
                     : v_lead + event.r_l / event.ttc_l;

  SimResult res;
  res.min_range = range;

  // Actuator delay: commands take effect delay/dt steps later; no
  // action until the first command propagates.
  const std::size_t delay_steps =
      static_cast<std::size_t>(std::lround(ego.delay / dt));
  std::vector<double> pipeline(delay_steps + 1, 0.0);
  std::size_t head = 0;

  const auto steps = static_cast<std::size_t>(std::lround(ego.horizon / dt));
  for (std::size_t k = 0; k < steps; ++k) {
    double rate = v_lead - v_ego;
    if (rate >= 0.0) break;  // closure resolved, no event

    // ACC: constant-time-headway tracking, comfort-limited.
    double cmd = ego.acc_gain_range * (range - ego.headway * v_ego) +
                 ego.acc_gain_rate * rate;
    cmd = std::clamp(cmd, -ego.comfort_brake, ego.max_accel);
    // AEB: full braking when the instantaneous TTC drops below threshold.
    if (range / -rate < ego.aeb_ttc) cmd = -ego.max_brake;

    pipeline[head] = cmd;
    head = (head + 1) % pipeline.size();
    double applied = pipeline[head];  // issued delay_steps ago

    v_ego = std::max(0.0, v_ego + applied * dt);
    range += (v_lead - v_ego) * dt;
    res.min_range = std::min(res.min_range, range);
    if (with_trace)
      res.trace.push_back({static_cast<double>(k + 1) * dt, range, v_ego});
    if (range <= 0.0) {
      res.crashed = true;
      break;
    }
  }
  return res;
}

// --- synthetic presets --------------------------------------------------

namespace {

// Piecewise TTC^-1 model: two-normal body plus exponential tail.
Distribution ttc_inv_piece(double cut, double tail_weight, double tail_rate,
                           double s1, double s2) {
  PiecewiseMixture pw;
  pw.weights = {1.0 - tail_weight, tail_weight};
  pw.pieces = {MixtureBoundedNormal{{0.5, 0.5}, {s1, s2}, 0.0, cut},
               BoundedExponential{tail_rate, cut, kInf}};
  return pw;
}

// Piecewise R^-1 model: three bounded exponential pieces above a
// zero-mass stub, so the maximum cut-in range is 1/c0.
Distribution r_inv_model(double c0, double c1, double c2,
                         std::vector<double> w, std::vector<double> rates) {
  PiecewiseMixture pw;
  pw.weights = {0.0, w[0], w[1], w[2]};
  pw.pieces = {BoundedExponential{1.0, 0.0, c0},
               BoundedExponential{rates[0], c0, c1},
               BoundedExponential{rates[1], c1, c2},
               BoundedExponential{rates[2], c2, kInf}};
  return pw;
}

}  // namespace

ScenarioModel synthetic_model(const std::string& preset, std::uint64_t) {
  ScenarioModel m;
  m.v_l.kind = VelocitySampler::Kind::Uniform;
  m.v_l.lower = 5.0;
  m.v_l.upper = 35.0;
  if (preset == "desk-rare") {
    m.ttc_inv = {ttc_inv_piece(0.35, 0.015, 16.0, 0.06, 0.13),
                 ttc_inv_piece(0.35, 0.012, 17.0, 0.06, 0.12),
                 ttc_inv_piece(0.35, 0.010, 18.0, 0.05, 0.11)};
    m.r_inv = r_inv_model(0.02, 0.05, 0.12, {0.55, 0.40, 0.05},
                          {30.0, 25.0, 30.0});
  } else if (preset == "desk-common") {
    // Frequent crashes: heavy TTC^-1 tails and short ranges.
    m.ttc_inv = {ttc_inv_piece(0.4, 0.5, 2.0, 0.12, 0.25),
                 ttc_inv_piece(0.4, 0.5, 2.0, 0.12, 0.25),
                 ttc_inv_piece(0.4, 0.5, 2.0, 0.12, 0.25)};
    m.r_inv = r_inv_model(1.0 / 150.0, 0.05, 0.10, {0.30, 0.30, 0.40},
                          {10.0, 10.0, 8.0});
  } else {
    throw std::invalid_argument("unknown synthetic preset: " + preset);
  }
  validate(m);
  return m;
}

// --- serialization ------------------------------------------------------

namespace {

json sampler_to_json(const VelocitySampler& s) {
  if (s.kind == VelocitySampler::Kind::Uniform)
    return {{"kind", "uniform"}, {"lower", s.lower}, {"upper", s.upper}};
  return {{"kind", "empirical"}, {"values", s.values}};
}

VelocitySampler sampler_from_json(const json& j) {
  VelocitySampler s;
  if (j.at("kind") == "uniform") {
    s.kind = VelocitySampler::Kind::Uniform;
    s.lower = j.at("lower").get<double>();
    s.upper = j.at("upper").get<double>();
  } else if (j.at("kind") == "empirical") {
    s.kind = VelocitySampler::Kind::Empirical;
    s.values = j.at("values").get<std::vector<double>>();
  } else {
    throw std::invalid_argument("unknown velocity sampler kind");
  }
  return s;
}

}  // namespace

json to_json(const ScenarioModel& m) {
  json ttc = json::array();
  for (const auto& d : m.ttc_inv) ttc.push_back(to_json(d));
  return {{"schema_version", 1},
          {"v_l_sampler", sampler_to_json(m.v_l)},
          {"segment_bounds", m.segment_bounds},
          {"ttc_inv", ttc},
          {"r_inv", to_json(m.r_inv)}};
}

ScenarioModel scenario_model_from_json(const json& j) {
  ScenarioModel m;
  m.v_l = sampler_from_json(j.at("v_l_sampler"));
  m.segment_bounds = j.at("segment_bounds").get<std::vector<double>>();
  for (const auto& dj : j.at("ttc_inv"))
    m.ttc_inv.push_back(distribution_from_json(dj));
  m.r_inv = distribution_from_json(j.at("r_inv"));
  validate(m);
  return m;
}

json to_json(const EgoConfig& e) {
  return {{"schema_version", 1},
          {"headway", e.headway},
          {"acc_gain_range", e.acc_gain_range},
          {"acc_gain_rate", e.acc_gain_rate},
          {"aeb_ttc", e.aeb_ttc},
          {"max_brake", e.max_brake},
          {"comfort_brake", e.comfort_brake},
          {"max_accel", e.max_accel},
          {"delay", e.delay},
          {"step", e.step},
          {"horizon", e.horizon}};
}

EgoConfig ego_config_from_json(const json& j) {
  EgoConfig e;
  auto get = [&](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  get("headway", e.headway);
  get("acc_gain_range", e.acc_gain_range);
  get("acc_gain_rate", e.acc_gain_rate);
  get("aeb_ttc", e.aeb_ttc);
  get("max_brake", e.max_brake);
  get("comfort_brake", e.comfort_brake);
  get("max_accel", e.max_accel);
  get("delay", e.delay);
  get("step", e.step);
  get("horizon", e.horizon);
  validate(e);
  return e;
}

}  // namespace accel
