#pragma once

#include <string>

#include <json.hpp>

#include "accel/distributions.hpp"

namespace accel {

inline constexpr int kSchemaVersion = 1;

// Distribution documents look like
//   {"kind":"bounded_exponential","rate":..,"lower":..,"upper":..}
//   {"kind":"bounded_normal","sigma":..,"lower":..,"upper":..}
//   {"kind":"mixture_bounded_normal","weights":[..],"sigmas":[..],...}
//   {"kind":"pareto","scale":..,"shape":..}
//   {"kind":"piecewise","cuts":[..],"weights":[..],"pieces":[{..},..]}
//   {"kind":"tilted","base":{..},"thetas":[..],"piece_weights":[..]}
// An infinite upper bound serializes as null. Round trips are value-exact.

nlohmann::json to_json(const Distribution& d);
nlohmann::json to_json(const TiltedDistribution& d);
nlohmann::json to_json(const AnyDistribution& d);

Distribution distribution_from_json(const nlohmann::json& j);
TiltedDistribution tilted_from_json(const nlohmann::json& j);
AnyDistribution any_distribution_from_json(const nlohmann::json& j);

// File helpers (UTF-8, pretty-printed, trailing newline).
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace accel
