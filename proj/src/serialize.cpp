#include "accel/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace accel {

using nlohmann::json;

namespace {

json bound_to_json(double b) {
  if (std::isinf(b)) return nullptr;
  return b;
}

double bound_from_json(const json& j) {
  if (j.is_null()) return kInf;
  return j.get<double>();
}

json piece_to_json(const Piece& p) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoundedExponential>) {
          return {{"kind", "bounded_exponential"},
                  {"rate", d.rate},
                  {"lower", d.lower},
                  {"upper", bound_to_json(d.upper)}};
        } else if constexpr (std::is_same_v<T, BoundedNormal>) {
          return {{"kind", "bounded_normal"},
                  {"sigma", d.sigma},
                  {"lower", d.lower},
                  {"upper", bound_to_json(d.upper)}};
        } else {
          return {{"kind", "mixture_bounded_normal"},
                  {"weights", d.weights},
                  {"sigmas", d.sigmas},
                  {"lower", d.lower},
                  {"upper", bound_to_json(d.upper)}};
        }
      },
      p);
}

Piece piece_from_json(const json& j) {
  const std::string kind = j.at("kind");
  double lower = j.at("lower").get<double>();
  double upper = bound_from_json(j.at("upper"));
  if (kind == "bounded_exponential")
    return BoundedExponential{j.at("rate").get<double>(), lower, upper};
  if (kind == "bounded_normal")
    return BoundedNormal{j.at("sigma").get<double>(), lower, upper};
  if (kind == "mixture_bounded_normal")
    return MixtureBoundedNormal{j.at("weights").get<std::vector<double>>(),
                                j.at("sigmas").get<std::vector<double>>(),
                                lower, upper};
  throw std::invalid_argument("unknown piece kind: " + kind);
}

}  // namespace

json to_json(const Distribution& d) {
  return std::visit(
      [](const auto& dist) -> json {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Pareto>) {
          return {{"kind", "pareto"},
                  {"scale", dist.scale},
                  {"shape", dist.shape}};
        } else if constexpr (std::is_same_v<T, PiecewiseMixture>) {
          json pieces = json::array();
          for (const auto& p : dist.pieces) pieces.push_back(piece_to_json(p));
          return {{"kind", "piecewise"},
                  {"cuts", dist.cuts()},
                  {"weights", dist.weights},
                  {"pieces", pieces}};
        } else {
          return piece_to_json(Piece{dist});
        }
      },
      d);
}

json to_json(const TiltedDistribution& d) {
  json j = {{"kind", "tilted"},
            {"base", to_json(d.base)},
            {"thetas", d.thetas}};
  if (!d.piece_weights.empty()) j["piece_weights"] = d.piece_weights;
  return j;
}

json to_json(const AnyDistribution& d) {
  return std::visit([](const auto& v) { return to_json(v); }, d);
}

Distribution distribution_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "pareto")
    return Pareto{j.at("scale").get<double>(), j.at("shape").get<double>()};
  if (kind == "piecewise") {
    PiecewiseMixture pw;
    pw.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& pj : j.at("pieces"))
      pw.pieces.push_back(piece_from_json(pj));
    Distribution d{pw};
    validate(d);
    return d;
  }
  Piece p = piece_from_json(j);
  Distribution d = std::visit([](auto&& v) { return Distribution{v}; }, p);
  validate(d);
  return d;
}

TiltedDistribution tilted_from_json(const json& j) {
  if (j.at("kind") != "tilted")
    throw std::invalid_argument("expected tilted distribution document");
  std::vector<double> pw;
  if (j.contains("piece_weights"))
    pw = j.at("piece_weights").get<std::vector<double>>();
  return tilt(distribution_from_json(j.at("base")),
              j.at("thetas").get<std::vector<double>>(), pw);
}

AnyDistribution any_distribution_from_json(const json& j) {
  if (j.at("kind") == "tilted") return tilted_from_json(j);
  return distribution_from_json(j);
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return json::parse(in);
}

}  // namespace accel
