// acceval: fit piecewise scenario models, generate synthetic encounter
// data, tune accelerated sampling measures, and run crude / importance-
// sampling crash-probability estimates.
//
// Exit codes: 0 success, 1 usage error, 2 input/config error,
// 3 non-convergence (estimator hit max_samples, or tuning stalled).

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "accel/evaluation.hpp"
#include "accel/fitting.hpp"
#include "accel/serialize.hpp"

using namespace accel;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNoConverge = 3;

// Thrown for non-convergence so main() can map it to its own exit code.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// --- config file as defaults -------------------------------------------
// --config <file> is read before CLI11 parsing; its values become the
// option defaults, so explicit flags always win. Options may live at the
// top level or nested under the subcommand name.

json g_config;

json config_block(const std::string& command) {
  json merged = json::object();
  for (auto& [k, v] : g_config.items())
    if (!v.is_object()) merged[k] = v;
  if (g_config.contains(command))
    for (auto& [k, v] : g_config.at(command).items()) merged[k] = v;
  return merged;
}

template <typename T>
void from_config(const json& block, const char* key, T& var) {
  if (block.contains(key)) var = block.at(key).get<T>();
}

// --- CSV ----------------------------------------------------------------

constexpr const char* kEventHeader = "v_l,r_l,ttc_l";

std::vector<LaneChangeEvent> read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kEventHeader)
    throw std::invalid_argument(path + ": expected header '" +
                                kEventHeader + "'");
  std::vector<LaneChangeEvent> events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    LaneChangeEvent ev;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> ev.v_l >> c1 >> ev.r_l >> c2 >> ev.ttc_l) || c1 != ',' ||
        c2 != ',' || !(ev.v_l > 0.0 && ev.r_l > 0.0 && ev.ttc_l > 0.0))
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": malformed event row");
    events.push_back(ev);
  }
  return events;
}

void write_events_csv(const std::string& path,
                      const std::vector<LaneChangeEvent>& events) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open " + path);
  out << kEventHeader << '\n' << std::setprecision(17);
  for (const auto& ev : events)
    out << ev.v_l << ',' << ev.r_l << ',' << ev.ttc_l << '\n';
}

// Single-column numeric CSV, optional "value" header.
std::vector<double> read_value_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line == "value")) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(line, &used));
      if (used != line.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": malformed value row");
    }
  }
  return values;
}

// --- shared option plumbing ---------------------------------------------

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  int workers = 1;

  std::uint64_t require_seed() const {
    if (!seed)
      throw std::invalid_argument(
          "a --seed is required (wall-clock seeding is not supported)");
    return *seed;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opt, const json& block) {
  if (block.contains("seed")) opt.seed = block.at("seed").get<std::uint64_t>();
  from_config(block, "workers", opt.workers);
  cmd->add_option("--seed", opt.seed, "master RNG seed (required)");
  cmd->add_option("--workers", opt.workers, "worker threads");
  // Already consumed by the pre-scan; accepted here so the flag may
  // follow the subcommand name.
  static std::string ignored;
  cmd->add_option("--config", ignored, "JSON file with option defaults");
}

ScenarioModel load_model(const std::string& preset,
                         const std::string& model_path) {
  if (!preset.empty() && !model_path.empty())
    throw std::invalid_argument("--preset and --model are exclusive");
  if (!preset.empty()) return synthetic_model(preset);
  if (model_path.empty())
    throw std::invalid_argument("need --preset or --model");
  return scenario_model_from_json(read_json_file(model_path));
}

EgoConfig load_ego(const std::string& path) {
  if (path.empty()) return EgoConfig{};
  return ego_config_from_json(read_json_file(path));
}

void rule_options(CLI::App* cmd, const json& block, StoppingRule& rule) {
  from_config(block, "alpha", rule.alpha);
  from_config(block, "beta", rule.beta);
  from_config(block, "cadence", rule.cadence);
  from_config(block, "min_samples", rule.min_samples);
  from_config(block, "max_samples", rule.max_samples);
  cmd->add_option("--alpha", rule.alpha, "confidence complement");
  cmd->add_option("--beta", rule.beta, "relative half-width target");
  cmd->add_option("--cadence", rule.cadence, "samples between CI checks");
  cmd->add_option("--min-samples", rule.min_samples);
  cmd->add_option("--max-samples", rule.max_samples);
}

void ce_options(CLI::App* cmd, const json& block, CEConfig& ce) {
  from_config(block, "batch", ce.batch);
  from_config(block, "elite_fraction", ce.elite_fraction);
  from_config(block, "smoothing", ce.smoothing);
  from_config(block, "ce_max_iterations", ce.max_iterations);
  from_config(block, "tune_piece_weights", ce.tune_piece_weights);
  cmd->add_option("--batch", ce.batch, "tuning batch size");
  cmd->add_option("--elite-fraction", ce.elite_fraction);
  cmd->add_option("--smoothing", ce.smoothing);
  cmd->add_option("--ce-max-iterations", ce.max_iterations);
  cmd->add_flag("--tune-piece-weights,!--no-tune-piece-weights",
                ce.tune_piece_weights);
}

// --- fit ----------------------------------------------------------------

json report_json(const FitReport& r) {
  return {{"log_likelihood", r.log_likelihood},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"piece_counts", r.piece_counts}};
}

// Piecewise TTC^-1 template: two-component normal-mixture body and
// exponential tails above the cut quantiles.
FitConfig ttc_fit_config(const std::vector<double>& quantiles,
                         std::uint64_t seed) {
  FitConfig cfg;
  cfg.cut_quantiles = quantiles;
  cfg.pieces.assign(quantiles.size() + 1, PieceSpec{});
  cfg.pieces.front() = {PieceFamily::MixtureNormal, 2};
  cfg.seed = seed;
  return cfg;
}

FitConfig r_fit_config(const std::vector<double>& quantiles,
                       std::uint64_t seed) {
  FitConfig cfg;
  cfg.cut_quantiles = quantiles;
  cfg.seed = seed;
  return cfg;
}

int cmd_fit(const std::string& events_path, const std::string& values_path,
            const std::string& out, const std::string& singles_out,
            const std::string& report_out,
            const std::vector<double>& quantiles, const CommonOptions& opt) {
  std::uint64_t seed = opt.require_seed();
  json report = {{"schema_version", kSchemaVersion},
                 {"generated_at", timestamp()}};
  auto t0 = std::chrono::steady_clock::now();

  if (!values_path.empty()) {
    // Single-variable mode: one piecewise fit plus single baselines.
    auto data = read_value_csv(values_path);
    if (data.empty())
      throw std::invalid_argument(values_path + ": no data rows");
    auto [pw, rep] = fit_piecewise(data, r_fit_config(quantiles, seed));
    write_json_file(out, to_json(Distribution{pw}));
    auto singles = fit_single_baselines(data);
    if (!singles_out.empty()) {
      write_json_file(singles_out,
                      json{{"schema_version", kSchemaVersion},
                           {"exponential",
                            to_json(Distribution{singles.exponential})},
                           {"pareto", to_json(Distribution{singles.pareto})}});
    }
    report["fit"] = report_json(rep);
  } else {
    auto events = read_events_csv(events_path);
    if (events.empty())
      throw std::invalid_argument(events_path + ": no data rows");
    ScenarioModel model, singles;
    for (const auto& ev : events) {
      model.v_l.values.push_back(ev.v_l);
    }
    model.v_l.kind = VelocitySampler::Kind::Empirical;
    singles.v_l = model.v_l;

    json seg_reports = json::array();
    for (std::size_t s = 0; s + 1 < model.segment_bounds.size(); ++s) {
      std::vector<double> ttc_inv;
      for (const auto& ev : events)
        if (model.segment_of(ev.v_l) == s) ttc_inv.push_back(1.0 / ev.ttc_l);
      auto [pw, rep] =
          fit_piecewise(ttc_inv, ttc_fit_config(quantiles, seed + s));
      model.ttc_inv.push_back(pw);
      singles.ttc_inv.push_back(fit_single_baselines(ttc_inv).exponential);
      seg_reports.push_back(report_json(rep));
    }
    std::vector<double> r_inv;
    for (const auto& ev : events) r_inv.push_back(1.0 / ev.r_l);
    auto [rpw, rrep] = fit_piecewise(r_inv, r_fit_config(quantiles, seed));
    model.r_inv = rpw;
    singles.r_inv = fit_single_baselines(r_inv).exponential;

    validate(model);
    write_json_file(out, to_json(model));
    if (!singles_out.empty()) write_json_file(singles_out, to_json(singles));
    report["ttc_inv"] = seg_reports;
    report["r_inv"] = report_json(rrep);
    report["rows"] = events.size();
  }

  report["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (!report_out.empty()) write_json_file(report_out, report);
  return 0;
}

// --- generate -----------------------------------------------------------

int cmd_generate(const std::string& preset, const std::string& model_path,
                 std::size_t n, const std::string& out,
                 std::string model_out, const CommonOptions& opt) {
  std::uint64_t seed = opt.require_seed();
  auto model = load_model(preset, model_path);
  if (model_out.empty()) model_out = out + ".model.json";
  if (n == 0)
    std::cerr << "warning: generating an empty event file\n";
  Rng rng = make_stream(sub_seed(seed, 0x47454E), 0);
  std::vector<LaneChangeEvent> events;
  events.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    events.push_back(sample_event(model, rng));
  write_events_csv(out, events);
  write_json_file(model_out, to_json(model));
  return 0;
}

// --- tune ---------------------------------------------------------------

int cmd_tune(const std::string& preset, const std::string& model_path,
             const std::string& ego_path, const std::string& bases,
             const std::string& out, const CEConfig& ce,
             const CommonOptions& opt) {
  std::uint64_t seed = opt.require_seed();
  auto model = load_model(preset, model_path);
  auto ego = load_ego(ego_path);
  AccelerationBases b;
  if (bases == "own") b = own_bases(model);
  else if (bases == "single-exp") b = single_exponential_bases(model, seed);
  else throw std::invalid_argument("--bases must be 'own' or 'single-exp'");
  AcceleratedModel accel;
  try {
    accel = cross_entropy_tune(model, ego, b, ce, seed);
  } catch (const std::runtime_error& e) {
    throw NoConvergence(e.what());
  }
  write_json_file(out, json{{"schema_version", kSchemaVersion},
                            {"generated_at", timestamp()},
                            {"accelerated", to_json(accel)}});
  return 0;
}

// --- evaluate -----------------------------------------------------------

int cmd_evaluate(const std::string& mode, const std::string& preset,
                 const std::string& model_path, const std::string& ego_path,
                 const std::string& accel_path, bool tune,
                 const std::string& out, const std::string& trace_path,
                 const StoppingRule& rule, const CEConfig& ce,
                 const CommonOptions& opt) {
  std::uint64_t seed = opt.require_seed();
  auto model = load_model(preset, model_path);
  auto ego = load_ego(ego_path);

  json doc = {{"schema_version", kSchemaVersion},
              {"generated_at", timestamp()},
              {"mode", mode}};
  EstimationResult res;
  if (mode == "crude") {
    res = crude_mc(model, ego, rule, seed, opt.workers);
  } else if (mode == "is") {
    AcceleratedModel accel;
    if (!accel_path.empty()) {
      auto j = read_json_file(accel_path);
      accel = accelerated_model_from_json(
          j.contains("accelerated") ? j.at("accelerated") : j);
    } else if (tune) {
      try {
        accel = cross_entropy_tune(model, ego, ce, seed);
      } catch (const std::runtime_error& e) {
        throw NoConvergence(e.what());
      }
    } else {
      accel = identity_acceleration(model);
    }
    doc["accelerated"] = to_json(accel);
    res = is_estimate(model, accel, ego, rule, seed, opt.workers);
  } else {
    throw std::invalid_argument("--mode must be 'crude' or 'is'");
  }
  doc["result"] = to_json(res);
  if (!out.empty()) write_json_file(out, doc);
  if (!trace_path.empty()) write_trace_csv(trace_path, res.trace);
  if (!res.converged)
    throw NoConvergence("estimate did not converge within " +
                        std::to_string(rule.max_samples) + " samples");
  std::cout << std::setprecision(17) << res.p_hat << '\n';
  return 0;
}

// --- compare ------------------------------------------------------------

int cmd_compare(const std::string& preset, const std::string& model_path,
                const std::string& ego_path,
                const std::vector<std::string>& method_names, int repeats,
                const std::string& out, const std::string& trace_prefix,
                const StoppingRule& rule, const CEConfig& ce,
                const CommonOptions& opt) {
  std::uint64_t seed = opt.require_seed();
  auto model = load_model(preset, model_path);
  auto ego = load_ego(ego_path);
  std::vector<Method> methods;
  for (const auto& name : method_names) {
    if (name == "piecewise-is") methods.push_back(Method::PiecewiseIS);
    else if (name == "single-is") methods.push_back(Method::SingleIS);
    else if (name == "crude") methods.push_back(Method::Crude);
    else throw std::invalid_argument("unknown method: " + name);
  }
  auto report = compare_harness(model, ego, methods, repeats, rule, ce,
                                seed, opt.workers);
  json doc = to_json(report);
  doc["generated_at"] = timestamp();
  if (!out.empty()) write_json_file(out, doc);
  bool any_ok = false;
  for (const auto& row : report.rows) {
    any_ok = any_ok || row.ok;
    if (!row.ok) {
      std::cerr << method_name(row.method) << ": " << row.error << '\n';
      continue;
    }
    if (!trace_prefix.empty())
      write_trace_csv(trace_prefix + method_name(row.method) + ".csv",
                      row.trace);
    std::printf("%-12s  mean_n %12.0f  p_hat %.6g  ratio %.3g\n",
                method_name(row.method).c_str(), row.mean_samples,
                row.mean_p, row.ratio_to_piecewise);
  }
  if (!any_ok) throw NoConvergence("all comparison methods failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Accelerated crash-probability evaluation for lane-change cut-in "
      "scenarios: piecewise-mixture model fitting, importance sampling "
      "and cross-entropy tuning."};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON file with option defaults (flags win)")
      ->expected(1);

  // Pre-scan for --config so its values can seed the option defaults.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  try {
    if (!config_path.empty()) g_config = read_json_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  // fit
  auto* fit = app.add_subcommand("fit", "fit models from CSV data");
  json fit_cfg = config_block("fit");
  static std::string fit_events, fit_values, fit_out = "model.json";
  static std::string fit_singles, fit_report;
  static std::vector<double> fit_quantiles = {0.80, 0.99};
  static CommonOptions fit_common;
  from_config(fit_cfg, "events", fit_events);
  from_config(fit_cfg, "values", fit_values);
  from_config(fit_cfg, "out", fit_out);
  from_config(fit_cfg, "singles_out", fit_singles);
  from_config(fit_cfg, "report_out", fit_report);
  from_config(fit_cfg, "cut_quantiles", fit_quantiles);
  fit->add_option("--events", fit_events, "event CSV (v_l,r_l,ttc_l)");
  fit->add_option("--values", fit_values, "single-column CSV");
  fit->add_option("--out", fit_out, "fitted model JSON");
  fit->add_option("--singles-out", fit_singles, "single-baseline JSON");
  fit->add_option("--report-out", fit_report, "fit report JSON");
  fit->add_option("--cut-quantiles", fit_quantiles, "interior cut quantiles");
  add_common(fit, fit_common, fit_cfg);

  // generate
  auto* gen = app.add_subcommand("generate", "sample a synthetic event CSV");
  json gen_cfg = config_block("generate");
  static std::string gen_preset, gen_model, gen_out = "events.csv";
  static std::string gen_model_out;
  static std::size_t gen_n = 0;
  static CommonOptions gen_common;
  from_config(gen_cfg, "preset", gen_preset);
  from_config(gen_cfg, "model", gen_model);
  from_config(gen_cfg, "out", gen_out);
  from_config(gen_cfg, "model_out", gen_model_out);
  from_config(gen_cfg, "n", gen_n);
  gen->add_option("--preset", gen_preset, "desk-rare | desk-common");
  gen->add_option("--model", gen_model, "ground-truth model JSON");
  gen->add_option("--out", gen_out, "event CSV path");
  gen->add_option("--model-out", gen_model_out,
                  "ground-truth copy (default <out>.model.json)");
  gen->add_option("--n", gen_n, "number of events");
  add_common(gen, gen_common, gen_cfg);

  // tune
  auto* tune = app.add_subcommand("tune", "cross-entropy acceleration tuning");
  json tune_cfg = config_block("tune");
  static std::string tune_preset, tune_model, tune_ego;
  static std::string tune_bases = "own", tune_out = "accelerated.json";
  static CommonOptions tune_common;
  from_config(tune_cfg, "preset", tune_preset);
  from_config(tune_cfg, "model", tune_model);
  from_config(tune_cfg, "ego", tune_ego);
  from_config(tune_cfg, "bases", tune_bases);
  from_config(tune_cfg, "out", tune_out);
  tune->add_option("--preset", tune_preset);
  tune->add_option("--model", tune_model, "scenario model JSON");
  tune->add_option("--ego", tune_ego, "ego config JSON");
  tune->add_option("--bases", tune_bases, "own | single-exp");
  tune->add_option("--out", tune_out, "accelerated model JSON");
  static CEConfig tune_ce;
  ce_options(tune, tune_cfg, tune_ce);
  add_common(tune, tune_common, tune_cfg);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "estimate crash probability");
  json eval_cfg = config_block("evaluate");
  static std::string eval_mode = "is", eval_preset, eval_model, eval_ego;
  static std::string eval_accel, eval_out = "result.json", eval_trace;
  static bool eval_tune = false;
  static CommonOptions eval_common;
  from_config(eval_cfg, "mode", eval_mode);
  from_config(eval_cfg, "preset", eval_preset);
  from_config(eval_cfg, "model", eval_model);
  from_config(eval_cfg, "ego", eval_ego);
  from_config(eval_cfg, "accel", eval_accel);
  from_config(eval_cfg, "out", eval_out);
  from_config(eval_cfg, "trace", eval_trace);
  from_config(eval_cfg, "tune", eval_tune);
  eval->add_option("--mode", eval_mode, "crude | is");
  eval->add_option("--preset", eval_preset);
  eval->add_option("--model", eval_model, "scenario model JSON");
  eval->add_option("--ego", eval_ego, "ego config JSON");
  eval->add_option("--accel", eval_accel,
                   "accelerated model JSON (is mode; default identity)");
  eval->add_flag("--tune", eval_tune, "run cross-entropy tuning first");
  eval->add_option("--out", eval_out, "result JSON");
  eval->add_option("--trace", eval_trace, "convergence trace CSV");
  static StoppingRule eval_rule;
  static CEConfig eval_ce;
  rule_options(eval, eval_cfg, eval_rule);
  ce_options(eval, eval_cfg, eval_ce);
  add_common(eval, eval_common, eval_cfg);

  // compare
  auto* cmp = app.add_subcommand("compare",
                                 "benchmark sampling strategies side by side");
  json cmp_cfg = config_block("compare");
  static std::string cmp_preset, cmp_model, cmp_ego;
  static std::string cmp_out = "comparison.json", cmp_trace_prefix;
  static std::vector<std::string> cmp_methods = {"piecewise-is", "single-is",
                                                 "crude"};
  static int cmp_repeats = 10;
  static CommonOptions cmp_common;
  from_config(cmp_cfg, "preset", cmp_preset);
  from_config(cmp_cfg, "model", cmp_model);
  from_config(cmp_cfg, "ego", cmp_ego);
  from_config(cmp_cfg, "out", cmp_out);
  from_config(cmp_cfg, "trace_prefix", cmp_trace_prefix);
  from_config(cmp_cfg, "methods", cmp_methods);
  from_config(cmp_cfg, "repeats", cmp_repeats);
  cmp->add_option("--preset", cmp_preset);
  cmp->add_option("--model", cmp_model, "scenario model JSON");
  cmp->add_option("--ego", cmp_ego, "ego config JSON");
  cmp->add_option("--methods", cmp_methods,
                  "subset of piecewise-is single-is crude");
  cmp->add_option("--repeats", cmp_repeats);
  cmp->add_option("--out", cmp_out, "comparison report JSON");
  cmp->add_option("--trace-prefix", cmp_trace_prefix,
                  "write <prefix><method>.csv traces");
  static StoppingRule cmp_rule;
  static CEConfig cmp_ce;
  rule_options(cmp, cmp_cfg, cmp_rule);
  ce_options(cmp, cmp_cfg, cmp_ce);
  add_common(cmp, cmp_common, cmp_cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed())
      return cmd_fit(fit_events, fit_values, fit_out, fit_singles,
                     fit_report, fit_quantiles, fit_common);
    if (gen->parsed())
      return cmd_generate(gen_preset, gen_model, gen_n, gen_out,
                          gen_model_out, gen_common);
    if (tune->parsed())
      return cmd_tune(tune_preset, tune_model, tune_ego, tune_bases,
                      tune_out, tune_ce, tune_common);
    if (eval->parsed())
      return cmd_evaluate(eval_mode, eval_preset, eval_model, eval_ego,
                          eval_accel, eval_tune, eval_out, eval_trace,
                          eval_rule, eval_ce, eval_common);
    if (cmp->parsed())
      return cmd_compare(cmp_preset, cmp_model, cmp_ego, cmp_methods,
                         cmp_repeats, cmp_out, cmp_trace_prefix, cmp_rule,
                         cmp_ce, cmp_common);
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConverge;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
