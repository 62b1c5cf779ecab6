#include "accel/evaluation.hpp"

#include "accel/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace accel {

using nlohmann::json;

namespace {

// Fixed tags keep the CLI, the tuner and the estimators on disjoint
// random streams even when the user passes the same master seed.
constexpr std::uint64_t kEstimateTag = 0x45535449;  // estimation streams
constexpr std::uint64_t kTuneTag = 0x43455455;      // cross-entropy batches
constexpr std::uint64_t kFitTag = 0x46495453;       // base-fitting samples
constexpr int kCeAttempts = 3;  // fresh-stream retries before giving up
constexpr int kCeRefine = 4;    // extra crash-conditioned polish iterations
constexpr std::uint64_t kRepeatTag = 0x52455045;    // harness repeats

}  // namespace

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed + tag * 0x9E3779B97F4A7C15ULL);
}

void validate(const StoppingRule& rule) {
  if (!(rule.alpha > 0.0 && rule.alpha < 1.0))
    throw std::invalid_argument("stopping rule: alpha must be in (0,1)");
  if (!(rule.beta > 0.0 && rule.beta < 1.0))
    throw std::invalid_argument("stopping rule: beta must be in (0,1)");
  if (rule.cadence == 0)
    throw std::invalid_argument("stopping rule: cadence must be positive");
  if (rule.max_samples < rule.min_samples)
    throw std::invalid_argument("stopping rule: max_samples < min_samples");
}

void validate(const CEConfig& config) {
  if (config.batch < 10)
    throw std::invalid_argument("cross-entropy: batch must be at least 10");
  if (!(config.elite_fraction > 0.0 && config.elite_fraction < 1.0))
    throw std::invalid_argument(
        "cross-entropy: elite fraction must be in (0,1)");
  if (!(config.smoothing > 0.0 && config.smoothing <= 1.0))
    throw std::invalid_argument("cross-entropy: smoothing must be in (0,1]");
  if (config.max_iterations < 1)
    throw std::invalid_argument("cross-entropy: max_iterations must be >= 1");
}

double z_quantile(double alpha) { return normal_icdf(1.0 - alpha / 2.0); }

double relative_half_width(double p_hat, double sample_std, std::size_t n,
                           double alpha) {
  if (n == 0 || !(p_hat > 0.0)) return kInf;
  return z_quantile(alpha) * sample_std /
         (std::sqrt(static_cast<double>(n)) * p_hat);
}

double crude_sample_size(double p_hat, double alpha, double beta) {
  if (!(p_hat > 0.0 && p_hat < 1.0))
    throw std::invalid_argument("sample-size predictor needs p in (0,1)");
  double z = z_quantile(alpha);
  return z * z * (1.0 - p_hat) / (beta * beta * p_hat);
}

// --- generic sequential engine -----------------------------------------

EstimationResult estimate_stream(
    const std::function<double(std::size_t)>& term, const StoppingRule& rule,
    std::uint64_t seed, int workers) {
  validate(rule);
  if (workers < 1) workers = 1;
  auto t0 = std::chrono::steady_clock::now();

  EstimationResult res;
  res.seed = seed;
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  std::vector<double> batch(rule.cadence);

  while (n < rule.max_samples) {
    std::size_t count = std::min<std::size_t>(rule.cadence,
                                              rule.max_samples - n);
    if (workers == 1) {
      for (std::size_t i = 0; i < count; ++i) batch[i] = term(n + i);
    } else {
      // Workers fill disjoint slices; the reduction below stays in index
      // order so the result is identical for any worker count.
      std::vector<std::thread> pool;
      std::size_t chunk = (count + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
          for (std::size_t i = lo; i < hi; ++i) batch[i] = term(n + i);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < count; ++i) {
      sum += batch[i];
      sumsq += batch[i] * batch[i];
    }
    n += count;

    double mean = sum / static_cast<double>(n);
    double var = n > 1 ? std::max(0.0, (sumsq - sum * mean) /
                                           static_cast<double>(n - 1))
                       : 0.0;
    double rhw = relative_half_width(mean, std::sqrt(var), n, rule.alpha);
    res.trace.push_back({n, mean, rhw});
    if (n >= rule.min_samples && rhw <= rule.beta) {
      res.converged = true;
      break;
    }
  }
  res.samples = n;
  res.p_hat = n ? sum / static_cast<double>(n) : 0.0;
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

// --- scenario estimators ------------------------------------------------

AcceleratedModel identity_acceleration(const ScenarioModel& model) {
  AcceleratedModel a;
  for (const auto& d : model.ttc_inv) a.ttc_inv.emplace_back(d);
  a.r_inv = model.r_inv;
  return a;
}

namespace {

EstimationResult scenario_estimate(const ScenarioModel& model,
                                   const AcceleratedModel* accel,
                                   const EgoConfig& ego,
                                   const StoppingRule& rule,
                                   std::uint64_t seed, int workers) {
  if (accel && accel->ttc_inv.size() != model.ttc_inv.size())
    throw std::invalid_argument(
        "accelerated model: segment count mismatch");
  std::uint64_t stream_seed = sub_seed(seed, kEstimateTag);
  auto term = [&, stream_seed](std::size_t i) -> double {
    Rng rng = make_stream(stream_seed, i);
    LaneChangeEvent ev;
    ev.v_l = model.v_l.sample(rng);
    std::size_t seg = model.segment_of(ev.v_l);
    double xt, xr;
    if (accel) {
      xt = sample(accel->ttc_inv[seg], rng);
      xr = sample(accel->r_inv, rng);
    } else {
      xt = sample(model.ttc_inv[seg], rng);
      xr = sample(model.r_inv, rng);
    }
    ev.ttc_l = 1.0 / xt;
    ev.r_l = 1.0 / xr;
    if (!simulate(ev, ego).crashed) return 0.0;
    if (!accel) return 1.0;
    return likelihood_ratio(model.ttc_inv[seg], accel->ttc_inv[seg], xt) *
           likelihood_ratio(model.r_inv, accel->r_inv, xr);
  };
  auto res = estimate_stream(term, rule, seed, workers);
  return res;
}

}  // namespace

EstimationResult crude_mc(const ScenarioModel& model, const EgoConfig& ego,
                          const StoppingRule& rule, std::uint64_t seed,
                          int workers) {
  return scenario_estimate(model, nullptr, ego, rule, seed, workers);
}

EstimationResult is_estimate(const ScenarioModel& model,
                             const AcceleratedModel& accelerated,
                             const EgoConfig& ego, const StoppingRule& rule,
                             std::uint64_t seed, int workers) {
  return scenario_estimate(model, &accelerated, ego, rule, seed, workers);
}

// --- cross-entropy tuning ----------------------------------------------

namespace {

// Tilt parameters of one accelerated variable during tuning. Single
// bases reuse the piece machinery as a one-piece list.
struct TiltState {
  Distribution base;
  std::vector<double> thetas;
  std::vector<double> piece_weights;  // empty for single bases
  std::vector<Piece> pieces;
  std::vector<double> base_weights;
};

TiltState make_state(const Distribution& base) {
  TiltState s;
  s.base = base;
  if (const auto* pw = std::get_if<PiecewiseMixture>(&s.base)) {
    s.thetas.assign(pw->pieces.size(), 0.0);
    s.piece_weights = pw->weights;
    s.base_weights = pw->weights;
    s.pieces = pw->pieces;
  } else if (const auto* e = std::get_if<BoundedExponential>(&s.base)) {
    s.thetas = {0.0};
    s.pieces = {*e};
  } else if (const auto* bn = std::get_if<BoundedNormal>(&s.base)) {
    s.thetas = {0.0};
    s.pieces = {*bn};
  } else if (const auto* mx = std::get_if<MixtureBoundedNormal>(&s.base)) {
    s.thetas = {0.0};
    s.pieces = {*mx};
  } else {
    throw std::invalid_argument(
        "cross-entropy: base distribution does not admit tilting");
  }
  return s;
}

TiltedDistribution build_tilted(const TiltState& s) {
  return tilt(s.base, s.thetas, s.piece_weights);
}

// Tilt parameter whose tilted piece mean equals `target` (exponential
// family: the weighted MLE is moment matching).
double solve_piece_theta(const Piece& p, double target) {
  double lo = piece_lower(p), hi = piece_upper(p);
  if (std::isinf(hi)) {
    target = std::max(target, lo + 1e-9);
  } else {
    double pad = 1e-6 * (hi - lo);
    target = std::clamp(target, lo + pad, hi - pad);
  }
  if (const auto* e = std::get_if<BoundedExponential>(&p);
      e && std::isinf(e->upper)) {
    // Tilted rate is rate - theta; mean lo + 1/(rate - theta).
    return e->rate - 1.0 / (target - lo);
  }
  auto mean_at = [&](double th) { return piece_mean(p, th); };
  double a = -1.0, b = 1.0;
  for (int i = 0; i < 80 && mean_at(a) > target; ++i) a *= 2.0;
  for (int i = 0; i < 80 && mean_at(b) < target; ++i) b *= 2.0;
  return solve_increasing(mean_at, target, a, b, 1e-11 * std::max(1.0, hi));
}

// One weighted CE update of a variable from its elite sample.
void update_state(TiltState& s, const std::vector<double>& xs,
                  const std::vector<double>& ws, const CEConfig& cfg) {
  double wtot = std::accumulate(ws.begin(), ws.end(), 0.0);
  if (xs.size() < 5 || !(wtot > 0.0)) return;  // too little signal, keep
  std::size_t k = s.pieces.size();
  std::vector<double> wsum(k, 0.0), wxsum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (xs[i] >= piece_lower(s.pieces[j]) &&
          (j + 1 == k || xs[i] < piece_upper(s.pieces[j]))) {
        wsum[j] += ws[i];
        wxsum[j] += ws[i] * xs[i];
        ++count[j];
        break;
      }
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (count[j] < 5) continue;
    double th = solve_piece_theta(s.pieces[j], wxsum[j] / wsum[j]);
    s.thetas[j] = cfg.smoothing * th + (1.0 - cfg.smoothing) * s.thetas[j];
  }
  if (!s.piece_weights.empty() && cfg.tune_piece_weights) {
    double norm = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double target = wsum[j] / wtot;
      double w = cfg.smoothing * target +
                 (1.0 - cfg.smoothing) * s.piece_weights[j];
      // Pieces outside the base support stay off. Pieces inside it keep
      // a defensive floor: starving a piece the original model still
      // supports leaves rare huge-weight samples that wreck both the
      // estimate and its variance. The floor is absolute, not relative
      // to the base mass — light-tailed pieces (base mass ~1%) are
      // exactly the ones a rare crash mode may need boosted, so a
      // relative floor would under-protect them.
      if (s.base_weights[j] == 0.0) w = 0.0;
      else w = std::max({w, 0.1 * s.base_weights[j], 0.05});
      s.piece_weights[j] = w;
      norm += w;
    }
    for (auto& w : s.piece_weights) w /= norm;
  }
}

[[noreturn]] void throw_stalled(const std::vector<double>& thresholds) {
  std::ostringstream os;
  os << "cross-entropy made no elite progress for 3 iterations; "
        "threshold history:";
  for (double t : thresholds) os << ' ' << t;
  os << ". The event may be unreachable under the base model; widen the "
        "base distributions or increase the batch size.";
  throw std::runtime_error(os.str());
}

}  // namespace

AcceleratedModel cross_entropy_tune(const ScenarioModel& model,
                                    const EgoConfig& ego,
                                    const AccelerationBases& bases,
                                    const CEConfig& config,
                                    std::uint64_t seed) {
  validate(config);
  if (bases.ttc_inv.size() != model.ttc_inv.size())
    throw std::invalid_argument(
        "cross-entropy: one TTC^-1 base per segment required");
  const std::size_t n = config.batch;
  const std::size_t elite_rank = std::clamp<std::size_t>(
      static_cast<std::size_t>(config.elite_fraction * n), 1, n);
  std::vector<double> sev(n), w(n), xt(n), xr(n);
  std::vector<std::size_t> seg(n);
  std::vector<double> thresholds;

  // The staged optimization can get trapped on a seed-dependent near-miss
  // plateau; a fresh batch stream usually escapes it, so retry a few times
  // before declaring the event unreachable.
  for (int attempt = 0; attempt < kCeAttempts; ++attempt) {
    std::vector<TiltState> ttc;
    for (const auto& d : bases.ttc_inv) ttc.push_back(make_state(d));
    TiltState r = make_state(bases.r_inv);

    auto build = [&] {
      AcceleratedModel a;
      for (const auto& s : ttc) a.ttc_inv.emplace_back(build_tilted(s));
      a.r_inv = build_tilted(r);
      return a;
    };

    double best_threshold = kInf;
    int stall = 0;
    int refines = -1;  // crash-conditioned polish rounds once the event is hit
    bool stalled = false;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
      auto accel = build();
      std::uint64_t batch_seed = sub_seed(
          seed, kTuneTag + static_cast<std::uint64_t>(1000 * attempt + iter));
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_stream(batch_seed, i);
        LaneChangeEvent ev;
        ev.v_l = model.v_l.sample(rng);
        seg[i] = model.segment_of(ev.v_l);
        xt[i] = sample(accel.ttc_inv[seg[i]], rng);
        xr[i] = sample(accel.r_inv, rng);
        ev.ttc_l = 1.0 / xt[i];
        ev.r_l = 1.0 / xr[i];
        sev[i] = simulate(ev, ego).min_range;
        w[i] = likelihood_ratio(model.ttc_inv[seg[i]],
                                accel.ttc_inv[seg[i]], xt[i]) *
               likelihood_ratio(model.r_inv, accel.r_inv, xr[i]);
      }
      std::vector<double> sorted(sev);
      std::nth_element(sorted.begin(), sorted.begin() + (elite_rank - 1),
                       sorted.end());
      // Staged threshold: the elite quantile, never below the crash level.
      double threshold = std::max(sorted[elite_rank - 1], 0.0);
      thresholds.push_back(threshold);
      std::size_t crashes = 0;
      for (double v : sev) crashes += v <= 0.0;
      // Done once the crash region itself dominates the elite set; the
      // defensive weight floor keeps some mass on safe regions, so the
      // elite quantile may flatten slightly above zero.
      bool reached = threshold <= 0.0 || crashes >= (elite_rank + 1) / 2;

      if (iter == 0 && threshold <= 0.0)
        return build();  // event already common enough to hit directly

      double cut = reached ? 0.0 : threshold;
      std::vector<double> rx, rw;
      std::vector<std::vector<double>> tx(ttc.size()), tw(ttc.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (sev[i] > cut) continue;
        rx.push_back(xr[i]);
        rw.push_back(w[i]);
        tx[seg[i]].push_back(xt[i]);
        tw[seg[i]].push_back(w[i]);
      }
      update_state(r, rx, rw, config);
      for (std::size_t s = 0; s < ttc.size(); ++s)
        update_state(ttc[s], tx[s], tw[s], config);

      if (reached) {
        // Keep polishing on crash-conditioned elites so minority speed
        // segments (few elites per batch) also converge before returning;
        // stopping at first contact leaves them untuned and their crash
        // samples then dominate the estimator variance.
        if (refines < 0) refines = kCeRefine;
        if (refines-- == 0) return build();
        continue;
      }
      // Stall when the elite quantile stops improving on the best level
      // seen; a noisy plateau must not slip through by tiny oscillations.
      if (threshold >= 0.98 * best_threshold) {
        if (++stall >= 3) {
          stalled = true;
          break;
        }
      } else {
        stall = 0;
      }
      best_threshold = std::min(best_threshold, threshold);
    }
    if (!stalled) return build();
  }
  throw_stalled(thresholds);
}

AcceleratedModel cross_entropy_tune(const ScenarioModel& model,
                                    const EgoConfig& ego,
                                    const CEConfig& config,
                                    std::uint64_t seed) {
  return cross_entropy_tune(model, ego, own_bases(model), config, seed);
}

AccelerationBases own_bases(const ScenarioModel& model) {
  return {model.ttc_inv, model.r_inv};
}

AccelerationBases single_exponential_bases(const ScenarioModel& model,
                                           std::uint64_t seed,
                                           std::size_t n) {
  auto fit_exp = [&](const Distribution& d, std::uint64_t tag) {
    Rng rng = make_stream(sub_seed(seed, kFitTag + tag), 0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += sample(d, rng);
    return Distribution{
        BoundedExponential{static_cast<double>(n) / sum, 0.0, kInf}};
  };
  AccelerationBases b;
  for (std::size_t s = 0; s < model.ttc_inv.size(); ++s)
    b.ttc_inv.push_back(fit_exp(model.ttc_inv[s], s));
  b.r_inv = fit_exp(model.r_inv, model.ttc_inv.size());
  return b;
}

TiltedDistribution ce_tune_scalar(const Distribution& base, double level,
                                  const CEConfig& config,
                                  std::uint64_t seed) {
  validate(config);
  const std::size_t n = config.batch;
  const std::size_t elite_rank = std::clamp<std::size_t>(
      static_cast<std::size_t>(config.elite_fraction * n), 1, n);
  std::vector<double> x(n), w(n), sev(n);
  std::vector<double> thresholds;

  for (int attempt = 0; attempt < kCeAttempts; ++attempt) {
    TiltState s = make_state(base);
    double best_threshold = kInf;
    int stall = 0;
    bool stalled = false;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
      auto tilted = build_tilted(s);
      std::uint64_t batch_seed = sub_seed(
          seed, kTuneTag + static_cast<std::uint64_t>(1000 * attempt + iter));
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_stream(batch_seed, i);
        x[i] = sample(tilted, rng);
        w[i] = likelihood_ratio(base, AnyDistribution{tilted}, x[i]);
        sev[i] = level - x[i];
      }
      std::vector<double> sorted(sev);
      std::nth_element(sorted.begin(), sorted.begin() + (elite_rank - 1),
                       sorted.end());
      double threshold = std::max(sorted[elite_rank - 1], 0.0);
      thresholds.push_back(threshold);
      std::size_t hits = 0;
      for (double v : sev) hits += v <= 0.0;
      bool reached = threshold <= 0.0 || hits >= (elite_rank + 1) / 2;
      if (iter == 0 && threshold <= 0.0) return build_tilted(s);

      double cut = reached ? 0.0 : threshold;
      std::vector<double> ex, ew;
      for (std::size_t i = 0; i < n; ++i) {
        if (sev[i] > cut) continue;
        ex.push_back(x[i]);
        ew.push_back(w[i]);
      }
      update_state(s, ex, ew, config);

      if (reached) return build_tilted(s);
      if (threshold >= 0.98 * best_threshold) {
        if (++stall >= 3) {
          stalled = true;
          break;
        }
      } else {
        stall = 0;
      }
      best_threshold = std::min(best_threshold, threshold);
    }
    if (!stalled) return build_tilted(s);
  }
  throw_stalled(thresholds);
}

EstimationResult estimate_scalar_event(const Distribution& original,
                                       const AnyDistribution& sampling,
                                       double level, const StoppingRule& rule,
                                       std::uint64_t seed) {
  std::uint64_t stream_seed = sub_seed(seed, kEstimateTag);
  auto term = [&, stream_seed](std::size_t i) -> double {
    Rng rng = make_stream(stream_seed, i);
    double x = sample(sampling, rng);
    if (x < level) return 0.0;
    return likelihood_ratio(original, sampling, x);
  };
  return estimate_stream(term, rule, seed, 1);
}

// --- comparison harness -------------------------------------------------

std::string method_name(Method m) {
  switch (m) {
    case Method::PiecewiseIS: return "piecewise-is";
    case Method::SingleIS: return "single-is";
    case Method::Crude: return "crude";
  }
  return "unknown";
}

ComparisonReport compare_harness(const ScenarioModel& model,
                                 const EgoConfig& ego,
                                 const std::vector<Method>& methods,
                                 int repeats, const StoppingRule& rule,
                                 const CEConfig& ce, std::uint64_t seed,
                                 int workers) {
  if (repeats < 1)
    throw std::invalid_argument("comparison: repeats must be >= 1");
  ComparisonReport rep;
  rep.repeats = repeats;

  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    try {
      std::optional<AcceleratedModel> accel;
      if (m == Method::PiecewiseIS) {
        accel = cross_entropy_tune(model, ego, own_bases(model), ce,
                                   sub_seed(seed, 1));
      } else if (m == Method::SingleIS) {
        accel = cross_entropy_tune(
            model, ego, single_exponential_bases(model, seed), ce,
            sub_seed(seed, 2));
      }
      for (int r = 0; r < repeats; ++r) {
        std::uint64_t rs =
            sub_seed(seed, kRepeatTag + static_cast<std::uint64_t>(r));
        auto res = accel ? is_estimate(model, *accel, ego, rule, rs, workers)
                         : crude_mc(model, ego, rule, rs, workers);
        if (!res.converged)
          throw std::runtime_error(method_name(m) +
                                   ": no convergence within max_samples");
        s.samples.push_back(res.samples);
        s.estimates.push_back(res.p_hat);
        if (r == 0) s.trace = res.trace;
      }
      s.mean_samples =
          std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / repeats;
      s.mean_p =
          std::accumulate(s.estimates.begin(), s.estimates.end(), 0.0) /
          repeats;
      s.ok = true;
    } catch (const std::exception& e) {
      s.ok = false;
      s.error = e.what();
    }
    rep.rows.push_back(std::move(s));
  }

  double base_n = 0.0;
  for (const auto& row : rep.rows)
    if (row.ok && (row.method == Method::PiecewiseIS || base_n == 0.0)) {
      base_n = row.mean_samples;
      if (row.method == Method::PiecewiseIS) break;
    }
  for (auto& row : rep.rows)
    if (row.ok && base_n > 0.0)
      row.ratio_to_piecewise = row.mean_samples / base_n;
  return rep;
}

// --- serialization ------------------------------------------------------

json to_json(const EstimationResult& r) {
  json trace = json::array();
  for (const auto& t : r.trace)
    trace.push_back(
        {{"n", t.n}, {"estimate", t.estimate},
         {"rel_half_width", std::isinf(t.rel_half_width)
                                ? json()
                                : json(t.rel_half_width)}});
  return {{"p_hat", r.p_hat},      {"samples", r.samples},
          {"converged", r.converged}, {"seed", r.seed},
          {"wall_seconds", r.wall_seconds}, {"trace", trace}};
}

json to_json(const ComparisonReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json row = {{"method", method_name(r.method)}, {"ok", r.ok}};
    if (r.ok) {
      row["mean_samples"] = r.mean_samples;
      row["mean_p"] = r.mean_p;
      row["ratio_to_piecewise"] = r.ratio_to_piecewise;
      row["samples"] = r.samples;
      row["estimates"] = r.estimates;
    } else {
      row["error"] = r.error;
    }
    rows.push_back(std::move(row));
  }
  return {{"schema_version", 1}, {"repeats", rep.repeats}, {"rows", rows}};
}

json to_json(const StoppingRule& r) {
  return {{"alpha", r.alpha},
          {"beta", r.beta},
          {"cadence", r.cadence},
          {"min_samples", r.min_samples},
          {"max_samples", r.max_samples}};
}

StoppingRule stopping_rule_from_json(const json& j) {
  StoppingRule r;
  if (j.contains("alpha")) r.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) r.beta = j.at("beta").get<double>();
  if (j.contains("cadence")) r.cadence = j.at("cadence").get<std::size_t>();
  if (j.contains("min_samples"))
    r.min_samples = j.at("min_samples").get<std::size_t>();
  if (j.contains("max_samples"))
    r.max_samples = j.at("max_samples").get<std::size_t>();
  validate(r);
  return r;
}

json to_json(const CEConfig& c) {
  return {{"batch", c.batch},
          {"elite_fraction", c.elite_fraction},
          {"smoothing", c.smoothing},
          {"max_iterations", c.max_iterations},
          {"tune_piece_weights", c.tune_piece_weights}};
}

CEConfig ce_config_from_json(const json& j) {
  CEConfig c;
  if (j.contains("batch")) c.batch = j.at("batch").get<std::size_t>();
  if (j.contains("elite_fraction"))
    c.elite_fraction = j.at("elite_fraction").get<double>();
  if (j.contains("smoothing")) c.smoothing = j.at("smoothing").get<double>();
  if (j.contains("max_iterations"))
    c.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("tune_piece_weights"))
    c.tune_piece_weights = j.at("tune_piece_weights").get<bool>();
  validate(c);
  return c;
}

json to_json(const AcceleratedModel& m) {
  json ttc = json::array();
  for (const auto& d : m.ttc_inv) ttc.push_back(to_json(d));
  return {{"schema_version", 1}, {"ttc_inv", ttc}, {"r_inv", to_json(m.r_inv)}};
}

AcceleratedModel accelerated_model_from_json(const json& j) {
  AcceleratedModel m;
  for (const auto& dj : j.at("ttc_inv"))
    m.ttc_inv.push_back(any_distribution_from_json(dj));
  m.r_inv = any_distribution_from_json(j.at("r_inv"));
  return m;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TracePoint>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "n,estimate,rel_half_width\n";
  out << std::setprecision(17);
  for (const auto& t : trace)
    out << t.n << ',' << t.estimate << ',' << t.rel_half_width << '\n';
}

}  // namespace accel
