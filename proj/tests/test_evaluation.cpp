#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "accel/evaluation.hpp"
#include "accel/serialize.hpp"
#include "oracle.hpp"

using namespace accel;

namespace {

const Distribution kUnitExp = BoundedExponential{1.0, 0.0, kInf};

// Exp(1) written as a two-piece mixture cut at the event level; the
// density is unchanged but the piece weights become tunable.
Distribution unit_exp_pieces(double cut) {
  PiecewiseMixture pw;
  double tail = std::exp(-cut);
  pw.weights = {1.0 - tail, tail};
  pw.pieces = {BoundedExponential{1.0, 0.0, cut},
               BoundedExponential{1.0, cut, kInf}};
  return pw;
}

StoppingRule toy_rule() {
  StoppingRule r;
  r.cadence = 10;
  r.min_samples = 50;
  r.max_samples = 1000000;
  return r;
}

double reported_se(const EstimationResult& r, double alpha = 0.2) {
  return r.trace.back().rel_half_width * r.p_hat / z_quantile(alpha);
}

}  // namespace

TEST_CASE("confidence arithmetic") {
  CHECK(z_quantile(0.2) == doctest::Approx(1.2815515655).epsilon(1e-9));
  // Constant terms have zero spread.
  CHECK(relative_half_width(0.3, 0.0, 1000, 0.2) == 0.0);
  // Hand check: z * s / (sqrt(n) * p).
  double expect = normal_icdf(0.9) * 0.25 / (std::sqrt(400.0) * 0.5);
  CHECK(relative_half_width(0.5, 0.25, 400, 0.2) ==
        doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::isinf(relative_half_width(0.0, 0.1, 100, 0.2)));
}

TEST_CASE("crude sample-size predictor") {
  // Rare event: ~5.5e7 draws for a 7.4e-7 probability at alpha=beta=0.2.
  CHECK(crude_sample_size(7.4e-7, 0.2, 0.2) ==
        doctest::Approx(5.5e7).epsilon(0.02));
  // Balanced coin: z^2 / beta^2.
  double z = z_quantile(0.2);
  CHECK(crude_sample_size(0.5, 0.2, 0.2) ==
        doctest::Approx(z * z / 0.04).epsilon(1e-12));
  // Halving beta quadruples the prediction.
  CHECK(crude_sample_size(0.01, 0.2, 0.1) ==
        doctest::Approx(4.0 * crude_sample_size(0.01, 0.2, 0.2))
            .epsilon(1e-12));
  CHECK_THROWS(crude_sample_size(0.0, 0.2, 0.2));
  CHECK_THROWS(crude_sample_size(1.0, 0.2, 0.2));
}

TEST_CASE("estimate_stream: stopping mechanics") {
  StoppingRule rule;
  rule.cadence = 25;
  rule.min_samples = 100;
  rule.max_samples = 1000;
  CHECK_THROWS(validate(StoppingRule{.alpha = 0.0}));
  CHECK_THROWS(validate(StoppingRule{.cadence = 0}));
  CHECK_THROWS(
      validate(StoppingRule{.min_samples = 10, .max_samples = 5}));

  // A certain event converges at the first check past min_samples,
  // never earlier.
  auto sure = estimate_stream([](std::size_t) { return 1.0; }, rule, 1);
  CHECK(sure.converged);
  CHECK(sure.samples == 100);
  CHECK(sure.p_hat == 1.0);
  CHECK(sure.trace.size() == 4);
  CHECK(sure.trace[0].n == 25);

  // An impossible event never converges and stops at max_samples.
  auto never = estimate_stream([](std::size_t) { return 0.0; }, rule, 1);
  CHECK(!never.converged);
  CHECK(never.samples == 1000);
  CHECK(never.p_hat == 0.0);
}

TEST_CASE("estimate_stream: worker-count invariance") {
  StoppingRule rule;
  rule.cadence = 64;
  rule.min_samples = 256;
  rule.max_samples = 100000;
  auto term = [](std::size_t i) {
    Rng rng = make_stream(9, i);
    return u01(rng) < 0.05 ? u01(rng) + 0.5 : 0.0;
  };
  auto a = estimate_stream(term, rule, 9, 1);
  auto b = estimate_stream(term, rule, 9, 3);
  CHECK(a.samples == b.samples);
  CHECK(a.p_hat == b.p_hat);  // bit-identical
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].estimate == b.trace[k].estimate);
    CHECK(a.trace[k].rel_half_width == b.trace[k].rel_half_width);
  }
}

TEST_CASE("crude estimation of a fair coin") {
  // P(X > ln 2) = 1/2 for X ~ Exp(1).
  auto rule = toy_rule();
  auto res = estimate_scalar_event(kUnitExp, AnyDistribution{kUnitExp},
                                   std::log(2.0), rule, 3);
  CHECK(res.converged);
  CHECK(res.p_hat == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(res.p_hat - 0.5) <= 3.0 * reported_se(res));
}

TEST_CASE("cross-entropy on the analytic tail event") {
  // X ~ Exp(1), target {X > 4}. A single exponential tilt lands near the
  // variance-optimal sampling rate.
  CEConfig ce;
  auto tilted = ce_tune_scalar(kUnitExp, 4.0, ce, 42);
  double tuned_rate = 1.0 - tilted.thetas[0];
  CHECK(tuned_rate > 0.2);
  CHECK(tuned_rate < 0.35);

  auto rule = toy_rule();
  double p_true = std::exp(-4.0);
  auto is = estimate_scalar_event(kUnitExp, AnyDistribution{tilted}, 4.0,
                                  rule, 42);
  CHECK(is.converged);
  CHECK(std::abs(is.p_hat - p_true) <= 3.0 * reported_se(is));

  // Same seed, same answer.
  auto again = ce_tune_scalar(kUnitExp, 4.0, ce, 42);
  CHECK(to_json(again) == to_json(tilted));
}

TEST_CASE("piecewise acceleration beats crude by an order of magnitude") {
  CEConfig ce;
  auto rule = toy_rule();
  Distribution base = unit_exp_pieces(4.0);
  double p_true = std::exp(-4.0);
  int pass = 0;
  for (int s = 0; s < 10; ++s) {
    std::uint64_t seed = 100 + s;
    auto crude =
        estimate_scalar_event(kUnitExp, AnyDistribution{kUnitExp}, 4.0,
                              rule, seed);
    auto tuned = ce_tune_scalar(base, 4.0, ce, seed);
    auto is = estimate_scalar_event(base, AnyDistribution{tuned}, 4.0,
                                    rule, seed);
    bool ok = crude.converged && is.converged &&
              crude.samples >= 10 * is.samples &&
              std::abs(is.p_hat - p_true) <= 3.0 * reported_se(is);
    pass += ok;
  }
  CHECK(pass >= 9);
}

TEST_CASE("importance-sampling variance reduction") {
  // Variance of the weighted terms under the tuned measure vs the
  // Bernoulli variance under direct sampling, at a fixed budget.
  CEConfig ce;
  auto tuned = ce_tune_scalar(unit_exp_pieces(4.0), 4.0, ce, 5);
  const std::size_t n = 2000;
  std::vector<double> is_terms(n), crude_terms(n);
  std::uint64_t is_seed = sub_seed(5, 77), crude_seed = sub_seed(5, 78);
  for (std::size_t i = 0; i < n; ++i) {
    Rng r1 = make_stream(is_seed, i);
    double x = sample(tuned, r1);
    is_terms[i] =
        x >= 4.0
            ? likelihood_ratio(unit_exp_pieces(4.0), AnyDistribution{tuned}, x)
            : 0.0;
    Rng r2 = make_stream(crude_seed, i);
    crude_terms[i] = sample(kUnitExp, r2) >= 4.0 ? 1.0 : 0.0;
  }
  double vi = std::pow(oracle::sample_std(is_terms), 2);
  double vc = std::pow(oracle::sample_std(crude_terms), 2);
  CHECK(vi < 0.2 * vc);
}

TEST_CASE("estimator is unbiased with honest intervals") {
  // 100 replications; the nominal 80% interval should cover the truth in
  // at least 70 of them.
  CEConfig ce;
  auto rule = toy_rule();
  double p_true = std::exp(-4.0);
  auto tuned = ce_tune_scalar(unit_exp_pieces(4.0), 4.0, ce, 6);
  int covered = 0;
  double mean_p = 0.0;
  for (int r = 0; r < 100; ++r) {
    auto res = estimate_scalar_event(unit_exp_pieces(4.0),
                                     AnyDistribution{tuned}, 4.0, rule,
                                     5000 + r);
    REQUIRE(res.converged);
    mean_p += res.p_hat / 100.0;
    double hw = res.trace.back().rel_half_width * res.p_hat;
    if (std::abs(res.p_hat - p_true) <= hw) ++covered;
  }
  CHECK(covered >= 70);
  CHECK(mean_p == doctest::Approx(p_true).epsilon(0.05));
}

TEST_CASE("cross-entropy reports unreachable events") {
  // Support capped at 2 but target level 4: the staged threshold can
  // never reach the event and must stop with a diagnostic.
  CEConfig ce;
  Distribution capped = BoundedExponential{1.0, 0.0, 2.0};
  CHECK_THROWS_WITH_AS(ce_tune_scalar(capped, 4.0, ce, 1),
                       doctest::Contains("no elite progress"),
                       std::runtime_error);
}

TEST_CASE("identity acceleration reproduces direct sampling exactly") {
  auto model = synthetic_model("desk-common");
  EgoConfig ego;
  StoppingRule rule;
  rule.max_samples = 20000;
  auto c = crude_mc(model, ego, rule, 7);
  auto i = is_estimate(model, identity_acceleration(model), ego, rule, 7);
  CHECK(c.p_hat > 0.0);
  CHECK(c.p_hat == i.p_hat);  // bit-identical
  CHECK(c.samples == i.samples);
  REQUIRE(c.trace.size() == i.trace.size());
  for (std::size_t k = 0; k < c.trace.size(); ++k) {
    CHECK(c.trace[k].estimate == i.trace[k].estimate);
    CHECK(c.trace[k].rel_half_width == i.trace[k].rel_half_width);
  }
}

TEST_CASE("cross-entropy leaves a common event untouched") {
  auto model = synthetic_model("desk-common");
  EgoConfig ego;
  CEConfig ce;
  auto accel = cross_entropy_tune(model, ego, ce, 11);
  auto check_untilted = [](const AnyDistribution& d) {
    const auto& t = std::get<TiltedDistribution>(d);
    for (double th : t.thetas) CHECK(th == 0.0);
  };
  for (const auto& d : accel.ttc_inv) check_untilted(d);
  check_untilted(accel.r_inv);
}

TEST_CASE("scenario acceleration on the rare preset") {
  auto model = synthetic_model("desk-rare");
  EgoConfig ego;
  CEConfig ce;
  auto accel = cross_entropy_tune(model, ego, ce, 11);
  // Deterministic for a fixed seed.
  auto accel2 = cross_entropy_tune(model, ego, ce, 11);
  CHECK(to_json(accel) == to_json(accel2));

  StoppingRule rule;
  rule.max_samples = 2000000;
  auto res = is_estimate(model, accel, ego, rule, 11);
  CHECK(res.converged);
  CHECK(res.p_hat > 1e-5);
  CHECK(res.p_hat < 2e-4);
  // Far fewer draws than the crude prediction for this probability.
  CHECK(static_cast<double>(res.samples) <
        0.1 * crude_sample_size(res.p_hat, rule.alpha, rule.beta));
}

TEST_CASE("round trips and trace files") {
  StoppingRule rule;
  rule.beta = 0.1;
  rule.cadence = 250;
  auto rj = to_json(rule);
  CHECK(to_json(stopping_rule_from_json(rj)) == rj);
  CHECK_THROWS(stopping_rule_from_json({{"alpha", 2.0}}));

  CEConfig ce;
  ce.batch = 500;
  ce.smoothing = 0.5;
  auto cj = to_json(ce);
  CHECK(to_json(ce_config_from_json(cj)) == cj);

  AcceleratedModel am;
  am.ttc_inv = {AnyDistribution{tilt(kUnitExp, {0.25})}};
  am.r_inv = AnyDistribution{kUnitExp};
  auto aj = to_json(am);
  CHECK(to_json(accelerated_model_from_json(aj)) == aj);

  std::vector<TracePoint> trace = {{100, 0.5, 0.3}, {200, 0.4, 0.2}};
  write_trace_csv("trace_test.csv", trace);
  std::ifstream in("trace_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,estimate,rel_half_width");
  std::string row;
  int rows = 0;
  while (std::getline(in, row)) ++rows;
  CHECK(rows == 2);
}
