#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "accel/fitting.hpp"
#include "oracle.hpp"

using namespace accel;

TEST_CASE("piece weights: counting") {
  CHECK(fit_piece_weights({0.5, 1.5, 2.5, 3.5}, {2.0}) ==
        std::vector<double>{0.5, 0.5});
  CHECK(fit_piece_weights({0.1, 0.2, 0.3}, {1.0}) ==
        std::vector<double>{1.0, 0.0});
  CHECK_THROWS(fit_piece_weights({}, {1.0}));
}

TEST_CASE("piece weights: recovery within binomial error") {
  PiecewiseMixture pw;
  pw.weights = {0.7, 0.2, 0.1};
  pw.pieces = {BoundedExponential{2.0, 0.0, 1.0},
               BoundedExponential{1.0, 1.0, 2.0},
               BoundedExponential{0.5, 2.0, kInf}};
  Rng rng = make_stream(11, 0);
  const std::size_t n = 100000;
  auto xs = sample(Distribution{pw}, rng, n);
  auto pi = fit_piece_weights(xs, {1.0, 2.0});
  for (std::size_t i = 0; i < 3; ++i) {
    double se = std::sqrt(pw.weights[i] * (1.0 - pw.weights[i]) / double(n));
    CHECK(std::abs(pi[i] - pw.weights[i]) < 3.0 * se);
  }
}

TEST_CASE("bounded exponential MLE") {
  // Unbounded case: closed form 1/mean.
  std::vector<double> d = {0.1, 0.2, 0.3, 0.4};  // mean 0.25
  CHECK(fit_bounded_exponential(d, 0.0, kInf) == doctest::Approx(4.0));

  // Recovery on a bounded interval.
  Rng rng = make_stream(12, 0);
  auto xs = sample(Distribution{BoundedExponential{3.0, 1.0, 2.0}}, rng,
                   100000);
  double rate = fit_bounded_exponential(xs, 1.0, 2.0);
  CHECK(rate == doctest::Approx(3.0).epsilon(0.1 / 3.0));

  // Stationarity of the log-likelihood at the optimum.
  double h = 1e-5;
  double grad = (bounded_exp_loglik(xs, 1.0, 2.0, rate + h) -
                 bounded_exp_loglik(xs, 1.0, 2.0, rate - h)) /
                (2.0 * h);
  CHECK(std::abs(grad) < 1e-6 * double(xs.size()));

  CHECK_THROWS(fit_bounded_exponential({1.0, 1.0, 1.0}, 0.0, kInf));
  CHECK_THROWS(fit_bounded_exponential({0.5}, 0.0, kInf));
}

TEST_CASE("bounded normal MLE") {
  // Half-normal closed form: sigma^2 = mean of squares.
  std::vector<double> d = {2.0, 2.0, 2.0, 2.0};
  CHECK(fit_bounded_normal(d, 0.0, kInf) == doctest::Approx(2.0));

  Rng rng = make_stream(13, 0);
  auto xs =
      sample(Distribution{BoundedNormal{1.5, 0.5, 3.0}}, rng, 100000);
  double sigma = fit_bounded_normal(xs, 0.5, 3.0);
  CHECK(sigma == doctest::Approx(1.5).epsilon(0.05 / 1.5));

  // Local optimality probe.
  double at = bounded_normal_loglik(xs, 0.5, 3.0, sigma);
  CHECK(at >= bounded_normal_loglik(xs, 0.5, 3.0, sigma + 1e-3));
  CHECK(at >= bounded_normal_loglik(xs, 0.5, 3.0, sigma - 1e-3));
}

TEST_CASE("EM: single component degenerates to bounded normal MLE") {
  Rng rng = make_stream(14, 0);
  auto xs = sample(Distribution{BoundedNormal{1.2, 0.3, 4.0}}, rng, 20000);
  FitConfig cfg;
  auto mf = fit_mixture_em(xs, 0.3, 4.0, 1, cfg);
  double direct = fit_bounded_normal(xs, 0.3, 4.0);
  CHECK(mf.sigmas[0] == doctest::Approx(direct).epsilon(1e-8));
  CHECK(mf.weights[0] == 1.0);
}

TEST_CASE("EM: two-component recovery and monotone log-likelihood") {
  Distribution truth =
      MixtureBoundedNormal{{0.6, 0.4}, {0.5, 2.0}, 0.0, kInf};
  Rng rng = make_stream(15, 0);
  auto xs = sample(truth, rng, 100000);
  FitConfig cfg;
  cfg.seed = 21;
  auto mf = fit_mixture_em(xs, 0.0, kInf, 2, cfg);
  REQUIRE(mf.report.converged);
  // Components come back sorted by sigma, matching the generator order.
  CHECK(mf.sigmas[0] == doctest::Approx(0.5).epsilon(0.05));
  CHECK(mf.sigmas[1] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(mf.weights[0] == doctest::Approx(0.6).epsilon(0.05));
  CHECK(mf.weights[1] == doctest::Approx(0.4).epsilon(0.05));
  for (std::size_t i = 1; i < mf.ll_trace.size(); ++i)
    CHECK(mf.ll_trace[i] >= mf.ll_trace[i - 1] - 1e-10);

  CHECK_THROWS(fit_mixture_em({1.0, 1.0, 1.0, 1.0}, 0.0, kInf, 2, cfg));
}

TEST_CASE("piecewise pipeline: three bounded exponential pieces") {
  PiecewiseMixture truth;
  truth.weights = {0.8, 0.15, 0.05};
  truth.pieces = {BoundedExponential{20.0, 0.0, 0.05},
                  BoundedExponential{35.0, 0.05, 0.1},
                  BoundedExponential{50.0, 0.1, kInf}};
  Rng rng = make_stream(16, 0);
  auto xs = sample(Distribution{truth}, rng, 100000);

  FitConfig cfg;
  cfg.cuts = {0.05, 0.1};
  auto [fitted, report] = fit_piecewise(xs, cfg);
  REQUIRE(fitted.pieces.size() == 3);
  double wsum = 0.0;
  for (double w : fitted.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));

  // Pipeline exactness: weights and per-piece parameters match the
  // piecewise-oblivious per-interval fits bit for bit.
  auto pi = fit_piece_weights(xs, cfg.cuts);
  CHECK(fitted.weights == pi);
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> d1, d2, d3;
  for (double x : sorted)
    (x < 0.05 ? d1 : x < 0.1 ? d2 : d3).push_back(x);
  CHECK(std::get<BoundedExponential>(fitted.pieces[0]).rate ==
        fit_bounded_exponential(d1, 0.0, 0.05));
  CHECK(std::get<BoundedExponential>(fitted.pieces[1]).rate ==
        fit_bounded_exponential(d2, 0.05, 0.1));
  CHECK(std::get<BoundedExponential>(fitted.pieces[2]).rate ==
        fit_bounded_exponential(d3, 0.1, kInf));

  // Total variation against the generator, by quadrature.
  Distribution fd{fitted};
  auto tv_half = [&](double lo, double hi) {
    auto f = [&](double x) {
      return std::abs(pdf(fd, x) - pdf(Distribution{truth}, x));
    };
    return std::isinf(hi) ? oracle::integrate_to_inf(f, lo, 1e-10)
                          : oracle::integrate(f, lo, hi, 1e-10);
  };
  double tv = 0.5 * (tv_half(0.0, 0.05) + tv_half(0.05, 0.1) +
                     tv_half(0.1, kInf));
  CHECK(tv < 0.02);
}

TEST_CASE("piecewise pipeline: mixture body with exponential tail") {
  PiecewiseMixture truth;
  truth.weights = {0.95, 0.05};
  truth.pieces = {MixtureBoundedNormal{{0.5, 0.5}, {0.1, 0.25}, 0.0, 0.5},
                  BoundedExponential{6.0, 0.5, kInf}};
  Rng rng = make_stream(17, 0);
  auto xs = sample(Distribution{truth}, rng, 50000);

  FitConfig cfg;
  cfg.cuts = {0.5};
  cfg.pieces = {PieceSpec{PieceFamily::MixtureNormal, 2},
                PieceSpec{PieceFamily::Exponential, 1}};
  cfg.seed = 5;
  auto [fitted, report] = fit_piecewise(xs, cfg);
  REQUIRE(fitted.pieces.size() == 2);
  CHECK(std::holds_alternative<MixtureBoundedNormal>(fitted.pieces[0]));
  CHECK(std::holds_alternative<BoundedExponential>(fitted.pieces[1]));
  CHECK(fitted.weights[0] == doctest::Approx(0.95).epsilon(0.01));
  validate(Distribution{fitted});
}

TEST_CASE("piecewise pipeline: quantile cut rule and empty-piece error") {
  Rng rng = make_stream(18, 0);
  auto xs = sample(Distribution{BoundedExponential{1.0, 0.0, kInf}}, rng,
                   5000);
  FitConfig cfg;  // default quantile cuts {0.80, 0.99}
  auto [fitted, report] = fit_piecewise(xs, cfg);
  CHECK(fitted.pieces.size() == 3);
  auto cuts = fitted.cuts();
  CHECK(cuts[0] < cuts[1]);

  FitConfig bad;
  bad.cuts = {50.0, 60.0};  // no data that far out
  CHECK_THROWS_WITH_AS(fit_piecewise(xs, bad).first,
                       doctest::Contains("empty piece"),
                       std::invalid_argument);
}

TEST_CASE("single baselines") {
  std::vector<double> d = {1.0, 3.0};  // mean 2
  auto fits = fit_single_baselines(d);
  CHECK(fits.exponential.rate == doctest::Approx(0.5));

  std::vector<double> p = {1.0, std::exp(1.0), std::exp(2.0)};
  auto fp = fit_single_baselines(p);
  CHECK(fp.pareto.scale == doctest::Approx(1.0));
  CHECK(fp.pareto.shape == doctest::Approx(1.0));

  Rng rng = make_stream(19, 0);
  auto xs = sample(Distribution{Pareto{1.0, 2.5}}, rng, 100000);
  auto fr = fit_single_baselines(xs);
  CHECK(fr.pareto.shape == doctest::Approx(2.5).epsilon(0.05 / 2.5));

  CHECK_THROWS(fit_single_baselines({-1.0, 2.0}));
}

TEST_CASE("recovery within 3 bootstrap standard errors") {
  const std::size_t n = 100000;
  Rng rng = make_stream(20, 0);
  std::mt19937_64 boot_rng(77);

  // Bounded exponential
  {
    auto xs = sample(Distribution{BoundedExponential{3.0, 1.0, 2.0}}, rng, n);
    double est = fit_bounded_exponential(xs, 1.0, 2.0);
    double se = oracle::bootstrap_se(
        xs,
        [](const std::vector<double>& d) {
          return fit_bounded_exponential(d, 1.0, 2.0);
        },
        boot_rng);
    CHECK(std::abs(est - 3.0) < 3.0 * se);
  }
  // Bounded normal
  {
    auto xs = sample(Distribution{BoundedNormal{1.5, 0.5, 3.0}}, rng, n);
    double est = fit_bounded_normal(xs, 0.5, 3.0);
    double se = oracle::bootstrap_se(
        xs,
        [](const std::vector<double>& d) {
          return fit_bounded_normal(d, 0.5, 3.0);
        },
        boot_rng);
    CHECK(std::abs(est - 1.5) < 3.0 * se);
  }
  // Pareto shape
  {
    auto xs = sample(Distribution{Pareto{1.0, 2.5}}, rng, n);
    double est = fit_single_baselines(xs).pareto.shape;
    double se = oracle::bootstrap_se(
        xs,
        [](const std::vector<double>& d) {
          return fit_single_baselines(d).pareto.shape;
        },
        boot_rng);
    CHECK(std::abs(est - 2.5) < 3.0 * se);
  }
}
