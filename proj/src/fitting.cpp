#include "accel/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace accel {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument("fitting: " + msg);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// Maximize a unimodal objective of a positive parameter over log-space,
// expanding the bracket when the optimum lands on an edge.
double maximize_positive_param(const std::function<double(double)>& objective,
                               double init) {
  double lo = std::log(init) - 8.0, hi = std::log(init) + 8.0;
  auto neg = [&](double t) { return -objective(std::exp(t)); };
  for (int tries = 0; tries < 6; ++tries) {
    double t = brent_minimize(neg, lo, hi, 1e-12);
    double span = hi - lo;
    if (t - lo < 1e-3 * span) {
      lo -= span;
    } else if (hi - t < 1e-3 * span) {
      hi += span;
    } else {
      return std::exp(t);
    }
  }
  throw std::runtime_error("fitting: 1-D MLE bracket did not close");
}

}  // namespace

std::vector<double> fit_piece_weights(const std::vector<double>& data,
                                      const std::vector<double>& cuts) {
  require(!data.empty(), "empty dataset");
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    require(cuts[i] < cuts[i + 1], "cuts must be strictly increasing");
  std::vector<std::size_t> counts(cuts.size() + 1, 0);
  for (double x : data) {
    std::size_t i =
        std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin();
    counts[i]++;
  }
  std::vector<double> pi(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    pi[i] = static_cast<double>(counts[i]) / static_cast<double>(data.size());
  return pi;
}

double bounded_exp_loglik(const std::vector<double>& data, double lo,
                          double hi, double rate) {
  double n = static_cast<double>(data.size());
  double sum = std::accumulate(data.begin(), data.end(), 0.0);
  // log f = log(rate) - rate*(x-lo) - log(1 - e^{-rate*(hi-lo)})
  return n * std::log(rate) - rate * (sum - n * lo) -
         n * std::log(exp_diff_scaled(rate, hi - lo));
}

double bounded_normal_loglik(const std::vector<double>& data, double lo,
                             double hi, double sigma) {
  double n = static_cast<double>(data.size());
  double s2 = 0.0;
  for (double x : data) s2 += x * x;
  double z = normal_cdf_diff(lo / sigma, hi / sigma);
  return -s2 / (2.0 * sigma * sigma) - n * std::log(sigma) - n * std::log(z) -
         0.5 * n * std::log(2.0 * 3.14159265358979323846);
}

double mixture_loglik(const std::vector<double>& data,
                      const MixtureBoundedNormal& mix) {
  const std::size_t m = mix.weights.size();
  std::vector<double> coef(m), inv2s2(m);
  for (std::size_t j = 0; j < m; ++j) {
    double s = mix.sigmas[j];
    double z = normal_cdf_diff(mix.lower / s, mix.upper / s);
    coef[j] = mix.weights[j] /
              (s * z * std::sqrt(2.0 * 3.14159265358979323846));
    inv2s2[j] = 0.5 / (s * s);
  }
  double ll = 0.0;
  for (double x : data) {
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      f += coef[j] * std::exp(-x * x * inv2s2[j]);
    ll += std::log(f);
  }
  return ll;
}

double fit_bounded_exponential(const std::vector<double>& data, double lo,
                               double hi) {
  require(data.size() >= 2, "need at least 2 points");
  for (double x : data)
    require(x >= lo && x < hi, "data outside [lo, hi)");
  double m = mean_of(data);
  bool degenerate = true;
  for (double x : data)
    if (x != data.front()) { degenerate = false; break; }
  require(!degenerate, "degenerate data (all values equal)");
  if (std::isinf(hi)) return 1.0 / (m - lo);  // closed form
  double init = std::max(1.0 / (m - lo), 1e-6);
  return maximize_positive_param(
      [&](double rate) { return bounded_exp_loglik(data, lo, hi, rate); },
      init);
}

double fit_bounded_normal(const std::vector<double>& data, double lo,
                          double hi) {
  require(data.size() >= 2, "need at least 2 points");
  for (double x : data)
    require(x >= lo && x < hi, "data outside [lo, hi)");
  double s2 = 0.0;
  for (double x : data) s2 += x * x;
  double rms = std::sqrt(s2 / static_cast<double>(data.size()));
  require(rms > 0.0, "degenerate data");
  if (std::isinf(hi) && lo == 0.0) return rms;  // half-normal closed form
  return maximize_positive_param(
      [&](double sigma) { return bounded_normal_loglik(data, lo, hi, sigma); },
      rms);
}

MixtureFit fit_mixture_em(const std::vector<double>& data, double lo,
                          double hi, int components, const FitConfig& config) {
  require(components >= 1, "component count must be >= 1");
  require(data.size() >= 2 * static_cast<std::size_t>(components),
          "need at least 2m points");
  std::set<double> distinct(data.begin(), data.end());
  require(distinct.size() >= static_cast<std::size_t>(components),
          "more components than distinct data values");
  const std::size_t n = data.size();
  const std::size_t m = static_cast<std::size_t>(components);

  double s2 = 0.0;
  for (double x : data) s2 += x * x;
  double rms = std::sqrt(s2 / static_cast<double>(n));

  MixtureFit best;
  best.report.log_likelihood = -kInf;

  int restarts = std::max(1, config.restarts);
  if (m == 1) restarts = 1;  // no initialization ambiguity
  for (int r = 0; r < restarts; ++r) {
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(r));
    std::vector<double> p(m, 1.0 / static_cast<double>(m));
    std::vector<double> sigma(m);
    for (auto& s : sigma)
      s = (m == 1) ? rms
                   : 0.5 * rms * std::exp(std::log(4.0) * u01(rng));
    std::vector<std::vector<double>> tau(m, std::vector<double>(n));
    std::vector<double> ll_trace;
    bool converged = false;
    int iter = 0;
    double ll_prev = -kInf;
    for (; iter < config.max_iterations; ++iter) {
      // E step; per-component normalizers hoisted out of the data loop
      std::vector<double> coef(m), inv2s2(m);
      for (std::size_t j = 0; j < m; ++j) {
        double z = normal_cdf_diff(lo / sigma[j], hi / sigma[j]);
        coef[j] = p[j] / (sigma[j] * z);
        inv2s2[j] = 0.5 / (sigma[j] * sigma[j]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        double x2 = data[i] * data[i];
        double total = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          double f = coef[j] * std::exp(-x2 * inv2s2[j]);
          tau[j][i] = f;
          total += f;
        }
        for (std::size_t j = 0; j < m; ++j) tau[j][i] /= total;
      }
      // M step
      for (std::size_t j = 0; j < m; ++j) {
        double tj = 0.0, s2j = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          tj += tau[j][i];
          s2j += tau[j][i] * data[i] * data[i];
        }
        p[j] = tj / static_cast<double>(n);
        if (tj < 1e-12) continue;  // emptied component keeps its sigma
        sigma[j] = maximize_positive_param(
            [&](double s) {
              double z = normal_cdf_diff(lo / s, hi / s);
              return -s2j / (2.0 * s * s) - tj * std::log(s) -
                     tj * std::log(z);
            },
            std::sqrt(s2j / tj));
      }
      MixtureBoundedNormal cur{p, sigma, lo, hi};
      double ll = mixture_loglik(data, cur);
      ll_trace.push_back(ll);
      if (ll - ll_prev < config.ll_tol && iter > 0) {
        converged = true;
        ++iter;
        break;
      }
      ll_prev = ll;
    }
    double ll = ll_trace.empty() ? -kInf : ll_trace.back();
    if (ll > best.report.log_likelihood) {
      best.weights = p;
      best.sigmas = sigma;
      best.report.log_likelihood = ll;
      best.report.iterations = iter;
      best.report.converged = converged;
      best.ll_trace = std::move(ll_trace);
    }
  }
  // Deterministic component order: sigma ascending.
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return best.sigmas[a] < best.sigmas[b];
  });
  MixtureFit out = best;
  for (std::size_t j = 0; j < m; ++j) {
    out.weights[j] = best.weights[idx[j]];
    out.sigmas[j] = best.sigmas[idx[j]];
  }
  return out;
}

std::pair<PiecewiseMixture, FitReport> fit_piecewise(std::vector<double> data,
                                                     const FitConfig& config) {
  std::vector<double> cuts = config.cuts;
  std::sort(data.begin(), data.end());
  if (cuts.empty()) {
    for (double q : config.cut_quantiles) {
      require(q > 0.0 && q < 1.0, "cut quantile outside (0,1)");
      cuts.push_back(
          data[static_cast<std::size_t>(q * static_cast<double>(data.size()))]);
    }
    std::sort(cuts.begin(), cuts.end());
  }
  const std::size_t k = cuts.size() + 1;
  require(data.size() >= 10 * k, "need at least 10 points per piece");
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    require(cuts[i] < cuts[i + 1], "cuts must be strictly increasing");
  require(data.front() >= 0.0, "data must be nonnegative");

  std::vector<PieceSpec> specs = config.pieces;
  if (specs.empty()) specs.assign(k, PieceSpec{});
  require(specs.size() == k, "piece spec count must match piece count");

  std::vector<double> pi = fit_piece_weights(data, cuts);

  PiecewiseMixture pw;
  pw.weights = pi;
  FitReport report;
  report.piece_counts.resize(k);
  report.log_likelihood = 0.0;

  std::size_t begin = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double lo = (i == 0) ? 0.0 : cuts[i - 1];
    double hi = (i + 1 == k) ? kInf : cuts[i];
    std::size_t end = begin;
    while (end < data.size() && data[end] < hi) ++end;
    std::vector<double> piece_data(data.begin() + begin, data.begin() + end);
    report.piece_counts[i] = piece_data.size();
    if (piece_data.empty())
      throw std::invalid_argument(
          "fitting: empty piece on [" + std::to_string(lo) + ", " +
          (std::isinf(hi) ? std::string("inf") : std::to_string(hi)) + ")");
    double n_i = static_cast<double>(piece_data.size());
    report.log_likelihood += n_i * std::log(pi[i]);
    switch (specs[i].family) {
      case PieceFamily::Exponential: {
        double rate = fit_bounded_exponential(piece_data, lo, hi);
        pw.pieces.push_back(BoundedExponential{rate, lo, hi});
        report.log_likelihood += bounded_exp_loglik(piece_data, lo, hi, rate);
        break;
      }
      case PieceFamily::Normal: {
        double sigma = fit_bounded_normal(piece_data, lo, hi);
        pw.pieces.push_back(BoundedNormal{sigma, lo, hi});
        report.log_likelihood +=
            bounded_normal_loglik(piece_data, lo, hi, sigma);
        break;
      }
      case PieceFamily::MixtureNormal: {
        MixtureFit mf =
            fit_mixture_em(piece_data, lo, hi, specs[i].components, config);
        pw.pieces.push_back(
            MixtureBoundedNormal{mf.weights, mf.sigmas, lo, hi});
        report.log_likelihood += mf.report.log_likelihood;
        report.iterations = std::max(report.iterations, mf.report.iterations);
        report.converged = report.converged && mf.report.converged;
        break;
      }
    }
    begin = end;
  }
  validate(Distribution{pw});
  return {pw, report};
}

SingleBaselines fit_single_baselines(const std::vector<double>& data) {
  require(data.size() >= 2, "need at least 2 points");
  double m = mean_of(data);
  SingleBaselines out;
  out.exponential = BoundedExponential{1.0 / m, 0.0, kInf};
  double xm = *std::min_element(data.begin(), data.end());
  require(xm > 0.0, "Pareto needs strictly positive data");
  double logsum = 0.0;
  for (double x : data) logsum += std::log(x / xm);
  require(logsum > 0.0, "degenerate data for Pareto shape");
  out.pareto =
      Pareto{xm, static_cast<double>(data.size()) / logsum};
  return out;
}

}  // namespace accel
