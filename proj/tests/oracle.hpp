#pragma once

// Test-only numerical oracles: adaptive quadrature, KS statistic and
// bootstrap standard errors. Independent of the library's analytic
// CDF/PDF code paths except where a test explicitly compares the two.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double fa, double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a,
                    double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, lm, flm);
  double right = simpson(f, m, fm, b, fb, rm, frm);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on a finite interval.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  return detail::adapt(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

// Integral over [a, inf) via the substitution x = a + t/(1-t).
inline double integrate_to_inf(const std::function<double(double)>& f,
                               double a, double tol = 1e-12) {
  auto g = [&](double t) {
    double omt = 1.0 - t;
    double x = a + t / omt;
    return f(x) / (omt * omt);
  };
  return integrate(g, 0.0, 1.0 - 1e-12, tol);
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> xs,
                           const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double F = cdf(xs[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Bootstrap standard error of a statistic of the sample.
template <typename Stat, typename Rng>
double bootstrap_se(const std::vector<double>& data, Stat stat, Rng& rng,
                    int resamples = 200) {
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<double> re(data.size());
  for (int r = 0; r < resamples; ++r) {
    for (auto& v : re) v = data[rng() % data.size()];
    stats.push_back(stat(re));
  }
  return sample_std(stats);
}

}  // namespace oracle
