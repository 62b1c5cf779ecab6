#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>

namespace accel {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard normal density, CDF, survival function and quantile.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_sf(double x);
// Phi(b) - Phi(a) for a <= b, computed with complementary functions when
// both endpoints sit in the same tail so the difference keeps relative
// precision.
double normal_cdf_diff(double a, double b);
// Quantile of the standard normal, full double precision.
double normal_icdf(double p);

// exp(-r*a) - exp(-r*b) scaled so the leading exponential is factored out:
// returns -expm1(-r*(b-a)), i.e. (exp(-r*a)-exp(-r*b)) / exp(-r*a).
// Valid for b = +inf when r > 0.
double exp_diff_scaled(double rate, double width);

// --- random streams ---------------------------------------------------

using Rng = std::mt19937_64;

// Deterministic sub-stream derivation: one master seed, many independent
// streams. Uses splitmix64 to decorrelate (seed, stream) pairs.
std::uint64_t splitmix64(std::uint64_t x);
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

// Uniform draw on the open interval (0,1).
double u01(Rng& rng);

// --- 1-D solvers ------------------------------------------------------

// Brent minimization of f on [a,b]; returns the argmin.
double brent_minimize(const std::function<double(double)>& f, double a,
                      double b, double rel_tol = 1e-10, int max_iter = 200);

// Root of monotone increasing f(x) = target on [lo,hi]; bisection with
// secant refinement. Requires f(lo) <= target <= f(hi).
double solve_increasing(const std::function<double(double)>& f, double target,
                        double lo, double hi, double ytol = 1e-12,
                        int max_iter = 200);

}  // namespace accel
