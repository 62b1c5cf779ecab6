#include "accel/math.hpp"

#include <cmath>
#include <stdexcept>

namespace accel {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
}  // namespace

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / kSqrt2Pi;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_cdf_diff(double a, double b) {
  if (a > b) return 0.0;
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return normal_cdf(b) - normal_cdf(a);
}

// Acklam's rational approximation followed by one Halley step; accurate to
// machine precision over (0,1).
double normal_icdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw std::domain_error("normal_icdf: p outside [0,1]");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement.
  double e = normal_cdf(x) - p;
  double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

double exp_diff_scaled(double rate, double width) {
  return -std::expm1(-rate * width);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = splitmix64(seed ^ splitmix64(stream));
  return Rng(s);
}

double u01(Rng& rng) {
  // 53-bit mantissa, shifted into (0,1).
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double brent_minimize(const std::function<double(double)>& f, double a,
                      double b, double rel_tol, int max_iter) {
  const double golden = 0.3819660112501051;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    double m = 0.5 * (a + b);
    double tol = rel_tol * std::abs(x) + 1e-300;
    double tol2 = 2.0 * tol;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0.0, q = 0.0, r = 0.0;
    if (std::abs(e) > tol) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol : -tol;
      } else {
        e = (x < m) ? b - x : a - x;
        d = golden * e;
      }
    } else {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    double u = (std::abs(d) >= tol) ? x + d : x + ((d > 0.0) ? tol : -tol);
    double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

double solve_increasing(const std::function<double(double)>& f, double target,
                        double lo, double hi, double ytol, int max_iter) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo > 0.0 && flo < ytol) return lo;
  if (fhi < 0.0 && -fhi < ytol) return hi;
  if (flo > 0.0 || fhi < 0.0)
    throw std::invalid_argument("solve_increasing: target not bracketed");
  double a = lo, b = hi, fa = flo, fb = fhi;
  double x = 0.5 * (a + b);
  for (int i = 0; i < max_iter; ++i) {
    // Secant proposal, clipped to the bracket interior.
    double xs = (fb != fa) ? a - fa * (b - a) / (fb - fa) : 0.5 * (a + b);
    double mid = 0.5 * (a + b);
    x = (xs > a && xs < b) ? 0.5 * (xs + mid) : mid;
    double fx = f(x) - target;
    if (std::abs(fx) < ytol || b - a < 1e-15 * (1.0 + std::abs(x))) return x;
    if (fx < 0.0) { a = x; fa = fx; } else { b = x; fb = fx; }
  }
  return x;
}

}  // namespace accel
