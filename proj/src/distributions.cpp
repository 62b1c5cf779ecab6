#include "accel/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace accel {

// --- truncated exponential ---------------------------------------------

double trunc_exp_pdf(double rate, double lo, double hi, double x) {
  if (x < lo || x >= hi) return 0.0;
  double width = hi - lo;
  if (rate == 0.0) return 1.0 / width;  // uniform limit
  // norm = 1 - exp(-rate*width), same sign as rate
  double norm = exp_diff_scaled(rate, width);
  return rate * std::exp(-rate * (x - lo)) / norm;
}

double trunc_exp_cdf(double rate, double lo, double hi, double x) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  double width = hi - lo;
  if (rate == 0.0) return (x - lo) / width;
  return exp_diff_scaled(rate, x - lo) / exp_diff_scaled(rate, width);
}

double trunc_exp_icdf(double rate, double lo, double hi, double y) {
  if (y < 0.0 || y >= 1.0)
    throw std::domain_error("trunc_exp_icdf: y outside [0,1)");
  double width = hi - lo;
  if (rate == 0.0) return lo + y * width;
  double norm = -exp_diff_scaled(rate, width);  // expm1(-rate*width)
  double x = lo - std::log1p(y * norm) / rate;
  return std::min(std::max(x, lo), hi);
}

double trunc_exp_mean(double rate, double lo, double hi) {
  double width = hi - lo;
  if (rate == 0.0) return lo + 0.5 * width;
  if (std::isinf(width)) return lo + 1.0 / rate;
  double norm = exp_diff_scaled(rate, width);  // 1 - e^{-r w}
  return lo + 1.0 / rate - width * (1.0 - norm) / norm;
}

// --- truncated normal ---------------------------------------------------

double trunc_norm_pdf(double mu, double sigma, double lo, double hi,
                      double x) {
  if (x < lo || x >= hi) return 0.0;
  double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
  double z = normal_cdf_diff(a, b);
  return normal_pdf((x - mu) / sigma) / (sigma * z);
}

double trunc_norm_cdf(double mu, double sigma, double lo, double hi,
                      double x) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
  double xs = (x - mu) / sigma;
  return normal_cdf_diff(a, xs) / normal_cdf_diff(a, b);
}

double trunc_norm_icdf(double mu, double sigma, double lo, double hi,
                       double y) {
  if (y < 0.0 || y >= 1.0)
    throw std::domain_error("trunc_norm_icdf: y outside [0,1)");
  double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
  double z;
  if (a >= 0.0) {
    // Right tail: work with survival functions for precision.
    double sa = normal_sf(a);
    double sb = std::isinf(b) ? 0.0 : normal_sf(b);
    z = -normal_icdf(sa - y * (sa - sb));
  } else if (b <= 0.0) {
    double ca = normal_cdf(a), cb = normal_cdf(b);
    z = normal_icdf(ca + y * (cb - ca));
  } else {
    double ca = normal_cdf(a);
    z = normal_icdf(ca + y * normal_cdf_diff(a, b));
  }
  double x = mu + sigma * z;
  return std::min(std::max(x, lo), hi);
}

double trunc_norm_mean(double mu, double sigma, double lo, double hi) {
  double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
  double z = normal_cdf_diff(a, b);
  double pb = std::isinf(b) ? 0.0 : normal_pdf(b);
  return mu + sigma * (normal_pdf(a) - pb) / z;
}

// --- mixture helpers ----------------------------------------------------

namespace {

// Tilted component weights q_j proportional to p_j * E_j[e^{theta X}],
// computed in log space. theta == 0 returns the stored weights untouched
// so an identity tilt is bit-exact.
std::vector<double> mixture_tilt_weights(const MixtureBoundedNormal& m,
                                         double theta) {
  if (theta == 0.0) return m.weights;
  std::size_t k = m.weights.size();
  std::vector<double> logq(k);
  double max_lq = -kInf;
  for (std::size_t j = 0; j < k; ++j) {
    double s = m.sigmas[j];
    double mu = theta * s * s;
    double a0 = m.lower / s, b0 = m.upper / s;
    double at = (m.lower - mu) / s, bt = (m.upper - mu) / s;
    double logc = 0.5 * theta * theta * s * s +
                  std::log(normal_cdf_diff(at, bt)) -
                  std::log(normal_cdf_diff(a0, b0));
    logq[j] = (m.weights[j] > 0.0 ? std::log(m.weights[j]) : -kInf) + logc;
    max_lq = std::max(max_lq, logq[j]);
  }
  std::vector<double> q(k);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    q[j] = std::exp(logq[j] - max_lq);
    sum += q[j];
  }
  for (double& v : q) v /= sum;
  return q;
}

double mixture_pdf(const MixtureBoundedNormal& m, double theta, double x) {
  if (x < m.lower || x >= m.upper) return 0.0;
  auto q = mixture_tilt_weights(m, theta);
  double f = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    double mu = theta * m.sigmas[j] * m.sigmas[j];
    f += q[j] * trunc_norm_pdf(mu, m.sigmas[j], m.lower, m.upper, x);
  }
  return f;
}

double mixture_cdf(const MixtureBoundedNormal& m, double theta, double x) {
  if (x <= m.lower) return 0.0;
  if (x >= m.upper) return 1.0;
  auto q = mixture_tilt_weights(m, theta);
  double f = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    double mu = theta * m.sigmas[j] * m.sigmas[j];
    f += q[j] * trunc_norm_cdf(mu, m.sigmas[j], m.lower, m.upper, x);
  }
  return f;
}

// No closed form: bracketed root find on the monotone CDF, tolerance
// 1e-12 in y.
double mixture_icdf(const MixtureBoundedNormal& m, double theta, double y) {
  if (y < 0.0 || y >= 1.0)
    throw std::domain_error("mixture icdf: y outside [0,1)");
  if (y == 0.0) return m.lower;
  auto q = mixture_tilt_weights(m, theta);
  double lo = kInf, hi = -kInf;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] <= 0.0) continue;
    double mu = theta * m.sigmas[j] * m.sigmas[j];
    double xj = trunc_norm_icdf(mu, m.sigmas[j], m.lower, m.upper, y);
    lo = std::min(lo, xj);
    hi = std::max(hi, xj);
  }
  if (lo >= hi) return lo;
  return solve_increasing([&](double x) { return mixture_cdf(m, theta, x); },
                          y, lo, hi, 1e-12);
}

double mixture_mean(const MixtureBoundedNormal& m, double theta) {
  auto q = mixture_tilt_weights(m, theta);
  double mean = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    double mu = theta * m.sigmas[j] * m.sigmas[j];
    mean += q[j] * trunc_norm_mean(mu, m.sigmas[j], m.lower, m.upper);
  }
  return mean;
}

}  // namespace

// --- piece dispatch -----------------------------------------------------

double piece_pdf(const Piece& p, double theta, double x) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoundedExponential>)
          return trunc_exp_pdf(d.rate - theta, d.lower, d.upper, x);
        else if constexpr (std::is_same_v<T, BoundedNormal>)
          return trunc_norm_pdf(theta * d.sigma * d.sigma, d.sigma, d.lower,
                                d.upper, x);
        else
          return mixture_pdf(d, theta, x);
      },
      p);
}

double piece_cdf(const Piece& p, double theta, double x) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoundedExponential>)
          return trunc_exp_cdf(d.rate - theta, d.lower, d.upper, x);
        else if constexpr (std::is_same_v<T, BoundedNormal>)
          return trunc_norm_cdf(theta * d.sigma * d.sigma, d.sigma, d.lower,
                                d.upper, x);
        else
          return mixture_cdf(d, theta, x);
      },
      p);
}

double piece_icdf(const Piece& p, double theta, double y) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoundedExponential>)
          return trunc_exp_icdf(d.rate - theta, d.lower, d.upper, y);
        else if constexpr (std::is_same_v<T, BoundedNormal>)
          return trunc_norm_icdf(theta * d.sigma * d.sigma, d.sigma, d.lower,
                                 d.upper, y);
        else
          return mixture_icdf(d, theta, y);
      },
      p);
}

double piece_mean(const Piece& p, double theta) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoundedExponential>)
          return trunc_exp_mean(d.rate - theta, d.lower, d.upper);
        else if constexpr (std::is_same_v<T, BoundedNormal>)
          return trunc_norm_mean(theta * d.sigma * d.sigma, d.sigma, d.lower,
                                 d.upper);
        else
          return mixture_mean(d, theta);
      },
      p);
}

double piece_lower(const Piece& p) {
  return std::visit([](const auto& d) { return d.lower; }, p);
}

double piece_upper(const Piece& p) {
  return std::visit([](const auto& d) { return d.upper; }, p);
}

bool piece_tilt_admissible(const Piece& p, double theta) {
  // On a finite interval every tilt normalizes; an unbounded exponential
  // piece needs theta < rate. Normal tails absorb any linear tilt.
  if (const auto* e = std::get_if<BoundedExponential>(&p)) {
    if (std::isinf(e->upper)) return theta < e->rate;
  }
  return true;
}

// --- validation ---------------------------------------------------------

namespace {

void check(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument("invalid distribution: " + msg);
}

void validate_simplex(const std::vector<double>& w, const std::string& what) {
  check(!w.empty(), what + " empty");
  double sum = 0.0;
  for (double v : w) {
    check(v >= 0.0, what + " has negative entry");
    sum += v;
  }
  check(std::abs(sum - 1.0) < 1e-9, what + " does not sum to 1");
}

void validate_piece(const Piece& p) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        check(d.lower >= 0.0 && d.lower < d.upper, "bounds out of order");
        if constexpr (std::is_same_v<T, BoundedExponential>) {
          check(d.rate > 0.0, "exponential rate must be positive");
        } else if constexpr (std::is_same_v<T, BoundedNormal>) {
          check(d.sigma > 0.0, "normal sigma must be positive");
        } else {
          check(d.weights.size() == d.sigmas.size(),
                "mixture weights/sigmas size mismatch");
          validate_simplex(d.weights, "mixture weights");
          for (double s : d.sigmas) check(s > 0.0, "mixture sigma <= 0");
        }
      },
      p);
}

}  // namespace

void validate(const Distribution& d) {
  std::visit(
      [](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Pareto>) {
          check(dist.scale > 0.0 && dist.shape > 0.0,
                "pareto parameters must be positive");
        } else if constexpr (std::is_same_v<T, PiecewiseMixture>) {
          check(!dist.pieces.empty(), "piecewise has no pieces");
          check(dist.weights.size() == dist.pieces.size(),
                "piecewise weights/pieces size mismatch");
          validate_simplex(dist.weights, "piecewise weights");
          check(piece_lower(dist.pieces.front()) == 0.0,
                "first piece must start at 0");
          for (std::size_t i = 0; i < dist.pieces.size(); ++i) {
            validate_piece(dist.pieces[i]);
            if (i + 1 < dist.pieces.size())
              check(piece_upper(dist.pieces[i]) ==
                        piece_lower(dist.pieces[i + 1]),
                    "piece bounds do not chain");
          }
          check(std::isinf(piece_upper(dist.pieces.back())),
                "last piece must be unbounded");
        } else {
          validate_piece(Piece{dist});
        }
      },
      d);
}

std::vector<double> PiecewiseMixture::cuts() const {
  std::vector<double> c;
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
    c.push_back(piece_upper(pieces[i]));
  return c;
}

// --- base distribution ops ----------------------------------------------

namespace {

double pareto_pdf(const Pareto& p, double x) {
  if (x < p.scale) return 0.0;
  return p.shape * std::pow(p.scale / x, p.shape) / x;
}

double pareto_cdf(const Pareto& p, double x) {
  if (x <= p.scale) return 0.0;
  return -std::expm1(p.shape * std::log(p.scale / x));
}

double pareto_icdf(const Pareto& p, double y) {
  if (y < 0.0 || y >= 1.0)
    throw std::domain_error("pareto icdf: y outside [0,1)");
  return p.scale * std::exp(-std::log1p(-y) / p.shape);
}

// pdf/cdf/icdf of a (possibly piecewise) distribution under per-piece
// tilts; thetas all zero reproduces the untilted case exactly.
struct PiecewiseView {
  const std::vector<double>* weights;
  const std::vector<Piece>* pieces;
  const std::vector<double>* thetas;  // nullptr = untilted
  double theta(std::size_t i) const { return thetas ? (*thetas)[i] : 0.0; }
};

double pw_pdf(const PiecewiseView& v, double x) {
  for (std::size_t i = 0; i < v.pieces->size(); ++i) {
    const Piece& p = (*v.pieces)[i];
    if (x >= piece_lower(p) && x < piece_upper(p))
      return (*v.weights)[i] * piece_pdf(p, v.theta(i), x);
  }
  return 0.0;
}

double pw_cdf(const PiecewiseView& v, double x) {
  if (x <= piece_lower((*v.pieces)[0])) return 0.0;
  double cum = 0.0;
  for (std::size_t i = 0; i < v.pieces->size(); ++i) {
    const Piece& p = (*v.pieces)[i];
    if (x < piece_upper(p))
      return cum + (*v.weights)[i] * piece_cdf(p, v.theta(i), x);
    cum += (*v.weights)[i];
  }
  return 1.0;
}

double pw_icdf(const PiecewiseView& v, double y) {
  if (y < 0.0 || y >= 1.0)
    throw std::domain_error("piecewise icdf: y outside [0,1)");
  double cum = 0.0;
  for (std::size_t i = 0; i < v.pieces->size(); ++i) {
    double w = (*v.weights)[i];
    if (w > 0.0 && y < cum + w)
      return piece_icdf((*v.pieces)[i], v.theta(i), (y - cum) / w);
    cum += w;
  }
  // y == cumulative total within rounding: top of the last positive piece.
  for (std::size_t i = v.pieces->size(); i-- > 0;)
    if ((*v.weights)[i] > 0.0)
      return piece_icdf((*v.pieces)[i], v.theta(i),
                        std::nextafter(1.0, 0.0));
  throw std::logic_error("piecewise icdf: all weights zero");
}

}  // namespace

double pdf(const Distribution& d, double x) {
  return std::visit(
      [&](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Pareto>)
          return pareto_pdf(dist, x);
        else if constexpr (std::is_same_v<T, PiecewiseMixture>)
          return pw_pdf({&dist.weights, &dist.pieces, nullptr}, x);
        else
          return piece_pdf(Piece{dist}, 0.0, x);
      },
      d);
}

double cdf(const Distribution& d, double x) {
  return std::visit(
      [&](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Pareto>)
          return pareto_cdf(dist, x);
        else if constexpr (std::is_same_v<T, PiecewiseMixture>)
          return pw_cdf({&dist.weights, &dist.pieces, nullptr}, x);
        else
          return piece_cdf(Piece{dist}, 0.0, x);
      },
      d);
}

double inverse_cdf(const Distribution& d, double y) {
  return std::visit(
      [&](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Pareto>)
          return pareto_icdf(dist, y);
        else if constexpr (std::is_same_v<T, PiecewiseMixture>)
          return pw_icdf({&dist.weights, &dist.pieces, nullptr}, y);
        else
          return piece_icdf(Piece{dist}, 0.0, y);
      },
      d);
}

double sample(const Distribution& d, Rng& rng) {
  return inverse_cdf(d, u01(rng));
}

std::vector<double> sample(const Distribution& d, Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = sample(d, rng);
  return out;
}

// --- tilted distribution ops --------------------------------------------

namespace {

PiecewiseView tilted_view(const TiltedDistribution& d,
                          std::vector<double>& weight_scratch,
                          std::vector<Piece>& piece_scratch) {
  if (const auto* pw = std::get_if<PiecewiseMixture>(&d.base)) {
    const auto* w = d.piece_weights.empty() ? &pw->weights : &d.piece_weights;
    return {w, &pw->pieces, &d.thetas};
  }
  // Single-piece base: wrap it so one code path serves both.
  piece_scratch.clear();
  std::visit(
      [&](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Pareto> ||
                      std::is_same_v<T, PiecewiseMixture>) {
          throw std::logic_error("tilted view: unsupported base");
        } else {
          piece_scratch.push_back(Piece{dist});
        }
      },
      d.base);
  weight_scratch.assign(1, 1.0);
  return {&weight_scratch, &piece_scratch, &d.thetas};
}

}  // namespace

double pdf(const TiltedDistribution& d, double x) {
  std::vector<double> ws;
  std::vector<Piece> ps;
  return pw_pdf(tilted_view(d, ws, ps), x);
}

double cdf(const TiltedDistribution& d, double x) {
  std::vector<double> ws;
  std::vector<Piece> ps;
  return pw_cdf(tilted_view(d, ws, ps), x);
}

double inverse_cdf(const TiltedDistribution& d, double y) {
  std::vector<double> ws;
  std::vector<Piece> ps;
  return pw_icdf(tilted_view(d, ws, ps), y);
}

double sample(const TiltedDistribution& d, Rng& rng) {
  return inverse_cdf(d, u01(rng));
}

double pdf(const AnyDistribution& d, double x) {
  return std::visit([&](const auto& v) { return pdf(v, x); }, d);
}
double cdf(const AnyDistribution& d, double x) {
  return std::visit([&](const auto& v) { return cdf(v, x); }, d);
}
double inverse_cdf(const AnyDistribution& d, double y) {
  return std::visit([&](const auto& v) { return inverse_cdf(v, y); }, d);
}
double sample(const AnyDistribution& d, Rng& rng) {
  return std::visit([&](const auto& v) { return sample(v, rng); }, d);
}

TiltedDistribution tilt(const Distribution& d,
                        const std::vector<double>& thetas,
                        const std::vector<double>& piece_weights) {
  validate(d);
  if (std::holds_alternative<Pareto>(d))
    throw std::invalid_argument("tilt: Pareto has no finite MGF, not tiltable");
  if (const auto* pw = std::get_if<PiecewiseMixture>(&d)) {
    if (thetas.size() != pw->pieces.size())
      throw std::invalid_argument("tilt: need one theta per piece");
    for (std::size_t i = 0; i < pw->pieces.size(); ++i)
      if (!piece_tilt_admissible(pw->pieces[i], thetas[i]))
        throw std::invalid_argument(
            "tilt: inadmissible theta=" + std::to_string(thetas[i]) +
            " for unbounded exponential piece " + std::to_string(i));
    if (!piece_weights.empty()) {
      if (piece_weights.size() != pw->pieces.size())
        throw std::invalid_argument("tilt: piece weight count mismatch");
      validate_simplex(piece_weights, "tilted piece weights");
      for (std::size_t i = 0; i < pw->pieces.size(); ++i)
        if (piece_weights[i] == 0.0 && pw->weights[i] > 0.0)
          throw std::invalid_argument(
              "tilt: zero accelerated weight on piece with positive mass");
    }
  } else {
    if (thetas.size() != 1)
      throw std::invalid_argument("tilt: single base takes exactly one theta");
    if (!piece_weights.empty())
      throw std::invalid_argument("tilt: piece weights need a piecewise base");
    Piece p = std::visit(
        [](const auto& dist) -> Piece {
          using T = std::decay_t<decltype(dist)>;
          if constexpr (std::is_same_v<T, Pareto> ||
                        std::is_same_v<T, PiecewiseMixture>)
            throw std::logic_error("unreachable");
          else
            return Piece{dist};
        },
        d);
    if (!piece_tilt_admissible(p, thetas[0]))
      throw std::invalid_argument(
          "tilt: inadmissible theta=" + std::to_string(thetas[0]) +
          " (requires theta < rate for unbounded exponential)");
  }
  return TiltedDistribution{d, thetas, piece_weights};
}

double likelihood_ratio(const Distribution& original,
                        const AnyDistribution& accelerated, double x) {
  double f = pdf(original, x);
  if (f == 0.0) return 0.0;
  double g = pdf(accelerated, x);
  if (g <= 0.0)
    throw std::runtime_error(
        "likelihood_ratio: accelerated density vanishes at x=" +
        std::to_string(x) + " where the original is positive");
  return f / g;
}

}  // namespace accel
