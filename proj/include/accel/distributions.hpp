#pragma once

#include <variant>
#include <vector>

#include "accel/math.hpp"

namespace accel {

// --- truncated-family primitives --------------------------------------
// These accept any real rate / mean so that exponentially tilted pieces
// can reuse them; the public distribution types constrain their own
// parameters via validate().

double trunc_exp_pdf(double rate, double lo, double hi, double x);
double trunc_exp_cdf(double rate, double lo, double hi, double x);
double trunc_exp_icdf(double rate, double lo, double hi, double y);
double trunc_exp_mean(double rate, double lo, double hi);

double trunc_norm_pdf(double mu, double sigma, double lo, double hi, double x);
double trunc_norm_cdf(double mu, double sigma, double lo, double hi, double x);
double trunc_norm_icdf(double mu, double sigma, double lo, double hi, double y);
double trunc_norm_mean(double mu, double sigma, double lo, double hi);

// --- domain types ------------------------------------------------------

struct BoundedExponential {
  double rate = 1.0;
  double lower = 0.0;
  double upper = kInf;
};

// Zero-mean normal truncated to [lower, upper).
struct BoundedNormal {
  double sigma = 1.0;
  double lower = 0.0;
  double upper = kInf;
};

// Mixture of zero-mean normals sharing one truncation interval.
struct MixtureBoundedNormal {
  std::vector<double> weights;
  std::vector<double> sigmas;
  double lower = 0.0;
  double upper = kInf;
};

struct Pareto {
  double scale = 1.0;  // x_m
  double shape = 1.0;  // a
};

using Piece =
    std::variant<BoundedExponential, BoundedNormal, MixtureBoundedNormal>;

// Piecewise mixture: pieces live on consecutive intervals starting at 0;
// the last interval may be unbounded. Piece bounds are stored inside the
// pieces and must chain exactly.
struct PiecewiseMixture {
  std::vector<double> weights;
  std::vector<Piece> pieces;

  std::size_t piece_count() const { return pieces.size(); }
  // Interior cut points (gamma_1 .. gamma_{k-1}).
  std::vector<double> cuts() const;
};

using Distribution = std::variant<BoundedExponential, BoundedNormal,
                                  MixtureBoundedNormal, Pareto,
                                  PiecewiseMixture>;

// Exponentially tilted view of a base distribution. One theta per piece
// for piecewise bases, a single theta otherwise. piece_weights, when
// non-empty, override the base piece weights (piecewise bases only).
struct TiltedDistribution {
  Distribution base;
  std::vector<double> thetas;
  std::vector<double> piece_weights;
};

// Anything that can serve as a sampling measure.
using AnyDistribution = std::variant<Distribution, TiltedDistribution>;

// --- piece-level operations (theta = 0 reproduces the base exactly) ----

double piece_pdf(const Piece& p, double theta, double x);
double piece_cdf(const Piece& p, double theta, double x);
double piece_icdf(const Piece& p, double theta, double y);
double piece_mean(const Piece& p, double theta);
double piece_lower(const Piece& p);
double piece_upper(const Piece& p);
// Whether theta is an admissible tilt for this piece.
bool piece_tilt_admissible(const Piece& p, double theta);

// --- distribution operations -------------------------------------------

void validate(const Distribution& d);

double pdf(const Distribution& d, double x);
double cdf(const Distribution& d, double x);
double inverse_cdf(const Distribution& d, double y);
double sample(const Distribution& d, Rng& rng);
std::vector<double> sample(const Distribution& d, Rng& rng, std::size_t n);

double pdf(const TiltedDistribution& d, double x);
double cdf(const TiltedDistribution& d, double x);
double inverse_cdf(const TiltedDistribution& d, double y);
double sample(const TiltedDistribution& d, Rng& rng);

double pdf(const AnyDistribution& d, double x);
double cdf(const AnyDistribution& d, double x);
double inverse_cdf(const AnyDistribution& d, double y);
double sample(const AnyDistribution& d, Rng& rng);

// Builds a tilted distribution, checking theta admissibility and, for
// piecewise bases, absolute continuity of the base w.r.t. the tilted
// piece weights. thetas: one per piece (or one for single bases).
TiltedDistribution tilt(const Distribution& d, const std::vector<double>& thetas,
                        const std::vector<double>& piece_weights = {});

// Radon-Nikodym weight dF/dF* at x. Throws if the accelerated density
// vanishes where the original is positive.
double likelihood_ratio(const Distribution& original,
                        const AnyDistribution& accelerated, double x);

}  // namespace accel
