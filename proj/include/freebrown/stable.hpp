#pragma once

// The stable Brown measures mu_beta: S(z) = c (-z)^beta / (1 + z) and the
// closed forms that follow from the radial quantile t^{1/2} (1 - t)^{-beta/2}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "freebrown/error.hpp"
#include "freebrown/numeric.hpp"
#include "freebrown/semigroup.hpp"
#include "freebrown/transforms.hpp"

namespace freebrown {

struct StableParams {
  double beta = 0.0;
  double c = 1.0;

  void validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::OutOfDomain, "beta must be >= 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::OutOfDomain, "c must be > 0");
  }
};

/// c (-z)^beta / (1 + z) on (-1, 0); real powers via exp(beta log(-z)).
inline double stable_s(const StableParams& p, double z) {
  p.validate();
  if (!(z > -1.0 && z < 0.0)) throw Error(ErrorCode::OutOfDomain, "stable S needs z in (-1, 0)");
  const double power = p.beta == 0.0 ? 1.0 : std::exp(p.beta * std::log(-z));
  return p.c * power / (1.0 + z);
}

inline STransformTable stable_s_table(const StableParams& p) {
  p.validate();
  return STransformTable(
      -1.0, [p](double z) { return stable_s(p, z); }, Provenance::analytic,
      {p.beta == 0.0 ? p.c : 0.0, ExtendedReal::infinite()});
}

/// Radius enclosing mass t under mu_beta.
inline double mu_beta_quantile(double beta, double t) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::OutOfDomain, "beta must be >= 0");
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::OutOfDomain, "t must lie in (0, 1)");
  return std::sqrt(t) * std::exp(-0.5 * beta * std::log1p(-t));
}

struct RadialDensity {
  double radial;  // f_beta(r) = d/dr mu_beta(B(0, r))
  double planar;  // rho_beta(r) = f_beta(r) / (2 pi r)
};

/// Density of mu_beta at radius r, by inverting r(t) and differentiating.
inline RadialDensity mu_beta_radial_density(double beta, double r) {
  if (!(beta > 0.0)) throw Error(ErrorCode::OutOfDomain, "radial density needs beta > 0");
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::OutOfDomain, "radius must be positive");
  // t = r^2 (1 - t)^beta, so t = r^2 to double precision here.
  if (r < 1e-8) return {2.0 * r, 1.0 / std::numbers::pi};
  // Solve in y = log(1 - t) so that 1 - t keeps full precision in the tail:
  // log r = log(1 - e^y)/2 - beta y / 2 is decreasing in y < 0.
  const double log_r = std::log(r);
  const std::function<double(double)> f = [beta](double y) {
    return -(0.5 * std::log(-std::expm1(y)) - 0.5 * beta * y);
  };
  const double y = solve_increasing_on_negative_axis(f, -log_r);
  const double t = -std::expm1(y);
  const double v_pow = std::exp(-0.5 * beta * y);  // (1 - t)^{-beta/2}
  const double dr_dt = 0.5 / std::sqrt(t) * v_pow + 0.5 * beta * std::sqrt(t) * std::exp(-(0.5 * beta + 1.0) * y);
  const double radial = 1.0 / dr_dt;
  return {radial, radial / (2.0 * std::numbers::pi * r)};
}

/// E|Z|^k under mu_beta: B(1 + k/2, 1 - beta k/2), infinite for beta k >= 2.
inline ExtendedReal mu_beta_abs_moment(double beta, double k) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::OutOfDomain, "beta must be >= 0");
  if (!(k >= 0.0)) throw Error(ErrorCode::OutOfDomain, "moment order must be >= 0");
  if (beta * k >= 2.0) return ExtendedReal::infinite();
  return ExtendedReal::finite(boost::math::beta(1.0 + 0.5 * k, 1.0 - 0.5 * beta * k));
}

/// Fractional moment of nu_beta, the law of |x|^2, for -1/2 < gamma < 1/(1 + beta).
inline ExtendedReal nu_beta_moment(double beta, double gamma) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::OutOfDomain, "beta must be >= 0");
  if (gamma == 0.0) return ExtendedReal::finite(1.0);
  if (!(gamma > -0.5 && gamma < 1.0 / (1.0 + beta))) return ExtendedReal::infinite();
  const double x = std::numbers::pi * gamma;
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return ExtendedReal::finite(sinc * boost::math::beta(1.0 + 2.0 * gamma, 1.0 - (1.0 + beta) * gamma));
}

/// alpha_s = s^{(1 + beta)/2}: mu_beta^{boxplus s}(A) = mu_beta(alpha_s^{-1} A).
inline double stable_scaling_factor(double beta, double s) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::OutOfDomain, "beta must be >= 0");
  if (!(s > 0.0)) throw Error(ErrorCode::OutOfDomain, "s must be > 0");
  return std::exp(0.5 * (1.0 + beta) * std::log(s));
}

/// Max relative residual of the stability functional equation
/// compress_s(S, s) = s^{-(1+beta)} S, together with the matching radius
/// dilation of the quantiles by alpha_s.
inline double stability_residual(double beta, double s, std::size_t nodes = kDefaultQuantileNodes) {
  if (!(s >= 1.0)) throw Error(ErrorCode::OutOfDomain, "s must be >= 1");
  const StableParams p{beta, 1.0};
  const STransformTable base = stable_s_table(p);
  const STransformTable compressed = compress_s(base, s);
  const double lambda = std::exp(-(1.0 + beta) * std::log(s));
  double residual = 0.0;
  for (double z : chebyshev_nodes(-1.0, 0.0, nodes)) {
    const double expected = lambda * base(z);
    residual = std::max(residual, std::abs(compressed(z) - expected) / expected);
  }
  const RadialBrownMeasure b_s = brown_from_s(compressed, 0.0, nodes);
  const RadialBrownMeasure b = brown_from_s(base, 0.0, nodes);
  const double alpha = stable_scaling_factor(beta, s);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double expected = alpha * b.q_values()[i];
    residual = std::max(residual, std::abs(b_s.q_values()[i] - expected) / expected);
  }
  return residual;
}

/// S-transform of |x y^{-k}|^2 for free circular x, y, assembled from the
/// free Poisson S-transform, inversion and products.
inline STransformTable circular_quotient_s_table(int k) {
  if (k < 0) throw Error(ErrorCode::OutOfDomain, "power k must be >= 0");
  const STransformTable circular = s_table(free_poisson(1.0, 1.0, 3));
  STransformTable result = circular;
  if (k == 0) return result;
  const STransformTable inverse = inverted(circular);
  STransformTable power = inverse;
  for (int i = 1; i < k; ++i) power = multiply(power, inverse);
  return multiply(circular, power);
}

}  // namespace freebrown
