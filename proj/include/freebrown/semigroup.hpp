#pragma once

// Free compression semigroup acting on S-transforms of |x|^2 and the Brown
// measure of an R-diagonal element from its radial quantile
// Q(t) = S(t - 1)^{-1/2}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "freebrown/error.hpp"
#include "freebrown/measures.hpp"
#include "freebrown/numeric.hpp"
#include "freebrown/transforms.hpp"

namespace freebrown {

inline constexpr std::size_t kDefaultQuantileNodes = 512;

/// Which normalization of the compressed element the Brown measure describes:
/// pi_s(x), sqrt(s) pi_s(x) or s pi_s(x).
enum class Scaling { none, sqrt_s, s };

inline std::string to_string(Scaling scaling) {
  switch (scaling) {
    case Scaling::none: return "none";
    case Scaling::sqrt_s: return "sqrt-s";
    case Scaling::s: return "s";
  }
  return "unknown";
}

struct CompressionParams {
  double s = 1.0;
  Scaling scaling = Scaling::sqrt_s;

  void validate() const {
    if (!(s >= 1.0) || !std::isfinite(s)) throw Error(ErrorCode::OutOfDomain, "compression time s must be >= 1");
  }

  /// Radius factor taking the Brown measure of s pi_s(x) to the selected normalization.
  double radius_factor() const {
    switch (scaling) {
      case Scaling::none: return 1.0 / s;
      case Scaling::sqrt_s: return 1.0 / std::sqrt(s);
      case Scaling::s: return 1.0;
    }
    return 1.0;
  }
};

/// Mass of the atom at 0 after compression by s: max(1 - s (1 - delta), 0).
inline double atom_after_compression(double delta, double s) {
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorCode::OutOfDomain, "atom must lie in [0, 1)");
  if (!(s >= 1.0)) throw Error(ErrorCode::OutOfDomain, "compression time s must be >= 1");
  return std::max(1.0 - s * (1.0 - delta), 0.0);
}

/// S_{h_s^2}(z) = (1/s) (1 + z/s) / (1 + z) S_{h^2}(z/s).
inline STransformTable compress_s(const STransformTable& base, double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw Error(ErrorCode::OutOfDomain, "compression time s must be >= 1");
  if (s == 1.0) return base;
  const double left = atom_after_compression(base.atom0(), s) - 1.0;
  return STransformTable(
      left,
      [base, s](double z) {
        const double zs = z / s;
        return (1.0 / s) * (1.0 + zs) / (1.0 + z) * base(zs);
      },
      Provenance::compressed, {base.limits().at_zero / s, ExtendedReal::infinite()});
}

/// S-transform of the free additive power mu^{boxplus s} of a measure on
/// [0, inf) (or of the symmetric nu, on the nu level): (1/s) S(z/s).
inline STransformTable free_power(const STransformTable& base, double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw Error(ErrorCode::OutOfDomain, "power s must be >= 1");
  if (s == 1.0) return base;
  const double left = atom_after_compression(base.atom0(), s) - 1.0;
  const double base_arg = left / s;
  ExtendedReal at_left = ExtendedReal::infinite();
  if (base_arg > base.domain_left()) {
    at_left = ExtendedReal::finite(base(base_arg) / s);
  } else if (base.limits().at_left.is_finite()) {
    at_left = ExtendedReal::finite(base.limits().at_left.value() / s);
  }
  return STransformTable(
      left, [base, s](double z) { return base(z / s) / s; }, Provenance::compressed,
      {base.limits().at_zero / s, at_left});
}

/// Brown measure with radial quantile Q(t) = S(t - 1)^{-1/2} on a Chebyshev
/// grid over (delta, 1). Support radii come from the one-sided limits of S.
inline RadialBrownMeasure brown_from_s(const STransformTable& S, double delta,
                                       std::size_t nodes = kDefaultQuantileNodes) {
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorCode::OutOfDomain, "atom must lie in [0, 1)");
  if (std::abs(S.atom0() - delta) > 1e-10) {
    throw Error(ErrorCode::OutOfDomain, "S domain (" + std::to_string(S.domain_left()) +
                                            ", 0) does not match the atom " + std::to_string(delta));
  }
  if (nodes < 2) throw Error(ErrorCode::Validation, "quantile grid needs at least 2 nodes");
  std::vector<double> t = chebyshev_nodes(delta, 1.0, nodes);
  std::vector<double> q(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double value = S(t[i] - 1.0);
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::NonMonotoneS, "S must be positive and finite inside its domain");
    }
    q[i] = 1.0 / std::sqrt(value);
    if (i > 0 && q[i] < q[i - 1]) {
      if (q[i] < q[i - 1] * (1.0 - 1e-9)) {
        throw Error(ErrorCode::NonMonotoneS, "S is increasing near z = " + std::to_string(t[i] - 1.0));
      }
      q[i] = q[i - 1];
    }
  }
  double r_min = 0.0;
  if (delta == 0.0 && S.limits().at_left.is_finite() && S.limits().at_left.value() > 0.0) {
    r_min = 1.0 / std::sqrt(S.limits().at_left.value());
  }
  double r_max = S.limits().at_zero > 0.0 ? 1.0 / std::sqrt(S.limits().at_zero) : kInf;
  r_min = std::min(r_min, q.front());
  r_max = std::max(r_max, q.back());
  return RadialBrownMeasure(delta, std::move(t), std::move(q), r_min, r_max);
}

/// Brown measure of the compression of x = u h with |x|^2 ~ h2, normalized per p.scaling.
inline RadialBrownMeasure compressed_brown(const PositiveRealMeasure& h2, const CompressionParams& p,
                                           std::size_t nodes = kDefaultQuantileNodes) {
  p.validate();
  const STransformTable base = s_table(h2);
  const STransformTable compressed = compress_s(base, p.s);
  const double delta_s = atom_after_compression(h2.atom0(), p.s);
  return brown_from_s(compressed, delta_s, nodes).scaled(p.radius_factor());
}

struct SupportDescriptor {
  double inner;
  double outer;  // may be infinite
  bool disk() const { return inner == 0.0; }
};

/// Support of mu^{boxplus s} given the Brown measure b of x: the annulus
/// collapses to the disk of radius sqrt(s) * outer radius for every s > 1.
inline SupportDescriptor support_after_compression(const RadialBrownMeasure& b, double s) {
  if (b.atom0() != 0.0) throw Error(ErrorCode::OutOfDomain, "support evolution needs mu({0}) = 0");
  if (!(s >= 1.0)) throw Error(ErrorCode::OutOfDomain, "compression time s must be >= 1");
  if (s == 1.0) return {b.r_min(), b.r_max()};
  return {0.0, std::sqrt(s) * b.r_max()};
}

/// sup over the t-grid of |Q_s(t) - sqrt(t)| for the sqrt(s)-normalized compression.
inline double disk_convergence_gap(const PositiveRealMeasure& h2, double s, std::size_t nodes = kDefaultQuantileNodes) {
  const ExtendedReal m1 = moment(h2, 1.0);
  if (m1.is_infinite() || std::abs(m1.value() - 1.0) > 1e-6) {
    throw Error(ErrorCode::VarianceNotNormalized, "disk convergence needs integral of t dh2 = 1");
  }
  const RadialBrownMeasure b = compressed_brown(h2, {s, Scaling::sqrt_s}, nodes);
  double gap = 0.0;
  for (std::size_t i = 0; i < b.t_grid().size(); ++i) {
    gap = std::max(gap, std::abs(b.q_values()[i] - std::sqrt(b.t_grid()[i])));
  }
  return gap;
}

/// Max relative pointwise residual between compressing by s1 then s2, the
/// same composition routed through the nu level
/// (S_nu^2 = (1+z)/z S_{h^2}, S_{nu_s}(z) = S_nu(z/s)/s) and a single
/// compression by s1 * s2.
inline double semigroup_additivity_check(const PositiveRealMeasure& h2, double s1, double s2,
                                         std::size_t nodes = kDefaultQuantileNodes) {
  if (!(s1 >= 1.0 && s2 >= 1.0)) throw Error(ErrorCode::OutOfDomain, "compression times must be >= 1");
  const STransformTable base = s_table(h2);
  const STransformTable twice = compress_s(compress_s(base, s1), s2);
  const double s = s1 * s2;
  const STransformTable once = compress_s(base, s);

  // nu-level route: S_{nu_s}^2(z) = S_nu(z/s)^2 / s^2 and S_{h_s^2} = z/(1+z) S_{nu_s}^2.
  const auto nu_squared = [&base](double z) { return (1.0 + z) / z * base(z); };
  const auto nu_route = [&](double z) {
    const double zs1 = z / s2;          // after the outer power by s2
    const double z_inner = zs1 / s1;    // after the inner power by s1
    const double nu2 = nu_squared(z_inner) / (s1 * s1) / (s2 * s2);
    return z / (1.0 + z) * nu2;
  };

  double residual = 0.0;
  for (double z : chebyshev_nodes(once.domain_left(), 0.0, nodes)) {
    const double ref = once(z);
    const double scale = std::max(1.0, std::abs(ref));
    residual = std::max(residual, std::abs(twice(z) - ref) / scale);
    residual = std::max(residual, std::abs(nu_route(z) - ref) / scale);
  }
  return residual;
}

}  // namespace freebrown
