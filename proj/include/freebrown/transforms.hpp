#pragma once

// Cauchy, psi, chi, S and R transforms of measures on [0, inf) and of
// symmetric measures, evaluated on the negative real axis.

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "freebrown/error.hpp"
#include "freebrown/measures.hpp"
#include "freebrown/numeric.hpp"

namespace freebrown {

using Complex = std::complex<double>;

namespace detail {

/// Cauchy transform of the free Poisson law, branch with G(z) ~ 1/z at infinity.
inline Complex free_poisson_cauchy(const FreePoissonLaw& law, Complex z) {
  const double a = law.lower_edge();
  const double b = law.upper_edge();
  const Complex p = z + law.scale * (1.0 - law.rate);
  const Complex q = std::sqrt(z - a) * std::sqrt(z - b);
  // (p - q)(p + q) = 4 * scale * z; use whichever form avoids cancellation.
  if (std::abs(p + q) >= std::abs(p - q)) return 2.0 / (p + q);
  return (p - q) / (2.0 * law.scale * z);
}

inline void require_in_domain(double w, double left, const char* what) {
  if (!(w > left && w < 0.0)) {
    throw Error(ErrorCode::OutOfDomain, std::string(what) + ": argument " + std::to_string(w) +
                                            " outside (" + std::to_string(left) + ", 0)");
  }
}

}  // namespace detail

/// G(z) = integral of 1/(z - t). Real z must lie off the support.
inline Complex cauchy(const PositiveRealMeasure& mu, Complex z) {
  if (z.imag() == 0.0) {
    const double x = z.real();
    if (x >= mu.inf_support() && x <= mu.sup_support()) {
      throw Error(ErrorCode::PointOnSupport, "Cauchy transform evaluated on the support");
    }
  }
  if (mu.law()) return detail::free_poisson_cauchy(*mu.law(), z);
  return mu.integrate([z](double t) { return 1.0 / (z - t); });
}

inline double cauchy(const PositiveRealMeasure& mu, double z) { return cauchy(mu, Complex(z, 0.0)).real(); }

inline Complex cauchy(const SymmetricRealMeasure& nu, Complex z) {
  if (z.imag() == 0.0) {
    const double r = nu.positive_part().sup_support();
    if (std::abs(z.real()) <= r) throw Error(ErrorCode::PointOnSupport, "Cauchy transform evaluated on the support");
  }
  return nu.integrate([z](double t) { return 1.0 / (z - t); });
}

/// psi(u) = integral of ut / (1 - ut), u < 0. Increasing with range (atom0 - 1, 0).
inline double psi(const PositiveRealMeasure& mu, double u) {
  if (!(u < 0.0)) throw Error(ErrorCode::OutOfDomain, "psi needs u < 0");
  if (mu.law()) {
    const double z = 1.0 / u;
    return (z * detail::free_poisson_cauchy(*mu.law(), Complex(z, 0.0))).real() - 1.0;
  }
  return mu.integrate([u](double t) { return u * t / (1.0 - u * t); });
}

/// d psi / du = integral of t / (1 - ut)^2.
inline double psi_derivative(const PositiveRealMeasure& mu, double u) {
  return mu.integrate([u](double t) {
    const double d = 1.0 - u * t;
    return t / (d * d);
  });
}

/// chi = inverse of psi on (atom0 - 1, 0).
inline double chi(const PositiveRealMeasure& mu, double w) {
  detail::require_in_domain(w, mu.atom0() - 1.0, "chi");
  const std::function<double(double)> f = [&mu](double u) { return psi(mu, u); };
  if (mu.law()) return solve_increasing_on_negative_axis(f, w);
  const std::function<double(double)> df = [&mu](double u) { return psi_derivative(mu, u); };
  return solve_increasing_on_negative_axis(f, w, &df);
}

/// S(w) = (1 + w) / w * chi(w), computed by inverting psi.
inline double s_transform(const PositiveRealMeasure& mu, double w) {
  if (mu.is_delta_zero()) throw Error(ErrorCode::DeltaZeroMeasure, "S-transform of delta_0 is undefined");
  return (1.0 + w) / w * chi(mu, w);
}

enum class Provenance { analytic, psiInversion, compressed, product };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::psiInversion: return "psiInversion";
    case Provenance::compressed: return "compressed";
    case Provenance::product: return "product";
  }
  return "unknown";
}

/// An S-transform on (domain_left, 0) with domain_left = atom0 - 1, plus the
/// one-sided limits at both ends. The limit at 0 equals 1 / (first moment),
/// which is 0 when the first moment is infinite.
class STransformTable {
 public:
  using Evaluator = std::function<double(double)>;

  struct Limits {
    double at_zero;            // lim_{z -> 0-} S(z), >= 0
    ExtendedReal at_left;      // lim_{z -> domain_left+} S(z)
  };

  STransformTable(double domain_left, Evaluator eval, Provenance provenance, Limits limits,
                  bool point_mass = false)
      : domain_left_(domain_left),
        eval_(std::move(eval)),
        provenance_(provenance),
        limits_(limits),
        point_mass_(point_mass) {
    if (!(domain_left_ >= -1.0 && domain_left_ < 0.0)) {
      throw Error(ErrorCode::OutOfDomain, "S-transform domain must be (delta - 1, 0) with delta in [0, 1)");
    }
  }

  /// Numerically inverted tables snap to the limit at 0 within this distance.
  static constexpr double kEdgeSnap = 1e-9;

  double operator()(double z) const {
    detail::require_in_domain(z, domain_left_, "S-transform");
    if (provenance_ == Provenance::psiInversion && z > -kEdgeSnap) return limits_.at_zero;
    return eval_(z);
  }

  double domain_left() const noexcept { return domain_left_; }
  double atom0() const noexcept { return domain_left_ + 1.0; }
  Provenance provenance() const noexcept { return provenance_; }
  const Limits& limits() const noexcept { return limits_; }
  bool point_mass() const noexcept { return point_mass_; }

 private:
  double domain_left_;
  Evaluator eval_;
  Provenance provenance_;
  Limits limits_;
  bool point_mass_;
};

/// S-transform table of mu. Point masses and tagged free Poisson laws get
/// closed forms; everything else inverts psi on demand.
inline STransformTable s_table(const PositiveRealMeasure& mu) {
  if (mu.is_delta_zero()) throw Error(ErrorCode::DeltaZeroMeasure, "S-transform of delta_0 is undefined");
  if (mu.is_point_mass()) {
    const double c = mu.atoms().front().x;
    return STransformTable(
        -1.0, [c](double) { return 1.0 / c; }, Provenance::analytic, {1.0 / c, ExtendedReal::finite(1.0 / c)}, true);
  }
  if (mu.law()) {
    const FreePoissonLaw law = *mu.law();
    const double delta = law.atom_at_zero();
    const ExtendedReal left =
        law.rate > 1.0 ? ExtendedReal::finite(1.0 / (law.scale * (law.rate - 1.0))) : ExtendedReal::infinite();
    return STransformTable(
        delta - 1.0, [law](double z) { return 1.0 / (law.scale * (law.rate + z)); }, Provenance::analytic,
        {1.0 / (law.scale * law.rate), left});
  }
  auto shared = std::make_shared<const PositiveRealMeasure>(mu);
  const double m1 = moment(mu, 1.0).value();
  const ExtendedReal inv = moment(mu, -1.0);
  return STransformTable(
      mu.atom0() - 1.0, [shared](double z) { return s_transform(*shared, z); }, Provenance::psiInversion,
      {1.0 / m1, inv});
}

/// Symmetric S-transform value S = i * magnitude on the branch through psi(it), t > 0.
struct SymmetricS {
  double magnitude;
  bool imaginary = true;

  /// S^2 as a real number: -magnitude^2 on the imaginary branch.
  double squared() const { return imaginary ? -magnitude * magnitude : magnitude * magnitude; }
};

/// psi_nu(it) = -integral of t^2 x^2 / (1 + t^2 x^2) dnu(x), real for symmetric nu.
inline double symmetric_psi_on_imaginary_axis(const SymmetricRealMeasure& nu, double t) {
  return -nu.positive_part().integrate([t](double x) {
    const double tx2 = t * t * x * x;
    return tx2 / (1.0 + tx2);
  });
}

inline SymmetricS symmetric_s_transform(const SymmetricRealMeasure& nu, double w) {
  if (nu.positive_part().is_delta_zero()) {
    throw Error(ErrorCode::DeltaZeroMeasure, "S-transform of delta_0 is undefined");
  }
  detail::require_in_domain(w, nu.atom0() - 1.0, "symmetric S-transform");
  // In tau = -t the function tau -> psi(i|tau|) is increasing on (-inf, 0).
  const std::function<double(double)> f = [&nu](double tau) { return symmetric_psi_on_imaginary_axis(nu, -tau); };
  const double t = -solve_increasing_on_negative_axis(f, w);
  return {std::abs((1.0 + w) / w) * t, true};
}

/// S of the square pushforward via w / (1 + w) * S_nu(w)^2.
inline double s_of_square(const SymmetricRealMeasure& nu, double w) {
  const SymmetricS s = symmetric_s_transform(nu, w);
  return w / (1.0 + w) * s.squared();
}

/// R-transform on (-epsilon, 0), where epsilon is the range of -G on the
/// negative axis found by scanning z = -2^k, k = -40..40.
class RTransformTable {
 public:
  RTransformTable(double epsilon, std::function<double(double)> eval) : epsilon_(epsilon), eval_(std::move(eval)) {}

  double epsilon() const noexcept { return epsilon_; }
  double operator()(double w) const {
    detail::require_in_domain(w, -epsilon_, "R-transform");
    return eval_(w);
  }

 private:
  double epsilon_;
  std::function<double(double)> eval_;
};

inline double r_domain_radius(const PositiveRealMeasure& mu) {
  double eps = 0.0;
  for (int k = -40; k <= 40; ++k) {
    const double g = cauchy(mu, -std::ldexp(1.0, k));
    if (std::isfinite(g)) eps = std::max(eps, -g);
  }
  return eps;
}

namespace detail {

/// G^{-1}(w) - 1/w; G(1/u) is increasing in u < 0.
inline double r_transform_unchecked(const PositiveRealMeasure& mu, double w) {
  const std::function<double(double)> g = [&mu](double u) { return cauchy(mu, 1.0 / u); };
  const double u = solve_increasing_on_negative_axis(g, w);
  return 1.0 / u - 1.0 / w;
}

}  // namespace detail

inline double r_transform(const PositiveRealMeasure& mu, double w) {
  if (mu.is_delta_zero()) throw Error(ErrorCode::DeltaZeroMeasure, "R-transform of delta_0 is not used");
  detail::require_in_domain(w, -r_domain_radius(mu), "R-transform");
  return detail::r_transform_unchecked(mu, w);
}

inline RTransformTable r_table(const PositiveRealMeasure& mu) {
  if (mu.is_delta_zero()) throw Error(ErrorCode::DeltaZeroMeasure, "R-transform of delta_0 is not used");
  auto shared = std::make_shared<const PositiveRealMeasure>(mu);
  return RTransformTable(r_domain_radius(mu),
                         [shared](double w) { return detail::r_transform_unchecked(*shared, w); });
}

/// S(w) = C^{-1}(w) / w with C(z) = z R(z), C inverted by monotone bisection.
inline double s_from_r(const RTransformTable& r, double w) {
  const double eps = r.epsilon();
  const auto c = [&r](double z) { return z * r(z); };
  const double lo = -eps * (1.0 - 1e-9);
  if (!(c(lo) < w)) throw Error(ErrorCode::OutOfDomain, "s_from_r: w below the range of z R(z)");
  double hi = -std::min(1e-3, 1e-3 * eps);
  int guard = 0;
  while (!(c(hi) > w)) {
    hi *= 0.5;
    if (++guard > 200) throw Error(ErrorCode::OutOfDomain, "s_from_r: w above the range of z R(z)");
  }
  const std::function<double(double)> f = c;
  const double z = solve_increasing_bracketed(f, w, lo, hi);
  return z / w;
}

inline double s_from_r(const PositiveRealMeasure& mu, double w) {
  if (!(w < 0.0)) throw Error(ErrorCode::OutOfDomain, "s_from_r needs w < 0");
  return s_from_r(r_table(mu), w);
}

/// R(z) recovered from an S-transform: C^{-1}(w) = w S(w) is increasing on
/// the S domain, so z = w S(w) is solved for w and R(z) = w / z.
inline double r_from_s(const STransformTable& s, double z) {
  if (!(z < 0.0)) throw Error(ErrorCode::OutOfDomain, "r_from_s needs z < 0");
  const std::function<double(double)> h = [&s](double w) { return w * s(w); };
  const double span = -s.domain_left();
  const double lo = s.domain_left() + 1e-12 * span;
  double hi = -1e-3 * span;
  if (!(h(lo) < z)) throw Error(ErrorCode::OutOfDomain, "r_from_s: z outside the R domain");
  int guard = 0;
  while (!(h(hi) > z)) {
    hi *= 0.5;
    if (++guard > 200) throw Error(ErrorCode::OutOfDomain, "r_from_s: z too close to 0");
  }
  const double w = solve_increasing_bracketed(h, z, lo, hi);
  return w / z;
}

/// S of the pushforward of mu under t -> 1/t, from S_inv(z) S_mu(-1 - z) = 1.
inline double s_of_inverse(const PositiveRealMeasure& mu, double w) {
  if (mu.atom0() > 0.0) throw Error(ErrorCode::AtomAtZero, "inverse needs mu({0}) = 0");
  detail::require_in_domain(w, -1.0, "s_of_inverse");
  return 1.0 / s_transform(mu, -1.0 - w);
}

/// Table of the inverted measure; the base must have no atom at 0.
inline STransformTable inverted(const STransformTable& base) {
  if (base.domain_left() != -1.0) throw Error(ErrorCode::AtomAtZero, "inverse needs an atom-free base");
  const ExtendedReal at_left =
      base.limits().at_zero > 0.0 ? ExtendedReal::finite(1.0 / base.limits().at_zero) : ExtendedReal::infinite();
  const double at_zero = base.limits().at_left.is_infinite() ? 0.0 : 1.0 / base.limits().at_left.value();
  return STransformTable(
      -1.0, [base](double z) { return 1.0 / base(-1.0 - z); },
      base.provenance() == Provenance::analytic ? Provenance::analytic : Provenance::product, {at_zero, at_left},
      base.point_mass());
}

inline double s_multiply(const STransformTable& a, const STransformTable& b, double w) {
  detail::require_in_domain(w, std::max(a.domain_left(), b.domain_left()), "s_multiply");
  return a(w) * b(w);
}

/// Pointwise product on the intersected domain.
inline STransformTable multiply(const STransformTable& a, const STransformTable& b) {
  auto mul_ext = [](const ExtendedReal& x, const ExtendedReal& y) {
    if (x.is_infinite() || y.is_infinite()) return ExtendedReal::infinite();
    return ExtendedReal::finite(x.value() * y.value());
  };
  ExtendedReal left = ExtendedReal::infinite();
  if (a.domain_left() == b.domain_left()) {
    left = mul_ext(a.limits().at_left, b.limits().at_left);
  } else {
    // The factor with the narrower domain blows up at the shared left end.
    const STransformTable& narrow = a.domain_left() > b.domain_left() ? a : b;
    left = narrow.limits().at_left;
  }
  const bool analytic = a.provenance() == Provenance::analytic && b.provenance() == Provenance::analytic;
  return STransformTable(
      std::max(a.domain_left(), b.domain_left()), [a, b](double w) { return a(w) * b(w); },
      analytic ? Provenance::analytic : Provenance::product, {a.limits().at_zero * b.limits().at_zero, left},
      a.point_mass() && b.point_mass());
}

/// S of the dilation t * x: S(z) / t.
inline STransformTable dilated(const STransformTable& base, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::OutOfDomain, "dilation factor must be positive");
  const ExtendedReal left =
      base.limits().at_left.is_infinite() ? ExtendedReal::infinite() : ExtendedReal::finite(base.limits().at_left.value() / t);
  return STransformTable(
      base.domain_left(), [base, t](double z) { return base(z) / t; },
      base.provenance() == Provenance::analytic ? Provenance::analytic : Provenance::product,
      {base.limits().at_zero / t, left}, base.point_mass());
}

}  // namespace freebrown
