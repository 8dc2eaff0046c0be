#pragma once

// Probability measures on [0, inf), symmetric measures on R, and rotation
// invariant measures on C described by a radial quantile table.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freebrown/error.hpp"
#include "freebrown/numeric.hpp"

namespace freebrown {

inline constexpr double kMassTolerance = 1e-9;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Atom {
  double x;
  double w;
};

/// Piecewise-linear density on an explicit grid, integrated by the trapezoid rule.
struct DensityGrid {
  std::vector<double> grid;
  std::vector<double> values;

  double mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      m += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
    }
    return m;
  }
};

/// Closed-form tag for the free Poisson law with the given rate and jump size.
/// When present, Cauchy/psi evaluations and the S-transform use exact formulas
/// instead of quadrature over the density grid.
struct FreePoissonLaw {
  double rate = 1.0;
  double scale = 1.0;

  double lower_edge() const { return scale * std::pow(1.0 - std::sqrt(rate), 2); }
  double upper_edge() const { return scale * std::pow(1.0 + std::sqrt(rate), 2); }
  double atom_at_zero() const { return std::max(0.0, 1.0 - rate); }
};

class PositiveRealMeasure {
 public:
  PositiveRealMeasure(double atom0, std::vector<Atom> atoms, std::optional<DensityGrid> density = std::nullopt,
                      std::optional<FreePoissonLaw> law = std::nullopt)
      : atom0_(atom0), atoms_(std::move(atoms)), density_(std::move(density)), law_(law) {
    validate();
  }

  double atom0() const noexcept { return atom0_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::optional<DensityGrid>& density() const noexcept { return density_; }
  const std::optional<FreePoissonLaw>& law() const noexcept { return law_; }

  /// Same measure with the closed-form tag removed, so that every evaluation
  /// goes through the grid.
  PositiveRealMeasure without_law() const { return PositiveRealMeasure(atom0_, atoms_, density_); }

  bool is_delta_zero() const noexcept { return atom0_ >= 1.0 - kMassTolerance; }

  /// True when the measure is a single point mass delta_c with c > 0.
  bool is_point_mass() const noexcept {
    return atom0_ <= kMassTolerance && atoms_.size() == 1 && !density_.has_value();
  }

  double total_mass() const { return atom0_ + atom_mass() + (density_ ? density_->mass() : 0.0); }

  double inf_support() const {
    if (atom0_ > 0.0) return 0.0;
    double lo = kInf;
    if (!atoms_.empty()) lo = atoms_.front().x;
    if (density_) {
      for (std::size_t i = 0; i < density_->grid.size(); ++i) {
        const bool touches = density_->values[i] > 0.0 ||
                             (i + 1 < density_->grid.size() && density_->values[i + 1] > 0.0);
        if (touches) {
          lo = std::min(lo, density_->grid[i]);
          break;
        }
      }
    }
    return lo;
  }

  double sup_support() const {
    double hi = atom0_ > 0.0 ? 0.0 : -kInf;
    if (!atoms_.empty()) hi = std::max(hi, atoms_.back().x);
    if (density_) {
      for (std::size_t i = density_->grid.size(); i-- > 0;) {
        const bool touches = density_->values[i] > 0.0 || (i > 0 && density_->values[i - 1] > 0.0);
        if (touches) {
          hi = std::max(hi, density_->grid[i]);
          break;
        }
      }
    }
    return hi;
  }

  /// Integral of f against the measure: atoms exactly, density by trapezoid.
  template <class F>
  auto integrate(F&& f) const -> decltype(f(0.0)) {
    using R = decltype(f(0.0));
    R acc{};
    if (atom0_ > 0.0) acc += atom0_ * f(0.0);
    for (const Atom& a : atoms_) acc += a.w * f(a.x);
    if (density_) {
      const auto& g = density_->grid;
      const auto& v = density_->values;
      if (g.size() >= 2) {
        R prev = v[0] == 0.0 ? R{} : v[0] * f(g[0]);
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
          const R next = v[i + 1] == 0.0 ? R{} : v[i + 1] * f(g[i + 1]);
          acc += 0.5 * (g[i + 1] - g[i]) * (prev + next);
          prev = next;
        }
      }
    }
    return acc;
  }

  /// P(X <= x) with the density treated as piecewise linear.
  double cdf(double x) const {
    if (x < 0.0) return 0.0;
    double acc = atom0_;
    for (const Atom& a : atoms_) {
      if (a.x <= x) acc += a.w;
    }
    if (density_) {
      const auto& g = density_->grid;
      const auto& v = density_->values;
      for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (g[i] >= x) break;
        const double h = g[i + 1] - g[i];
        if (g[i + 1] <= x) {
          acc += 0.5 * h * (v[i] + v[i + 1]);
        } else {
          const double d = x - g[i];
          const double vx = v[i] + (v[i + 1] - v[i]) * d / h;
          acc += 0.5 * d * (v[i] + vx);
        }
      }
    }
    return std::min(acc, 1.0);
  }

 private:
  double atom_mass() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.w;
    return m;
  }

  void validate() const {
    if (!(atom0_ >= 0.0 && atom0_ <= 1.0 + kMassTolerance)) {
      throw Error(ErrorCode::InvalidMeasure, "atom0 must lie in [0, 1]");
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!(atoms_[i].x > 0.0) || !std::isfinite(atoms_[i].x)) {
        throw Error(ErrorCode::InvalidMeasure, "atom locations must be positive and finite");
      }
      if (!(atoms_[i].w > 0.0)) throw Error(ErrorCode::InvalidMeasure, "atom weights must be positive");
      if (i > 0 && !(atoms_[i].x > atoms_[i - 1].x)) {
        throw Error(ErrorCode::InvalidMeasure, "atom locations must be strictly increasing");
      }
    }
    if (density_) {
      const auto& g = density_->grid;
      const auto& v = density_->values;
      if (g.size() != v.size() || g.size() < 2) {
        throw Error(ErrorCode::InvalidMeasure, "density grid and values must have equal length >= 2");
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] >= 0.0) || !std::isfinite(g[i])) {
          throw Error(ErrorCode::InvalidMeasure, "density grid must be nonnegative and finite");
        }
        if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
          throw Error(ErrorCode::InvalidMeasure, "density values must be nonnegative and finite");
        }
        if (i > 0 && !(g[i] > g[i - 1])) {
          throw Error(ErrorCode::InvalidMeasure, "density grid must be strictly increasing");
        }
      }
    }
    if (law_ && !(law_->rate > 0.0 && law_->scale > 0.0)) {
      throw Error(ErrorCode::InvalidMeasure, "free Poisson rate and scale must be positive");
    }
    if (std::abs(total_mass() - 1.0) > kMassTolerance) {
      throw Error(ErrorCode::InvalidMeasure, "total mass must equal 1 (got " + std::to_string(total_mass()) + ")");
    }
  }

  double atom0_;
  std::vector<Atom> atoms_;
  std::optional<DensityGrid> density_;
  std::optional<FreePoissonLaw> law_;
};

inline PositiveRealMeasure point_mass(double c) {
  if (c == 0.0) return PositiveRealMeasure(1.0, {});
  return PositiveRealMeasure(0.0, {{c, 1.0}});
}

/// Purely atomic measure; a location equal to 0 goes into atom0. Locations
/// need not be sorted, duplicates are merged.
inline PositiveRealMeasure atomic_measure(std::vector<Atom> atoms) {
  double atom0 = 0.0;
  std::vector<Atom> positive;
  for (const Atom& a : atoms) {
    if (a.x == 0.0) {
      atom0 += a.w;
    } else {
      positive.push_back(a);
    }
  }
  std::sort(positive.begin(), positive.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  std::vector<Atom> merged;
  for (const Atom& a : positive) {
    if (!merged.empty() && merged.back().x == a.x) {
      merged.back().w += a.w;
    } else {
      merged.push_back(a);
    }
  }
  return PositiveRealMeasure(atom0, std::move(merged));
}

/// Free Poisson (Marchenko-Pastur) law with the given rate and jump size.
/// The density lives on x = a + (b - a) sin^2(theta) with theta uniform, which
/// clusters nodes at both edges. At rate 1 the density has an x^{-1/2} pole
/// at 0 and the grid is x = b sin^6(theta) instead; the value stored at 0 is
/// chosen so that the first trapezoid cell carries the exact mass of [0, x_1].
inline PositiveRealMeasure free_poisson(double rate = 1.0, double scale = 1.0, std::size_t grid_points = 8193,
                                        bool keep_closed_form = true) {
  if (!(rate > 0.0 && scale > 0.0)) throw Error(ErrorCode::InvalidMeasure, "free Poisson needs rate, scale > 0");
  if (grid_points < 3) throw Error(ErrorCode::InvalidMeasure, "free Poisson grid needs at least 3 points");
  const FreePoissonLaw law{rate, scale};
  const double a = law.lower_edge();
  const double b = law.upper_edge();
  const bool pole = a == 0.0;
  DensityGrid d;
  d.grid.resize(grid_points);
  d.values.resize(grid_points);
  const double dtheta = 0.5 * std::numbers::pi / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double s = std::sin(dtheta * static_cast<double>(i));
    const double u = pole ? s * s * s * s * s * s : s * s;
    d.grid[i] = (i + 1 == grid_points) ? b : a + (b - a) * u;
    const double x = d.grid[i];
    d.values[i] = (x > 0.0) ? std::sqrt(std::max(0.0, (x - a) * (b - x))) / (2.0 * std::numbers::pi * scale * x) : 0.0;
  }
  d.values.back() = 0.0;
  if (pole) {
    // F(x) = (4/pi)(phi/2 + sin(2 phi)/4) with x = b sin^2(phi).
    const double phi = std::asin(std::sqrt(d.grid[1] / b));
    const double cell_mass = (4.0 / std::numbers::pi) * (0.5 * phi + 0.25 * std::sin(2.0 * phi));
    d.values[0] = std::max(0.0, 2.0 * cell_mass / (d.grid[1] - d.grid[0]) - d.values[1]);
  } else {
    d.values[0] = 0.0;
  }
  const double target = 1.0 - law.atom_at_zero();
  const double m = d.mass();
  for (double& v : d.values) v *= target / m;
  std::optional<FreePoissonLaw> tag;
  if (keep_closed_form) tag = law;
  return PositiveRealMeasure(law.atom_at_zero(), {}, std::move(d), tag);
}

/// Even probability measure on R stored through its mass on [0, inf).
class SymmetricRealMeasure {
 public:
  explicit SymmetricRealMeasure(PositiveRealMeasure positive_part) : positive_(std::move(positive_part)) {}

  const PositiveRealMeasure& positive_part() const noexcept { return positive_; }
  double atom0() const noexcept { return positive_.atom0(); }

  /// Atoms of the symmetric measure in increasing order, including 0.
  std::vector<Atom> atoms() const {
    std::vector<Atom> out;
    const auto& pos = positive_.atoms();
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.push_back({-it->x, 0.5 * it->w});
    if (positive_.atom0() > 0.0) out.push_back({0.0, positive_.atom0()});
    for (const Atom& a : pos) out.push_back({a.x, 0.5 * a.w});
    return out;
  }

  /// Mass of the single point x.
  double point_mass_at(double x) const {
    if (x == 0.0) return positive_.atom0();
    const double ax = std::abs(x);
    for (const Atom& a : positive_.atoms()) {
      if (a.x == ax) return 0.5 * a.w;
    }
    return 0.0;
  }

  double cdf(double x) const {
    const double d = positive_.atom0();
    if (x >= 0.0) {
      // d + (1-d)/2 + mass of (0, x] / 2
      return d + 0.5 * (1.0 - d) + 0.5 * (positive_.cdf(x) - d);
    }
    // mass of [-inf, x] = half the positive mass in [-x, inf)
    const double below = positive_.cdf(-x) - d - positive_mass_at(-x);
    return 0.5 * ((1.0 - d) - below);
  }

  /// Integral of f against the symmetric measure.
  template <class F>
  auto integrate(F&& f) const -> decltype(f(0.0)) {
    // The atom at 0 enters as atom0 * (f(0) + f(-0)) / 2.
    return 0.5 * positive_.integrate([&](double t) { return f(t) + f(-t); });
  }

 private:
  double positive_mass_at(double x) const {
    for (const Atom& a : positive_.atoms()) {
      if (a.x == x) return a.w;
    }
    return 0.0;
  }

  PositiveRealMeasure positive_;
};

inline SymmetricRealMeasure symmetrize(const PositiveRealMeasure& mu) { return SymmetricRealMeasure(mu); }

/// Maps available for pushforwards of measures on [0, inf).
struct PushforwardMap {
  enum class Kind { square, sqrt, inverse, dilate };
  Kind kind;
  double factor = 1.0;  // dilation factor c for Kind::dilate

  static PushforwardMap square() { return {Kind::square, 1.0}; }
  static PushforwardMap sqrt() { return {Kind::sqrt, 1.0}; }
  static PushforwardMap inverse() { return {Kind::inverse, 1.0}; }
  static PushforwardMap dilate(double c) { return {Kind::dilate, c}; }

  double apply(double x) const {
    switch (kind) {
      case Kind::square: return x * x;
      case Kind::sqrt: return std::sqrt(x);
      case Kind::inverse: return 1.0 / x;
      case Kind::dilate: return factor * x;
    }
    return x;
  }

  /// |d(map)/dx| at x.
  double jacobian(double x) const {
    switch (kind) {
      case Kind::square: return 2.0 * x;
      case Kind::sqrt: return 0.5 / std::sqrt(x);
      case Kind::inverse: return 1.0 / (x * x);
      case Kind::dilate: return factor;
    }
    return 1.0;
  }
};

inline PositiveRealMeasure pushforward(const PositiveRealMeasure& mu, const PushforwardMap& map) {
  using Kind = PushforwardMap::Kind;
  if (map.kind == Kind::dilate && !(map.factor > 0.0 && std::isfinite(map.factor))) {
    throw Error(ErrorCode::OutOfDomain, "dilation factor must be positive");
  }
  if (map.kind == Kind::inverse && mu.atom0() > 0.0) {
    throw Error(ErrorCode::InversionOfAtomAtZero, "cannot invert a measure with an atom at 0");
  }
  std::vector<Atom> atoms;
  atoms.reserve(mu.atoms().size());
  for (const Atom& a : mu.atoms()) atoms.push_back({map.apply(a.x), a.w});
  if (map.kind == Kind::inverse) std::reverse(atoms.begin(), atoms.end());

  std::optional<DensityGrid> density;
  if (mu.density()) {
    const DensityGrid& src = *mu.density();
    if (map.kind == Kind::inverse && src.grid.front() == 0.0) {
      throw Error(ErrorCode::OutOfDomain, "density grid touches 0; its inverse has unbounded support");
    }
    const std::size_t n = src.grid.size();
    DensityGrid out;
    out.grid.resize(n);
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = src.grid[i];
      out.grid[i] = map.apply(x);
      const double jac = map.jacobian(x);
      out.values[i] = src.values[i] == 0.0 ? 0.0 : src.values[i] / jac;
    }
    std::vector<double> cell_mass(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      cell_mass[i] = 0.5 * (src.grid[i + 1] - src.grid[i]) * (src.values[i] + src.values[i + 1]);
    }
    // The Jacobian can be singular at a grid end (x = 0 under square/sqrt).
    // Replace such values so that the adjacent cell keeps its mass.
    auto fix_end = [&](std::size_t end, std::size_t other, std::size_t cell) {
      if (std::isfinite(out.values[end])) return;
      const double width = std::abs(out.grid[other] - out.grid[end]);
      out.values[end] = std::max(0.0, 2.0 * cell_mass[cell] / width - out.values[other]);
    };
    if (n >= 2) {
      fix_end(0, 1, 0);
      fix_end(n - 1, n - 2, n - 2);
    }
    if (map.kind == Kind::inverse) {
      std::reverse(out.grid.begin(), out.grid.end());
      std::reverse(out.values.begin(), out.values.end());
    }
    const double before = src.mass();
    const double after = out.mass();
    if (after > 0.0) {
      for (double& v : out.values) v *= before / after;
    }
    density = std::move(out);
  }

  std::optional<FreePoissonLaw> law;
  if (map.kind == Kind::dilate && mu.law()) law = FreePoissonLaw{mu.law()->rate, mu.law()->scale * map.factor};
  return PositiveRealMeasure(mu.atom0(), std::move(atoms), std::move(density), law);
}

/// Integral of t^gamma. Divergence is reported through the unbounded flag:
/// negative powers against an atom at 0, or against a density that does not
/// vanish fast enough at a grid starting at 0.
inline ExtendedReal moment(const PositiveRealMeasure& mu, double gamma) {
  if (gamma == 0.0) return ExtendedReal::finite(1.0);
  double acc = 0.0;
  if (mu.atom0() > 0.0 && gamma < 0.0) return ExtendedReal::infinite();
  for (const Atom& a : mu.atoms()) acc += a.w * std::pow(a.x, gamma);
  if (mu.density()) {
    const auto& g = mu.density()->grid;
    const auto& v = mu.density()->values;
    std::size_t start = 0;
    if (g.front() == 0.0) {
      // First cell: exact integral of t^gamma against the linear density.
      const double h = g[1];
      const double f0 = v[0];
      const double f1 = v[1];
      if (f0 > 0.0 && gamma <= -1.0) return ExtendedReal::infinite();
      if (f0 == 0.0 && f1 > 0.0 && gamma <= -2.0) return ExtendedReal::infinite();
      acc += f0 * std::pow(h, gamma + 1.0) / (gamma + 1.0) +
             (f1 - f0) * std::pow(h, gamma + 1.0) / (gamma + 2.0);
      start = 1;
    }
    for (std::size_t i = start; i + 1 < g.size(); ++i) {
      acc += 0.5 * (g[i + 1] - g[i]) * (v[i] * std::pow(g[i], gamma) + v[i + 1] * std::pow(g[i + 1], gamma));
    }
  }
  return ExtendedReal::finite(acc);
}

/// Rotation invariant measure on C: an atom at 0 plus a nondecreasing radial
/// quantile table Q on a t-grid in (atom0, 1). The mass of the closed disk
/// of radius Q(t) is t.
class RadialBrownMeasure {
 public:
  RadialBrownMeasure(double atom0, std::vector<double> t_grid, std::vector<double> q_values, double r_min,
                     double r_max)
      : atom0_(atom0), t_(std::move(t_grid)), q_(std::move(q_values)), r_min_(r_min), r_max_(r_max) {
    if (!(atom0_ >= 0.0 && atom0_ < 1.0)) throw Error(ErrorCode::InvalidMeasure, "Brown atom must lie in [0,1)");
    if (t_.size() != q_.size() || t_.empty()) {
      throw Error(ErrorCode::InvalidMeasure, "quantile table needs matching nonempty t and r columns");
    }
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (!(t_[i] > atom0_ && t_[i] < 1.0)) throw Error(ErrorCode::InvalidMeasure, "t nodes must lie in (atom0, 1)");
      if (!(q_[i] >= 0.0) || !std::isfinite(q_[i])) {
        throw Error(ErrorCode::InvalidMeasure, "quantile radii must be finite and nonnegative");
      }
      if (i > 0 && (!(t_[i] > t_[i - 1]) || q_[i] < q_[i - 1])) {
        throw Error(ErrorCode::InvalidMeasure, "quantile table must be increasing in t and nondecreasing in r");
      }
    }
    if (!(r_min_ >= 0.0 && r_min_ <= q_.front() && r_max_ >= q_.back())) {
      throw Error(ErrorCode::InvalidMeasure, "support radii inconsistent with the quantile table");
    }
  }

  double atom0() const noexcept { return atom0_; }
  const std::vector<double>& t_grid() const noexcept { return t_; }
  const std::vector<double>& q_values() const noexcept { return q_; }
  double r_min() const noexcept { return r_min_; }
  double r_max() const noexcept { return r_max_; }
  bool unbounded() const noexcept { return std::isinf(r_max_); }

  /// Quantile by linear interpolation, with the support radii as end values.
  double quantile(double t) const {
    if (t <= atom0_) return 0.0;
    if (t <= t_.front()) {
      return r_min_ + (q_.front() - r_min_) * (t - atom0_) / (t_.front() - atom0_);
    }
    if (t >= t_.back()) {
      if (unbounded()) return t >= 1.0 ? kInf : q_.back();
      return q_.back() + (r_max_ - q_.back()) * (t - t_.back()) / (1.0 - t_.back());
    }
    return interpolate(t_, q_, t);
  }

  RadialBrownMeasure scaled(double factor) const {
    std::vector<double> q = q_;
    for (double& r : q) r *= factor;
    return RadialBrownMeasure(atom0_, t_, std::move(q), r_min_ * factor, r_max_ * factor);
  }

 private:
  double atom0_;
  std::vector<double> t_;
  std::vector<double> q_;
  double r_min_;
  double r_max_;
};

/// Mass of the closed disk of radius r: inverts the quantile table by
/// bisection over the t-grid with linear interpolation inside a cell.
inline double radial_cdf(const RadialBrownMeasure& b, double r) {
  if (r < b.r_min()) return b.atom0();
  if (r >= b.r_max()) return 1.0;
  const auto& t = b.t_grid();
  const auto& q = b.q_values();
  if (r < q.front()) {
    const double span = q.front() - b.r_min();
    if (span <= 0.0) return t.front();
    return b.atom0() + (t.front() - b.atom0()) * (r - b.r_min()) / span;
  }
  if (r >= q.back()) {
    if (b.unbounded()) return t.back();
    const double span = b.r_max() - q.back();
    if (span <= 0.0) return 1.0;
    return t.back() + (1.0 - t.back()) * (r - q.back()) / span;
  }
  // last index with q[i] <= r
  std::size_t lo = 0, hi = q.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (q[mid] <= r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  while (lo + 1 < q.size() && q[lo + 1] <= r) ++lo;
  if (lo + 1 >= q.size()) return t.back();
  const double dq = q[lo + 1] - q[lo];
  if (dq <= 0.0) return t[lo];
  return t[lo] + (t[lo + 1] - t[lo]) * (r - q[lo]) / dq;
}

}  // namespace freebrown
