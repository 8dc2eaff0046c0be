#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "freebrown/error.hpp"

namespace freebrown {

/// A real number or +infinity. Divergent integrals are reported through the
/// flag; the payload of an unbounded value is never read.
class ExtendedReal {
 public:
  static ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static ExtendedReal infinite() { return ExtendedReal(0.0, true); }

  bool is_finite() const noexcept { return !unbounded_; }
  bool is_infinite() const noexcept { return unbounded_; }

  double value() const {
    if (unbounded_) throw Error(ErrorCode::OutOfDomain, "value() on an unbounded ExtendedReal");
    return value_;
  }

  double value_or(double fallback) const noexcept { return unbounded_ ? fallback : value_; }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.unbounded_) return os << "inf";
    return os << x.value_;
  }

 private:
  ExtendedReal(double v, bool unbounded) : value_(v), unbounded_(unbounded) {}
  double value_;
  bool unbounded_;
};

/// Chebyshev points of the first kind mapped to the open interval (lo, hi),
/// increasing, clustered at both endpoints.
inline std::vector<double> chebyshev_nodes(double lo, double hi, std::size_t n) {
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    nodes[i] = lo + (hi - lo) * 0.5 * (1.0 - std::cos(theta));
  }
  return nodes;
}

struct RootOptions {
  int max_bisection = 200;
  int newton_steps = 10;
};

/// Finds x in [lo, hi] with f(x) = target for increasing f, assuming
/// f(lo) <= target <= f(hi). Bisects until the bracket collapses to adjacent
/// doubles (or max_bisection), then polishes with Newton steps that stay
/// inside the bracket and reduce the residual. The collapsed bracket is far
/// tighter than a 1e-12 absolute residual, which matters for S near z = 0
/// where S = (1+w)/w * chi(w) amplifies absolute error by 1/|w|.
inline double solve_increasing_bracketed(const std::function<double(double)>& f, double target,
                                         double lo, double hi,
                                         const std::function<double(double)>* derivative = nullptr,
                                         const RootOptions& opt = {}) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo > 0.0 || fhi < 0.0) {
    throw Error(ErrorCode::SolverFailure, "bracket does not contain the target");
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int it = 0; it < opt.max_bisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid) - target;
    if (fm == 0.0) return mid;
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  double x = (-flo < fhi) ? lo : hi;
  double fx = (-flo < fhi) ? flo : fhi;
  if (derivative != nullptr) {
    for (int it = 0; it < opt.newton_steps; ++it) {
      const double d = (*derivative)(x);
      if (!(d > 0.0) || !std::isfinite(d)) break;
      const double next = x - fx / d;
      if (!(next >= lo && next <= hi)) break;
      const double fnext = f(next) - target;
      if (std::abs(fnext) >= std::abs(fx)) break;
      x = next;
      fx = fnext;
    }
  }
  return x;
}

/// Solves f(u) = target for an increasing f on (-inf, 0). Starts from
/// [-1, -1e-12], doubles the left end until f(left) < target and halves the
/// right end until f(right) > target.
inline double solve_increasing_on_negative_axis(const std::function<double(double)>& f, double target,
                                                const std::function<double(double)>* derivative = nullptr,
                                                const RootOptions& opt = {}) {
  double left = -1.0;
  double right = -1e-12;
  int guard = 0;
  while (f(left) >= target) {
    left *= 2.0;
    if (++guard > 1100 || !std::isfinite(left)) {
      throw Error(ErrorCode::SolverFailure, "could not bracket root on the negative axis (left)");
    }
  }
  guard = 0;
  while (f(right) <= target) {
    right *= 0.5;
    if (++guard > 1100 || right == 0.0) {
      throw Error(ErrorCode::SolverFailure, "could not bracket root on the negative axis (right)");
    }
  }
  return solve_increasing_bracketed(f, target, left, right, derivative, opt);
}

/// Linear interpolation in a sorted table; clamps outside the range.
inline double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double x0 = xs[j - 1], x1 = xs[j];
  const double y0 = ys[j - 1], y1 = ys[j];
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace freebrown
