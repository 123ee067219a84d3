#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "resbox/errors.hpp"

namespace resbox {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double length() const noexcept { return hi - lo; }
  [[nodiscard]] double midpoint() const noexcept { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

std::vector<double> linspace(double a, double b, std::size_t n);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Bisection on a sign change of f over [a, b]. Stops when the bracket is
/// narrower than xtol or cannot shrink any further in floating point.
template <class F>
double bisect_root(F&& f, double a, double b, double xtol, int max_iter = 400) {
  double fa = f(a);
  double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw NumericalError("bisection: non-finite function value at bracket end [" +
                         std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) == (fb < 0.0)) {
    throw NumericalError("bisection: no sign change on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "] (f = " + std::to_string(fa) + ", " +
                         std::to_string(fb) + ")");
  }
  for (int it = 0; it < max_iter && std::abs(b - a) > xtol; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= std::min(a, b) || m >= std::max(a, b)) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

/// Golden-section minimisation of a unimodal f on [a, b].
template <class F>
GoldenResult golden_section_minimize(F&& f, double a, double b, double xtol, int max_evaluations) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int evals = 2;
  while (std::abs(b - a) > xtol && evals < max_evaluations) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc < fd ? GoldenResult{c, fc, evals} : GoldenResult{d, fd, evals};
}

}  // namespace resbox
