#pragma once

#include <cmath>
#include <vector>

#include "resbox/errors.hpp"

namespace resbox {

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth, int& evaluations) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol || m <= a || b <= m) {
    return left + right + diff / 15.0;
  }
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, evaluations) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, evaluations);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction; `tol` is an absolute target.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  int evaluations = 3;
  const double value =
      detail::simpson_step(f, a, fa, m, fm, b, fb, whole, tol, max_depth, evaluations);
  if (!std::isfinite(value)) throw NumericalError("adaptive_simpson: non-finite integral");
  return value;
}

/// Integrates f over [a, b] panel by panel, with `cuts` (sorted, any subset
/// may lie outside) as forced panel boundaries. The tolerance is split over
/// the panels in proportion to their length.
///
/// Each panel is mapped through x = lo + L (3u^2 - 2u^3), whose Jacobian
/// vanishes at both ends, so a square-root kink at a cut becomes a smooth
/// O(u^2) integrand in u.
template <class F>
double panelled_simpson(F&& f, double a, double b, const std::vector<double>& cuts, double tol) {
  if (a == b) return 0.0;
  std::vector<double> edges{a};
  for (double c : cuts) {
    if (c > edges.back() && c < b) edges.push_back(c);
  }
  edges.push_back(b);
  double total = 0.0;
  const double length = b - a;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double lo = edges[i - 1];
    const double span = edges[i] - lo;
    const auto mapped = [&](double u) {
      return f(lo + span * u * u * (3.0 - 2.0 * u)) * 6.0 * span * u * (1.0 - u);
    };
    const double share = tol * span / length;
    total += adaptive_simpson(mapped, 0.0, 1.0, std::max(share, 1e-15));
  }
  return total;
}

}  // namespace resbox
