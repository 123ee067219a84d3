#include "resbox/agmon.hpp"

#include <algorithm>
#include <cmath>

#include "resbox/errors.hpp"
#include "resbox/quadrature.hpp"

namespace resbox {

namespace {

constexpr double kAgmonTolerance = 1e-10;
constexpr double kSearchWindow = 50.0;

}  // namespace

std::vector<double> kink_points(const PotentialModel& model, double energy, double a, double b) {
  std::vector<double> cuts;
  if (!(a < b)) return cuts;
  const auto f = [&](double x) { return model.value(x) - energy; };
  const std::size_t n = 2000;
  double x_prev = a;
  double f_prev = f(a);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = i == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    const double fx = f(x);
    if (fx == 0.0 && i < n) {
      cuts.push_back(x);
    } else if (f_prev != 0.0 && fx != 0.0 && (fx < 0.0) != (f_prev < 0.0)) {
      cuts.push_back(bisect_root(f, x_prev, x, 1e-14));
    }
    x_prev = x;
    f_prev = fx;
  }
  for (double c : model.breakpoints()) {
    if (c > a && c < b) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

double agmon_distance(const PotentialModel& model, double energy, double a, double b) {
  if (!std::isfinite(energy) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("agmon_distance: arguments must be finite");
  }
  if (a > b) throw DomainError("agmon_distance: requires a <= b");
  if (a == b) return 0.0;
  const auto integrand = [&](double x) { return std::sqrt(std::max(0.0, model.value(x) - energy)); };
  return panelled_simpson(integrand, a, b, kink_points(model, energy, a, b), kAgmonTolerance);
}

AgmonMetrics agmon_summary(const PotentialModel& model, const Geometry& geometry) {
  const double v0 = model.v0();
  const double x0 = model.x0();
  if (!(-geometry.ell < x0 && x0 < geometry.ell)) {
    throw DomainError("agmon_summary: well minimum lies outside the box");
  }
  AgmonMetrics m;
  m.d_minus = agmon_distance(model, v0, -geometry.ell, x0);
  m.d_plus = agmon_distance(model, v0, x0, geometry.ell);
  m.d_star = std::min(m.d_minus, m.d_plus);
  m.d_boundary_minus =
      geometry.omega_minus < x0 ? agmon_distance(model, v0, geometry.omega_minus, x0) : 0.0;
  m.d_boundary_plus =
      geometry.omega_plus > x0 ? agmon_distance(model, v0, x0, geometry.omega_plus) : 0.0;
  return m;
}

double outer_turning_point(const PotentialModel& model, Side side) {
  const double x0 = model.x0();
  const Interval search = side == Side::left ? Interval{x0 - kSearchWindow, x0}
                                             : Interval{x0, x0 + kSearchWindow};
  const auto region = forbidden_region(model, model.v0(), search);
  if (region.empty()) {
    throw DomainError("outer_turning_point: no forbidden region at v0 on the " +
                      std::string(to_string(side)) + " side");
  }
  return side == Side::left ? region.front().lo : region.back().hi;
}

double agmon_split_point(const PotentialModel& model, Side side, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw DomainError("agmon_split_point: fraction must lie in (0, 1)");
  }
  const double x0 = model.x0();
  const double v0 = model.v0();
  const double edge = outer_turning_point(model, side);
  const auto distance = [&](double w) {
    return side == Side::left ? agmon_distance(model, v0, w, x0) : agmon_distance(model, v0, x0, w);
  };
  const double target = fraction * distance(edge);
  return bisect_root([&](double w) { return distance(w) - target; }, x0, edge, 1e-12);
}

Geometry agmon_geometry(const PotentialModel& model, double fraction_left, double fraction_right,
                        double ell) {
  return make_geometry(agmon_split_point(model, Side::left, fraction_left),
                       agmon_split_point(model, Side::right, fraction_right), ell);
}

Geometry balanced_geometry(const PotentialModel& model, Side side, double ell) {
  return side == Side::left ? agmon_geometry(model, kBalancedFraction, kOuterFraction, ell)
                            : agmon_geometry(model, kOuterFraction, kBalancedFraction, ell);
}

}  // namespace resbox
