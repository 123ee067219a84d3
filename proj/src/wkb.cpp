#include "resbox/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "resbox/agmon.hpp"
#include "resbox/errors.hpp"
#include "resbox/quadrature.hpp"

namespace resbox {

namespace {

constexpr double kActionTolerance = 1e-10;

double box_end(const Geometry& geometry, Side side) {
  return side == Side::left ? -geometry.ell : geometry.ell;
}

}  // namespace

double action_integral(const PotentialModel& model, double energy, double x_from, double x_to) {
  if (!std::isfinite(energy) || !std::isfinite(x_from) || !std::isfinite(x_to)) {
    throw DomainError("action_integral: arguments must be finite");
  }
  const double a = std::min(x_from, x_to);
  const double b = std::max(x_from, x_to);
  if (a == b) return 0.0;
  const auto integrand = [&](double x) { return std::sqrt(std::abs(model.value(x) - energy)); };
  return panelled_simpson(integrand, a, b, kink_points(model, energy, a, b), kActionTolerance);
}

WkbContext::WkbContext(const PotentialModel& model, Side side, double turning_point,
                       double energy, std::size_t n)
    : model_(&model), side_(side), turning_point_(turning_point), energy_(energy), n_(n) {}

double WkbContext::action(double x) const {
  return action_integral(*model_, energy_, x, turning_point_);
}

double WkbContext::xi(double x) const {
  const double s = action(x);
  const double magnitude = std::cbrt(1.5 * s * 1.5 * s);
  if (x > turning_point_) return magnitude;
  if (x < turning_point_) return -magnitude;
  return 0.0;
}

WkbContext make_wkb_context(const PotentialModel& model, const Geometry& geometry, double energy,
                            Side side, std::size_t n) {
  const auto tp = turning_points(model, energy, geometry.exterior(side));
  if (!tp.single()) {
    throw RegimeError("WKB regime violated on the " + std::string(to_string(side)) +
                      " side: " + tp.warning.value_or("expected one turning point"));
  }
  return WkbContext(model, side, tp.points.front(), energy, n);
}

double quantization_residual(const PotentialModel& model, const Geometry& geometry, double hbar,
                             double energy, Side side, std::size_t n) {
  if (!(hbar > 0.0)) throw DomainError("quantization_residual: hbar must be positive");
  const auto ctx = make_wkb_context(model, geometry, energy, side, n);
  const double end = box_end(geometry, side);
  const double integral = action_integral(model, energy, ctx.turning_point(), end);
  return integral - (static_cast<double>(n) + 0.75) * std::numbers::pi * hbar;
}

double predict_exterior_eigenvalue(const PotentialModel& model, const Geometry& geometry,
                                   double hbar, Side side, std::size_t n, double delta) {
  const double d = delta >= 0.0 ? delta : default_delta(model);
  const double floor = std::max(model.v_side(side), model.value(box_end(geometry, side)));
  const double lo = floor + 1e-13 * std::max(1.0, std::abs(floor));
  const double hi = model.v0() + d;
  if (!(lo < hi)) {
    // A flat side has no turning point at all; report that regime first.
    make_wkb_context(model, geometry, lo, side, n);
    throw SearchError("predict_exterior_eigenvalue: empty WKB energy window");
  }
  const auto f = [&](double e) { return quantization_residual(model, geometry, hbar, e, side, n); };
  if (f(hi) < 0.0) {
    throw SearchError("predict_exterior_eigenvalue: level n=" + std::to_string(n) +
                      " lies above the WKB window (v0 + delta = " + std::to_string(hi) + ")");
  }
  return bisect_root(f, lo, hi, 1e-12);
}

double asymptotic_exterior_eigenvalue(const PotentialModel& model, double hbar, double ell,
                                      Side side, std::size_t m) {
  const double k = (static_cast<double>(m) + 0.75) * std::numbers::pi * hbar / ell;
  return model.v_side(side) + k * k;
}

}  // namespace resbox
