#pragma once

#include <vector>

#include "resbox/potential.hpp"

namespace resbox {

/// Zeros of V - E and discontinuities of V inside (a, b), sorted. Used as
/// forced panel boundaries so the square-root kink never sits inside a panel.
std::vector<double> kink_points(const PotentialModel& model, double energy, double a, double b);

/// Integral of sqrt(max(0, V - E)) over [a, b], absolute tolerance 1e-10.
double agmon_distance(const PotentialModel& model, double energy, double a, double b);

struct AgmonMetrics {
  double d_minus = 0.0;  ///< d_{v0}(x0, -ell)
  double d_plus = 0.0;   ///< d_{v0}(x0, +ell)
  double d_star = 0.0;   ///< min(d_minus, d_plus)
  double d_boundary_minus = 0.0;  ///< d_{v0}(x0, omega_-)
  double d_boundary_plus = 0.0;   ///< d_{v0}(x0, omega_+)
};

AgmonMetrics agmon_summary(const PotentialModel& model, const Geometry& geometry);

/// Outer edge of J(v0) on the given side of the well.
double outer_turning_point(const PotentialModel& model, Side side);

/// Point omega between x0 and the outer edge of J(v0) with
/// d_{v0}(x0, omega) = fraction * d_{v0}(x0, edge).
double agmon_split_point(const PotentialModel& model, Side side, double fraction);

/// Split points placed at the given fractions of the Agmon distance on each side.
Geometry agmon_geometry(const PotentialModel& model, double fraction_left, double fraction_right,
                        double ell);

/// Split point of `side` at the Agmon midpoint of its barrier, the other one
/// near the outer edge. Used to predict the degeneracy ell0 of crossings on
/// `side`, where the interior/exterior tunnelling is balanced.
Geometry balanced_geometry(const PotentialModel& model, Side side, double ell);

inline constexpr double kOuterFraction = 0.98;
inline constexpr double kBalancedFraction = 0.5;

}  // namespace resbox
