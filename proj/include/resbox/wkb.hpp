#pragma once

#include <cstddef>

#include "resbox/potential.hpp"

namespace resbox {

/// Integral of sqrt(|V - E|) between x_from and x_to (either order),
/// kink-aware adaptive quadrature at tolerance 1e-10.
double action_integral(const PotentialModel& model, double energy, double x_from, double x_to);

/// Turning-point data for one exterior side at energy E.
class WkbContext {
 public:
  WkbContext(const PotentialModel& model, Side side, double turning_point, double energy,
             std::size_t n);

  [[nodiscard]] Side side() const noexcept { return side_; }
  [[nodiscard]] double turning_point() const noexcept { return turning_point_; }
  [[nodiscard]] double energy() const noexcept { return energy_; }
  [[nodiscard]] std::size_t quantum_number() const noexcept { return n_; }

  /// S(x): action between x and the turning point.
  [[nodiscard]] double action(double x) const;
  /// Liouville variable, oriented so it increases into the allowed region of
  /// the right side: sgn(x - x_t) (3/2 S(x))^(2/3).
  [[nodiscard]] double xi(double x) const;

 private:
  const PotentialModel* model_;
  Side side_;
  double turning_point_;
  double energy_;
  std::size_t n_;
};

/// Locates the single turning point of `side`; RegimeError otherwise.
WkbContext make_wkb_context(const PotentialModel& model, const Geometry& geometry, double energy,
                            Side side, std::size_t n);

/// Integral of sqrt(E - V) from x_t to the box end, minus (n + 3/4) pi hbar.
double quantization_residual(const PotentialModel& model, const Geometry& geometry, double hbar,
                             double energy, Side side, std::size_t n);

/// Root in E of the quantization residual inside (max(v_side, V(box end)), v0 + delta).
double predict_exterior_eigenvalue(const PotentialModel& model, const Geometry& geometry,
                                   double hbar, Side side, std::size_t n, double delta = -1.0);

/// v_alpha + ((m + 3/4) pi hbar / ell)^2.
double asymptotic_exterior_eigenvalue(const PotentialModel& model, double hbar, double ell,
                                      Side side, std::size_t m);

}  // namespace resbox
