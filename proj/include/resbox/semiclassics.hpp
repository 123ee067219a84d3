#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "resbox/decoupled.hpp"
#include "resbox/eigensolve.hpp"
#include "resbox/potential.hpp"
#include "resbox/sweep.hpp"

namespace resbox {

/// Surrogate for the tunneling parameter built from the interior eigenfunction:
/// t_bound = hbar^3 / (4 r^2) (|phi'(omega_-)|^2 + |phi'(omega_+)|^2), r = delta / 2.
struct TunnelingEstimate {
  double t_bound = 0.0;
  double r = 0.0;
  double delta = 0.0;
  double phi_prime_minus = 0.0;
  double phi_prime_plus = 0.0;
  double energy = 0.0;  ///< E^d
  double ell = 0.0;     ///< box half-width at which delta was measured
  std::size_t interior_index = 0;
};

TunnelingEstimate tunneling_surrogate(const PotentialModel& model, const Geometry& geometry,
                                      double hbar, std::size_t interior_index,
                                      const SolverSettings& settings = {});

/// ell in [geometry.ell, geometry.ell + one exterior period] where E^d is
/// farthest from both exterior spectra (sampled on `samples` points).
double most_isolated_ell(const PotentialModel& model, const Geometry& geometry, double hbar,
                         std::size_t interior_index, const SolverSettings& settings = {},
                         std::size_t samples = 33);

struct LocatedCrossing {
  double ell0 = 0.0;     ///< decoupled degeneracy on the balanced split of `side`
  double spacing = 0.0;  ///< box grid spacing used for the refinement
  CrossingReport report;
};

/// First well-isolated crossing of interior level `interior_index` with the
/// exterior family of `side` at ell >= geometry.ell: the decoupled degeneracy
/// seeds a bracket that is then refined on the full box.
LocatedCrossing locate_crossing(const PotentialModel& model, const Geometry& geometry, double hbar,
                                std::size_t interior_index, Side side,
                                const SolverSettings& settings = {},
                                const RefineOptions& options = {});

enum class Observable { gap_left, gap_right, t_bound };

std::string_view to_string(Observable observable);
std::optional<Observable> parse_observable(std::string_view text);

struct ScalingStudy {
  Observable observable = Observable::gap_right;
  std::size_t interior_index = 0;
  std::vector<double> hbar_values;  ///< descending
  std::vector<double> values;
  std::vector<double> log_values;
  std::vector<double> ells;         ///< crossing ell* (gaps) or measurement ell (t_bound)
  double fitted_slope = 0.0;        ///< d log(value) / d(1/hbar)
  double intercept = 0.0;
  double r_squared = 0.0;
  double agmon_reference = 0.0;     ///< d^-_{v0}, d^+_{v0}, or 2 d*
  double slope_ratio = 0.0;         ///< fitted_slope / (-agmon_reference)
};

/// Fits log(observable) against 1/hbar. Each hbar is an independent task.
/// Throws StudyError naming every hbar whose observable could not be produced.
ScalingStudy run_scaling_study(const PotentialModel& model, const Geometry& geometry,
                               Observable observable, std::vector<double> hbar_values,
                               std::size_t interior_index, const SolverSettings& settings = {},
                               const RefineOptions& options = {}, unsigned jobs = 1);

struct ResonanceRow {
  std::size_t level = 0;          ///< index in sigma(H^i)
  double well_mass = 0.0;         ///< probability between the two barriers
  double interior_energy = 0.0;   ///< E^d
  double resonance_energy = 0.0;  ///< flat-branch value at the most isolated ell
  double ell_flat = 0.0;
  double gap_left = 0.0;
  double ell_left = 0.0;
  double gap_right = 0.0;
  double ell_right = 0.0;
  double t_bound = 0.0;
  double d_minus = 0.0;
  double d_plus = 0.0;
  double width_order = 0.0;  ///< (max gap)^2, an order-of-magnitude estimate only
  Side larger_gap_side = Side::right;
};

struct ResonanceReport {
  double hbar = 0.0;
  double energy_ceiling = 0.0;  ///< lower of the two barrier tops
  std::vector<ResonanceRow> rows;
};

/// Fraction of the normalised interior eigenfunction lying between the
/// midpoints of the two barriers at its energy. Pocket states trapped next to
/// a split point score near zero.
double well_mass(const PotentialModel& model, const TridiagonalOperator& op, const EigenPair& pair);

/// One row per well-localised interior level (well_mass >= 1/2) below the
/// lower barrier top, among the lowest `max_levels` levels of H^i. Models
/// without a strict well give an empty report.
ResonanceReport resonance_report(const PotentialModel& model, const Geometry& geometry,
                                 double hbar, std::size_t max_levels,
                                 const SolverSettings& settings = {},
                                 const RefineOptions& options = {}, unsigned jobs = 1);

}  // namespace resbox
