#pragma once

#include <cstddef>
#include <vector>

#include "resbox/eigensolve.hpp"
#include "resbox/potential.hpp"

namespace resbox {

struct DecoupledSpectra {
  std::vector<double> interior;        ///< sigma(H^i), ascending
  std::vector<double> exterior_left;   ///< sigma(H^e_-(ell))
  std::vector<double> exterior_right;  ///< sigma(H^e_+(ell))
  double ell = 0.0;

  [[nodiscard]] const std::vector<double>& exterior(Side side) const noexcept {
    return side == Side::left ? exterior_left : exterior_right;
  }
  /// Union of the three spectra, ascending (multiplicities kept).
  [[nodiscard]] std::vector<double> merged() const;
};

/// Lowest k Dirichlet eigenvalues on (omega_-, omega_+).
std::vector<double> interior_spectrum(const PotentialModel& model, const Geometry& geometry,
                                      double hbar, std::size_t k,
                                      const SolverSettings& settings = {});

/// Lowest k Dirichlet eigenvalues on (-ell, omega_-) or (omega_+, ell).
std::vector<double> exterior_spectrum(const PotentialModel& model, const Geometry& geometry,
                                      double hbar, Side side, std::size_t k,
                                      const SolverSettings& settings = {});

/// Exterior eigenvalues of `side` adjacent to `energy`: the largest one below
/// and the smallest one at or above it (either may be missing).
std::vector<double> exterior_neighbours(const PotentialModel& model, const Geometry& geometry,
                                        double hbar, Side side, double energy,
                                        const SolverSettings& settings = {});

DecoupledSpectra decoupled_spectra(const PotentialModel& model, const Geometry& geometry,
                                   double hbar, std::size_t k_interior, std::size_t k_exterior,
                                   const SolverSettings& settings = {});

/// Distance from `target` to the rest of the merged spectrum; zero when the
/// target occurs twice. `tolerance` decides membership (default
/// 1e-9 max(1, |target|)).
double isolation_delta(const DecoupledSpectra& spectra, double target, double tolerance = -1.0);
double isolation_delta(const std::vector<double>& merged, double target, double tolerance = -1.0);

struct DegeneracyResult {
  double ell0 = 0.0;
  std::size_t exterior_index = 0;   ///< branch m with E^e_m(ell0) = E^d
  double energy = 0.0;              ///< E^d
  double mismatch = 0.0;            ///< |E^e_m(ell0) - E^d|
  double other_side_isolation = 0.0;  ///< dist(E^d, sigma(H^e_{-alpha}(ell0)))
  std::size_t nodes = 0;            ///< exterior grid size used for the final root
  bool monotone = true;             ///< E^e_m decreasing at the bracket ends
};

/// Solves E^e_m(ell) = E^d for the first exterior branch m of `side` that
/// crosses E^d = sigma(H^i)[interior_index] inside `bracket`.
DegeneracyResult find_degeneracy_ell(const PotentialModel& model, const Geometry& geometry,
                                     double hbar, std::size_t interior_index, Side side,
                                     Interval bracket, const SolverSettings& settings = {});

/// Every exterior branch of `side` that crosses E^d inside `bracket`,
/// ascending in ell0.
std::vector<DegeneracyResult> enumerate_degeneracies(const PotentialModel& model,
                                                     const Geometry& geometry, double hbar,
                                                     std::size_t interior_index, Side side,
                                                     Interval bracket,
                                                     const SolverSettings& settings = {});

struct InterlacingViolation {
  std::size_t index = 0;
  int shift = 0;        ///< 0 for the lower bound, 1 or 2 for the upper bound
  double lhs = 0.0;
  double rhs = 0.0;
};

struct InterlacingReport {
  std::size_t k = 0;
  std::vector<double> full;           ///< sigma(H(ell))
  std::vector<double> decoupled;      ///< sigma(H^d(ell)), two Dirichlet points
  std::vector<double> one_condition;  ///< Dirichlet point at omega_+ only
  double omega_minus_used = 0.0;      ///< split points snapped to grid nodes
  double omega_plus_used = 0.0;
  std::vector<InterlacingViolation> violations;
  bool two_condition_ok = false;
  bool one_condition_ok = false;
  int shift_needed = 0;  ///< smallest s with decoupled[j] <= full[j + s] for all tested j

  [[nodiscard]] bool ok() const noexcept { return two_condition_ok && one_condition_ok; }
};

/// lambda_j(H) <= lambda_j(H^d) <= lambda_{j+2}(H), and the one-condition
/// version with shift 1. The split operators are principal submatrices of
/// the box operator (the nodes nearest omega_+- are removed), so the
/// comparison is exact up to eigenvalue tolerance.
InterlacingReport interlacing_check(const PotentialModel& model, const Geometry& geometry,
                                    double hbar, std::size_t k,
                                    const SolverSettings& settings = {});

}  // namespace resbox
