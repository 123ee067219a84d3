#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "resbox/potential.hpp"

namespace resbox {

/// Three-point discretisation of -hbar^2 u'' + V u on (a, b) with Dirichlet
/// ends: n interior nodes x_i = a + (i + 1) h, h = (b - a) / (n + 1).
struct TridiagonalOperator {
  Interval interval;
  std::size_t n = 0;
  double h = 0.0;
  double hbar = 0.0;
  std::vector<double> diag;
  std::vector<double> offdiag;
  std::vector<double> offdiag_sq;  ///< offdiag[i]^2, cached for the Sturm recurrence

  [[nodiscard]] double node(std::size_t i) const noexcept {
    return interval.lo + h * static_cast<double>(i + 1);
  }
  [[nodiscard]] double diag_norm() const noexcept;

  /// Wraps explicit arrays (random test matrices, surrogate models). Unit
  /// spacing on (0, n + 1), hbar = 1.
  static TridiagonalOperator from_arrays(std::vector<double> diag, std::vector<double> offdiag);
};

/// Grid resolution policy shared by every solver in the pipeline.
struct SolverSettings {
  double points_per_wavelength = 100.0;  ///< target; never below kMinPointsPerWavelength
  bool richardson = true;                ///< extrapolate over (n, 2n + 1)
  double rel_tol = 1e-12;                ///< eigenvalue tolerance relative to max(1, |lambda|)
  std::uint64_t seed = 20240607;         ///< inverse-iteration start vector
  double spacing = 0.0;                  ///< fixed target spacing when > 0
};

inline constexpr double kMinPointsPerWavelength = 20.0;

/// Largest admissible spacing: 2 pi hbar / (ppw sqrt(max(E_max - min V, 1))).
double resolution_spacing(double hbar, double energy_span, double points_per_wavelength);

/// Interior node count for `interval` at roughly the given spacing.
std::size_t nodes_for_spacing(Interval interval, double spacing);

/// Builds the operator on n interior nodes. When `e_max` is supplied the
/// resolution bound is enforced at that energy and a ConfigError names the
/// required n.
TridiagonalOperator build_operator(const PotentialModel& model, Interval interval, double hbar,
                                   std::size_t n, std::optional<double> e_max = std::nullopt);

/// Number of eigenvalues strictly below lambda.
std::size_t sturm_count(const TridiagonalOperator& op, double lambda);

/// Gershgorin enclosure of the spectrum.
Interval spectrum_bounds(const TridiagonalOperator& op);

/// Eigenvalues with indices [first, first + count), ascending. A tolerance
/// of zero bisects until the bracket stops shrinking.
std::vector<double> eigenvalue_range(const TridiagonalOperator& op, std::size_t first,
                                     std::size_t count, double rel_tol = 1e-12);

/// The k lowest eigenvalues.
std::vector<double> eigenvalues_below(const TridiagonalOperator& op, std::size_t k,
                                      double rel_tol = 1e-12);

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  ///< h * sum u_i^2 = 1
  std::size_t index = 0;
};

/// Inverse iteration at shift lambda (at most five sweeps) from a seeded
/// random start. `against` lists already accepted vectors of nearby
/// eigenvalues to orthogonalise against.
EigenPair eigenvector(const TridiagonalOperator& op, double lambda, std::uint64_t seed = 20240607,
                      const std::vector<const EigenPair*>& against = {});

/// The k lowest eigenpairs, with clusters reorthogonalised.
std::vector<EigenPair> eigenpairs_below(const TridiagonalOperator& op, std::size_t k,
                                        std::uint64_t seed = 20240607);

/// Euclidean residual ||T u - lambda u|| for the unit-2-norm rescaled vector.
double residual_norm(const TridiagonalOperator& op, const EigenPair& pair);

/// Sign changes of a vector, ignoring entries below threshold * max|u|.
std::size_t sign_changes(const std::vector<double>& u, double threshold = 1e-10);

/// |u'| at a Dirichlet end from the one-sided second-order formula.
double boundary_derivative(const EigenPair& pair, const TridiagonalOperator& op, Side side);

/// Result of a Dirichlet eigenvalue solve on an interval with the grid policy.
struct DirichletSpectrum {
  std::vector<double> values;  ///< extrapolated when settings.richardson, raw otherwise
  std::vector<double> raw;     ///< values on the base grid
  std::size_t n = 0;           ///< base-grid interior nodes
  double h = 0.0;
};

/// Eigenvalues [first, first + count) on `interval`, with the grid chosen by
/// the policy (or the fixed node count when `n_override` is set). The grid
/// is refined automatically if the highest value breaks the resolution bound.
DirichletSpectrum dirichlet_eigenvalues(const PotentialModel& model, Interval interval,
                                        double hbar, std::size_t first, std::size_t count,
                                        const SolverSettings& settings,
                                        std::optional<std::size_t> n_override = std::nullopt);

/// (4 E(h/2) - E(h)) / 3.
inline double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace resbox
