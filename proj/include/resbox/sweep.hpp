#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "resbox/agmon.hpp"
#include "resbox/eigensolve.hpp"
#include "resbox/potential.hpp"

namespace resbox {

enum class BranchTag { interior_like, exterior_left, exterior_right, mixed };

std::string_view to_string(BranchTag tag);

/// Eigenvalue curves E_j(ell) of H(ell) over an ell grid.
struct BranchSet {
  std::vector<double> ell_grid;
  std::size_t k = 0;
  double hbar = 0.0;
  Geometry geometry;        ///< split points used for classification
  double spacing = 0.0;     ///< grid spacing shared by every box
  std::vector<std::vector<double>> energies;  ///< [i][j], extrapolated when enabled
  std::vector<std::vector<double>> raw;       ///< [i][j], base grid
  std::vector<std::vector<int>> labels;       ///< [i][j], diabatic branch label

  // Filled by classify_branches.
  std::vector<std::vector<BranchTag>> tags;   ///< [i][j]
  std::vector<BranchTag> classification;      ///< per label
  std::vector<double> interior;               ///< sigma(H^i)
  std::vector<std::vector<double>> exterior_left;   ///< [i] sigma(H^e_-(ell_i))
  std::vector<std::vector<double>> exterior_right;  ///< [i] sigma(H^e_+(ell_i))
  /// Per side: interior levels and exterior spectra [i] for the balanced
  /// split of that side, used to decide which family takes part in a
  /// crossing.
  std::array<std::vector<double>, 2> balanced_interior;
  std::array<std::vector<std::vector<double>>, 2> balanced_exterior;

  [[nodiscard]] std::size_t size() const noexcept { return ell_grid.size(); }
  [[nodiscard]] bool classified() const noexcept { return !tags.empty(); }
};

/// k lowest eigenvalues of H(ell) at n_ell uniformly spaced ell values. Every
/// box uses the same target spacing (settings.spacing, or the resolution
/// policy at the top of the requested spectrum). Grid points run in parallel.
BranchSet sweep_eigenvalues(const PotentialModel& model, const Geometry& geometry, double hbar,
                            Interval ell_range, std::size_t n_ell, std::size_t k,
                            const SolverSettings& settings = {}, unsigned jobs = 1);

/// Per-point tags: interior_like for slow curves sitting on sigma(H^i),
/// exterior_* for curves within a quarter spacing of sigma(H^e_+-(ell)),
/// mixed otherwise. Per-label tags take the majority of non-mixed points.
void classify_branches(BranchSet& branches, const PotentialModel& model,
                       const SolverSettings& settings = {}, unsigned jobs = 1);

struct CrossingCandidate {
  std::size_t slot = 0;   ///< lower sorted index j of the pair (j, j + 1)
  std::size_t point = 0;  ///< grid index of the local gap minimum
  Interval bracket;       ///< (ell_{i-1}, ell_{i+1})
  double grid_gap = 0.0;
  Side side = Side::right;
  std::size_t interior_index = 0;
};

/// Local minima of adjacent gaps that straddle an interior level next to an
/// interior-like curve. Requires classified branches.
std::vector<CrossingCandidate> detect_avoided_crossings(const BranchSet& branches);

struct CrossingReport {
  double ell_star = 0.0;
  double center_energy = 0.0;     ///< pair midpoint at ell*, on the refinement grid (no extrapolation)
  double gap = 0.0;
  Side side = Side::right;
  std::size_t interior_index = 0;
  double delta_isolation = 0.0;   ///< dist(E^d, sigma(H^e_{-alpha}(ell*)))
  double agmon_prediction = 0.0;  ///< d^alpha_{v0}
  double interior_energy = 0.0;   ///< E^d
  Interval bracket;
  double slope_difference = 0.0;  ///< |d(E_+ - E_-)/d ell| away from the crossing
  double width = 0.0;             ///< 2 gap / slope_difference
  int evaluations = 0;
  bool isolated = true;           ///< delta_isolation >= c hbar^N
};

struct RefineOptions {
  double rel_ell_tol = 1e-10;
  int max_evaluations = 80;
  double delta_c = 1.0;
  double delta_n = 4.0;
};

/// Golden-section minimisation of E_{j+1} - E_j over the candidate bracket,
/// on a box grid with a fixed node count and eigenvalues bisected to machine
/// precision.
CrossingReport refine_gap(const PotentialModel& model, const Geometry& geometry, double hbar,
                          const CrossingCandidate& candidate, double spacing,
                          const std::vector<double>& interior, const SolverSettings& settings = {},
                          const RefineOptions& options = {});

struct GapMinimum {
  double ell = 0.0;
  double gap = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the minimum of a gap function on `bracket`.
/// Throws RefinementError when the bracket is not unimodal (interior sample
/// not below both ends, or the minimum lands on an end).
GapMinimum minimize_gap(const std::function<double(double)>& gap, Interval bracket,
                        const RefineOptions& options = {});

struct FlatWindow {
  std::size_t first = 0;  ///< grid indices [first, last]
  std::size_t last = 0;
  std::vector<double> values;
  double total_variation = 0.0;
  bool differences_decrease = false;
};

/// Flat-branch windows between consecutive crossings, trimmed by one grid
/// point and by `widths` crossing widths. Values are the extrapolated
/// eigenvalues nearest the interior level. `noise` is the allowance used
/// when comparing successive differences.
std::vector<FlatWindow> flat_windows(const BranchSet& branches, double interior_energy,
                                     const std::vector<CrossingReport>& crossings, double widths,
                                     double noise);

}  // namespace resbox
