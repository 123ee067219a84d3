#include "resbox/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "resbox/agmon.hpp"
#include "resbox/errors.hpp"
#include "resbox/numerics.hpp"
#include "resbox/parallel.hpp"

namespace resbox {

namespace {

Interval box_of(double ell) { return {-ell, ell}; }

/// Box spacing for energies up to `energy`, matching the sweep policy.
double box_spacing(const PotentialModel& model, double ell, double hbar, double energy,
                   const SolverSettings& settings) {
  if (settings.spacing > 0.0) return settings.spacing;
  const double span = 1.05 * (energy - model.minimum_on(box_of(ell)));
  return resolution_spacing(hbar, span, settings.points_per_wavelength);
}

/// ell-distance between successive exterior levels crossing `energy`.
double exterior_period(const PotentialModel& model, double hbar, double energy, Side side) {
  const double kinetic = energy - model.v_side(side);
  if (!(kinetic > 0.0)) {
    throw SearchError("energy " + std::to_string(energy) + " does not exceed v_" +
                      std::string(to_string(side)) + "; no exterior level can cross it");
  }
  return std::numbers::pi * hbar / std::sqrt(kinetic);
}

double delta_at(const PotentialModel& model, const Geometry& geometry, double hbar,
                const std::vector<double>& interior, double energy,
                const SolverSettings& settings) {
  std::vector<double> merged = interior;
  for (Side side : {Side::left, Side::right}) {
    const auto near = exterior_neighbours(model, geometry, hbar, side, energy, settings);
    merged.insert(merged.end(), near.begin(), near.end());
  }
  std::sort(merged.begin(), merged.end());
  return isolation_delta(merged, energy);
}

}  // namespace

TunnelingEstimate tunneling_surrogate(const PotentialModel& model, const Geometry& geometry,
                                      double hbar, std::size_t interior_index,
                                      const SolverSettings& settings) {
  if (!(hbar > 0.0)) throw DomainError("tunneling_surrogate: hbar must be positive");
  const auto interior = interior_spectrum(model, geometry, hbar, interior_index + 2, settings);
  const double energy = interior[interior_index];

  const Interval region = geometry.interior();
  const double spacing =
      settings.spacing > 0.0
          ? settings.spacing
          : resolution_spacing(hbar, 1.05 * (interior.back() - model.minimum_on(region)),
                               settings.points_per_wavelength);
  const auto op = build_operator(model, region, hbar, nodes_for_spacing(region, spacing));
  const auto pairs = eigenpairs_below(op, interior_index + 1, settings.seed);
  const EigenPair& phi = pairs[interior_index];

  TunnelingEstimate t;
  t.interior_index = interior_index;
  t.energy = energy;
  t.ell = geometry.ell;
  t.phi_prime_minus = boundary_derivative(phi, op, Side::left);
  t.phi_prime_plus = boundary_derivative(phi, op, Side::right);
  t.delta = delta_at(model, geometry, hbar, interior, energy, settings);
  if (!(t.delta > 0.0)) {
    throw DomainError("tunneling_surrogate: E^d is degenerate with the exterior spectrum at ell=" +
                      std::to_string(geometry.ell));
  }
  t.r = 0.5 * t.delta;
  const double derivs = t.phi_prime_minus * t.phi_prime_minus + t.phi_prime_plus * t.phi_prime_plus;
  t.t_bound = hbar * hbar * hbar / (4.0 * t.r * t.r) * derivs;
  return t;
}

double most_isolated_ell(const PotentialModel& model, const Geometry& geometry, double hbar,
                         std::size_t interior_index, const SolverSettings& settings,
                         std::size_t samples) {
  const auto interior = interior_spectrum(model, geometry, hbar, interior_index + 2, settings);
  const double energy = interior[interior_index];
  double period = 0.0;
  for (Side side : {Side::left, Side::right}) {
    if (energy > model.v_side(side)) {
      period = std::max(period, exterior_period(model, hbar, energy, side));
    }
  }
  if (period == 0.0 || samples < 2) return geometry.ell;
  double best_ell = geometry.ell;
  double best = -1.0;
  for (double ell : linspace(geometry.ell, geometry.ell + period, samples)) {
    const double d = delta_at(model, geometry.with_ell(ell), hbar, interior, energy, settings);
    if (d > best) {
      best = d;
      best_ell = ell;
    }
  }
  return best_ell;
}

LocatedCrossing locate_crossing(const PotentialModel& model, const Geometry& geometry, double hbar,
                                std::size_t interior_index, Side side,
                                const SolverSettings& settings, const RefineOptions& options) {
  const Geometry split =
      model.has_strict_well() ? balanced_geometry(model, side, geometry.ell) : geometry;
  const auto interior = interior_spectrum(model, geometry, hbar, interior_index + 2, settings);
  const double target = interior[interior_index];

  LocatedCrossing out;
  const double period = exterior_period(model, hbar, target, side);
  const double reach = geometry.ell + 1.5 * period;
  out.spacing = box_spacing(model, reach, hbar, interior.back(), settings);

  SolverSettings raw = settings;
  raw.richardson = false;
  raw.spacing = out.spacing;
  const auto found = enumerate_degeneracies(model, split, hbar, interior_index, side,
                                            {geometry.ell, reach}, raw);
  if (found.empty()) {
    throw SearchError("no " + std::string(to_string(side)) + " exterior level crosses interior level " +
                      std::to_string(interior_index) + " for ell in [" +
                      std::to_string(geometry.ell) + ", " + std::to_string(reach) + "]");
  }
  const double threshold = options.delta_c * std::pow(hbar, options.delta_n);
  auto pick = std::find_if(found.begin(), found.end(), [&](const DegeneracyResult& d) {
    return d.other_side_isolation >= threshold;
  });
  if (pick == found.end()) {
    pick = std::max_element(found.begin(), found.end(), [](const auto& a, const auto& b) {
      return a.other_side_isolation < b.other_side_isolation;
    });
  }
  out.ell0 = pick->ell0;

  // Half-width of the refinement bracket: well inside the distance to any
  // other level crossing E^d, so the pair gap stays unimodal.
  double nearest = period;
  for (const auto& d : found) {
    if (&d != &*pick) nearest = std::min(nearest, std::abs(d.ell0 - out.ell0));
  }
  const Side other = opposite(side);
  if (target > model.v_side(other)) {
    const Geometry other_split =
        model.has_strict_well() ? balanced_geometry(model, other, geometry.ell) : geometry;
    const double p = exterior_period(model, hbar, target, other);
    const Interval around{std::max(out.ell0 - p, std::max(-split.omega_minus, split.omega_plus) +
                                                     out.spacing),
                          out.ell0 + p};
    for (const auto& d :
         enumerate_degeneracies(model, other_split, hbar, interior_index, other, around, raw)) {
      nearest = std::min(nearest, std::abs(d.ell0 - out.ell0));
    }
  }
  const double half = 0.4 * nearest;

  // The crossing pair is the closest adjacent pair of box levels around E^d.
  const auto op = build_operator(model, box_of(out.ell0), hbar,
                                 nodes_for_spacing(box_of(out.ell0), out.spacing));
  const std::size_t below = sturm_count(op, target);
  const std::size_t first = below >= 2 ? below - 2 : 0;
  const std::size_t count = std::min(first + 4, op.n) - first;
  const auto levels = eigenvalue_range(op, first, count, 0.0);
  std::size_t slot = first;
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q + 1 < levels.size(); ++q) {
    if (levels[q + 1] - levels[q] < smallest) {
      smallest = levels[q + 1] - levels[q];
      slot = first + q;
    }
  }

  CrossingCandidate candidate;
  candidate.slot = slot;
  candidate.bracket = {out.ell0 - half, out.ell0 + half};
  candidate.grid_gap = smallest;
  candidate.side = side;
  candidate.interior_index = interior_index;
  out.report = refine_gap(model, geometry, hbar, candidate, out.spacing, interior, settings, options);
  if (out.report.interior_index != interior_index) {
    throw RefinementError("refined crossing near ell=" + std::to_string(out.ell0) +
                          " belongs to interior level " +
                          std::to_string(out.report.interior_index) + ", not " +
                          std::to_string(interior_index));
  }
  return out;
}

std::string_view to_string(Observable observable) {
  switch (observable) {
    case Observable::gap_left:
      return "gap_left";
    case Observable::gap_right:
      return "gap_right";
    case Observable::t_bound:
      return "t_bound";
  }
  return "unknown";
}

std::optional<Observable> parse_observable(std::string_view text) {
  for (Observable o : {Observable::gap_left, Observable::gap_right, Observable::t_bound}) {
    if (text == to_string(o)) return o;
  }
  return std::nullopt;
}

ScalingStudy run_scaling_study(const PotentialModel& model, const Geometry& geometry,
                               Observable observable, std::vector<double> hbar_values,
                               std::size_t interior_index, const SolverSettings& settings,
                               const RefineOptions& options, unsigned jobs) {
  if (hbar_values.size() < 4) throw DomainError("scaling study needs at least 4 hbar values");
  for (double h : hbar_values) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("scaling study: hbar must be positive");
  }
  std::sort(hbar_values.begin(), hbar_values.end(), std::greater<>());
  if (std::adjacent_find(hbar_values.begin(), hbar_values.end()) != hbar_values.end()) {
    throw DomainError("scaling study: hbar values must be distinct");
  }

  ScalingStudy s;
  s.observable = observable;
  s.interior_index = interior_index;
  s.hbar_values = hbar_values;
  const std::size_t n = hbar_values.size();
  s.values.assign(n, 0.0);
  s.ells.assign(n, 0.0);
  std::vector<std::string> failures(n);

  parallel_for(n, jobs, [&](std::size_t i) {
    const double hbar = hbar_values[i];
    try {
      if (observable == Observable::t_bound) {
        const double ell = most_isolated_ell(model, geometry, hbar, interior_index, settings);
        s.values[i] =
            tunneling_surrogate(model, geometry.with_ell(ell), hbar, interior_index, settings)
                .t_bound;
        s.ells[i] = ell;
      } else {
        const Side side = observable == Observable::gap_left ? Side::left : Side::right;
        const auto c = locate_crossing(model, geometry, hbar, interior_index, side, settings, options);
        s.values[i] = c.report.gap;
        s.ells[i] = c.report.ell_star;
      }
      if (!(s.values[i] > 0.0) || !std::isfinite(s.values[i])) {
        failures[i] = "non-positive observable " + std::to_string(s.values[i]);
      }
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  std::ostringstream why;
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) why << " [hbar=" << hbar_values[i] << ": " << failures[i] << "]";
  }
  if (!why.str().empty()) {
    throw StudyError("scaling study (" + std::string(to_string(observable)) + ") failed at" +
                     why.str());
  }

  std::vector<double> inv(n);
  s.log_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv[i] = 1.0 / hbar_values[i];
    s.log_values[i] = std::log(s.values[i]);
  }
  const LinearFit fit = fit_line(inv, s.log_values);
  s.fitted_slope = fit.slope;
  s.intercept = fit.intercept;
  s.r_squared = fit.r_squared;

  const auto metrics = agmon_summary(model, geometry);
  switch (observable) {
    case Observable::gap_left:
      s.agmon_reference = metrics.d_minus;
      break;
    case Observable::gap_right:
      s.agmon_reference = metrics.d_plus;
      break;
    case Observable::t_bound:
      s.agmon_reference = 2.0 * metrics.d_star;
      break;
  }
  s.slope_ratio = s.agmon_reference > 0.0 ? s.fitted_slope / -s.agmon_reference
                                          : std::numeric_limits<double>::quiet_NaN();
  return s;
}

double well_mass(const PotentialModel& model, const TridiagonalOperator& op, const EigenPair& pair) {
  const double x0 = model.x0();
  const auto blocked = forbidden_region(model, pair.value, op.interval);
  double lo = op.interval.lo;
  double hi = op.interval.hi;
  for (const Interval& b : blocked) {
    if (b.hi <= x0) lo = std::max(lo, b.midpoint());
    if (b.lo >= x0) hi = std::min(hi, b.midpoint());
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < op.n; ++i) {
    const double x = op.node(i);
    if (x > lo && x < hi) mass += pair.vector[i] * pair.vector[i];
  }
  return mass * op.h;
}

ResonanceReport resonance_report(const PotentialModel& model, const Geometry& geometry,
                                 double hbar, std::size_t max_levels,
                                 const SolverSettings& settings, const RefineOptions& options,
                                 unsigned jobs) {
  if (!(hbar > 0.0)) throw DomainError("resonance_report: hbar must be positive");
  ResonanceReport report;
  report.hbar = hbar;
  if (!model.has_strict_well() || max_levels == 0) return report;
  report.energy_ceiling = std::min(model.barrier_top(Side::left), model.barrier_top(Side::right));

  const auto interior = interior_spectrum(model, geometry, hbar, max_levels, settings);
  const Interval region = geometry.interior();
  const double spacing =
      settings.spacing > 0.0
          ? settings.spacing
          : resolution_spacing(hbar, 1.05 * (interior.back() - model.minimum_on(region)),
                               settings.points_per_wavelength);
  const auto op = build_operator(model, region, hbar, nodes_for_spacing(region, spacing));
  const auto pairs = eigenpairs_below(op, max_levels, settings.seed);
  for (std::size_t q = 0; q < interior.size() && interior[q] < report.energy_ceiling; ++q) {
    const double m = well_mass(model, op, pairs[q]);
    if (m < 0.5) continue;
    ResonanceRow row;
    row.level = q;
    row.well_mass = m;
    report.rows.push_back(row);
  }
  const auto metrics = agmon_summary(model, geometry);

  parallel_for(report.rows.size(), jobs, [&](std::size_t r) {
    ResonanceRow& row = report.rows[r];
    const std::size_t q = row.level;
    row.interior_energy = interior[q];
    row.d_minus = metrics.d_minus;
    row.d_plus = metrics.d_plus;

    const auto left = locate_crossing(model, geometry, hbar, q, Side::left, settings, options);
    const auto right = locate_crossing(model, geometry, hbar, q, Side::right, settings, options);
    row.gap_left = left.report.gap;
    row.ell_left = left.report.ell_star;
    row.gap_right = right.report.gap;
    row.ell_right = right.report.ell_star;
    row.larger_gap_side = row.gap_left > row.gap_right ? Side::left : Side::right;
    const double big = std::max(row.gap_left, row.gap_right);
    row.width_order = big * big;

    row.ell_flat = most_isolated_ell(model, geometry, hbar, q, settings);
    row.t_bound = tunneling_surrogate(model, geometry.with_ell(row.ell_flat), hbar, q, settings).t_bound;

    SolverSettings fixed = settings;
    fixed.spacing = box_spacing(model, row.ell_flat, hbar, interior[q], settings);
    const auto op = build_operator(model, box_of(row.ell_flat), hbar,
                                   nodes_for_spacing(box_of(row.ell_flat), fixed.spacing));
    const std::size_t below = sturm_count(op, interior[q]);
    const std::size_t first = below > 0 ? below - 1 : 0;
    const auto box = dirichlet_eigenvalues(model, box_of(row.ell_flat), hbar, first, 2, fixed);
    row.resonance_energy = box.values[0];
    for (double e : box.values) {
      if (std::abs(e - interior[q]) < std::abs(row.resonance_energy - interior[q])) {
        row.resonance_energy = e;
      }
    }
  });
  return report;
}

}  // namespace resbox
