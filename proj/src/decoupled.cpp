#include "resbox/decoupled.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "resbox/errors.hpp"

namespace resbox {

namespace {

Interval exterior_interval(const Geometry& geometry, Side side, double ell) {
  return side == Side::left ? Interval{-ell, geometry.omega_minus}
                            : Interval{geometry.omega_plus, ell};
}

double target_spacing(double hbar, const SolverSettings& settings) {
  return settings.spacing > 0.0
             ? settings.spacing
             : resolution_spacing(hbar, 1.0, settings.points_per_wavelength);
}

void require_geometry(const Geometry& g) { (void)make_geometry(g.omega_minus, g.omega_plus, g.ell); }

}  // namespace

std::vector<double> DecoupledSpectra::merged() const {
  std::vector<double> all;
  all.reserve(interior.size() + exterior_left.size() + exterior_right.size());
  all.insert(all.end(), interior.begin(), interior.end());
  all.insert(all.end(), exterior_left.begin(), exterior_left.end());
  all.insert(all.end(), exterior_right.begin(), exterior_right.end());
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<double> interior_spectrum(const PotentialModel& model, const Geometry& geometry,
                                      double hbar, std::size_t k, const SolverSettings& settings) {
  require_geometry(geometry);
  return dirichlet_eigenvalues(model, geometry.interior(), hbar, 0, k, settings).values;
}

std::vector<double> exterior_spectrum(const PotentialModel& model, const Geometry& geometry,
                                      double hbar, Side side, std::size_t k,
                                      const SolverSettings& settings) {
  require_geometry(geometry);
  return dirichlet_eigenvalues(model, geometry.exterior(side), hbar, 0, k, settings).values;
}

std::vector<double> exterior_neighbours(const PotentialModel& model, const Geometry& geometry,
                                        double hbar, Side side, double energy,
                                        const SolverSettings& settings) {
  const Interval region = geometry.exterior(side);
  const std::size_t n = nodes_for_spacing(region, target_spacing(hbar, settings));
  const auto op = build_operator(model, region, hbar, n);
  const std::size_t below = sturm_count(op, energy);
  const std::size_t first = below > 0 ? below - 1 : 0;
  const std::size_t last = std::min(below + 1, n);
  if (last <= first) return {};
  return dirichlet_eigenvalues(model, region, hbar, first, last - first, settings, n).values;
}

DecoupledSpectra decoupled_spectra(const PotentialModel& model, const Geometry& geometry,
                                   double hbar, std::size_t k_interior, std::size_t k_exterior,
                                   const SolverSettings& settings) {
  DecoupledSpectra s;
  s.ell = geometry.ell;
  s.interior = interior_spectrum(model, geometry, hbar, k_interior, settings);
  s.exterior_left = exterior_spectrum(model, geometry, hbar, Side::left, k_exterior, settings);
  s.exterior_right = exterior_spectrum(model, geometry, hbar, Side::right, k_exterior, settings);
  return s;
}

double isolation_delta(const std::vector<double>& merged, double target, double tolerance) {
  if (!std::isfinite(target)) throw DomainError("isolation_delta: target must be finite");
  const double tol = tolerance >= 0.0 ? tolerance : 1e-9 * std::max(1.0, std::abs(target));
  std::size_t hits = 0;
  double nearest_other = std::numeric_limits<double>::infinity();
  bool consumed = false;
  for (double e : merged) {
    const double d = std::abs(e - target);
    if (d <= tol) ++hits;
    if (d <= tol && !consumed) {
      consumed = true;
      continue;
    }
    nearest_other = std::min(nearest_other, d);
  }
  if (hits == 0) {
    throw DomainError("isolation_delta: target " + std::to_string(target) +
                      " is not in the decoupled spectrum");
  }
  if (hits > 1) return 0.0;
  return nearest_other;
}

double isolation_delta(const DecoupledSpectra& spectra, double target, double tolerance) {
  return isolation_delta(spectra.merged(), target, tolerance);
}

namespace {

struct BranchSolver {
  const PotentialModel& model;
  const Geometry& geometry;
  double hbar;
  Side side;
  const SolverSettings& settings;

  double value(double ell, std::size_t m, std::size_t n) const {
    return dirichlet_eigenvalues(model, exterior_interval(geometry, side, ell), hbar, m, 1,
                                 settings, n)
        .values[0];
  }

  std::size_t count_below(double ell, double energy, std::size_t n) const {
    return sturm_count(build_operator(model, exterior_interval(geometry, side, ell), hbar, n),
                       energy);
  }

  /// Root of E^e_m(ell) = energy in [lo, hi] with n nodes.
  std::optional<double> root(double energy, std::size_t m, double lo, double hi,
                             std::size_t n) const {
    const auto f = [&](double ell) { return value(ell, m, n) - energy; };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (!(flo > 0.0 && fhi < 0.0)) return std::nullopt;
    return bisect_root(f, lo, hi, 1e-13 * std::max(1.0, hi));
  }
};

DegeneracyResult solve_branch(const BranchSolver& solver, double energy, std::size_t m,
                              Interval bracket, std::size_t n_coarse, double spacing) {
  const auto first = solver.root(energy, m, bracket.lo, bracket.hi, n_coarse);
  if (!first) {
    throw SearchError("find_degeneracy_ell: exterior branch " + std::to_string(m) +
                      " does not cross E^d=" + std::to_string(energy) + " inside [" +
                      std::to_string(bracket.lo) + ", " + std::to_string(bracket.hi) + "]");
  }
  DegeneracyResult r;
  r.ell0 = *first;
  r.nodes = n_coarse;
  // Polish on a grid whose spacing matches the target at ell0.
  const Interval local = exterior_interval(solver.geometry, solver.side, *first);
  const std::size_t n_local = nodes_for_spacing(local, spacing);
  const double pad = 0.02 * local.length();
  if (n_local != n_coarse) {
    const auto polished = solver.root(energy, m, std::max(bracket.lo, *first - pad),
                                      std::min(bracket.hi, *first + pad), n_local);
    if (polished) {
      r.ell0 = *polished;
      r.nodes = n_local;
    }
  }
  r.exterior_index = m;
  r.energy = energy;
  r.mismatch = std::abs(solver.value(r.ell0, m, r.nodes) - energy);
  const double eps = 1e-6 * std::max(1.0, r.ell0);
  r.monotone = solver.value(r.ell0 - eps, m, r.nodes) > solver.value(r.ell0 + eps, m, r.nodes);

  Geometry at = solver.geometry;
  at.ell = r.ell0;
  const auto other = exterior_neighbours(solver.model, at, solver.hbar, opposite(solver.side),
                                         energy, solver.settings);
  r.other_side_isolation = std::numeric_limits<double>::infinity();
  for (double e : other) r.other_side_isolation = std::min(r.other_side_isolation, std::abs(e - energy));
  return r;
}

struct DegeneracySetup {
  double energy;
  std::size_t n_coarse;
  std::size_t c_lo;
  std::size_t c_hi;
  double spacing;
};

DegeneracySetup prepare(const BranchSolver& solver, std::size_t interior_index, Interval bracket) {
  const Geometry& g = solver.geometry;
  if (!(bracket.lo < bracket.hi)) throw SearchError("find_degeneracy_ell: empty bracket");
  if (!(bracket.lo > std::max(-g.omega_minus, g.omega_plus))) {
    throw SearchError("find_degeneracy_ell: bracket must lie beyond both split points");
  }
  DegeneracySetup s{};
  const auto interior = interior_spectrum(solver.model, g, solver.hbar, interior_index + 1,
                                          solver.settings);
  s.energy = interior[interior_index];
  s.spacing = target_spacing(solver.hbar, solver.settings);
  s.n_coarse = nodes_for_spacing(exterior_interval(g, solver.side, bracket.hi), s.spacing);
  s.c_lo = solver.count_below(bracket.lo, s.energy, s.n_coarse);
  s.c_hi = solver.count_below(bracket.hi, s.energy, s.n_coarse);
  return s;
}

}  // namespace

std::vector<DegeneracyResult> enumerate_degeneracies(const PotentialModel& model,
                                                     const Geometry& geometry, double hbar,
                                                     std::size_t interior_index, Side side,
                                                     Interval bracket,
                                                     const SolverSettings& settings) {
  const BranchSolver solver{model, geometry, hbar, side, settings};
  const auto s = prepare(solver, interior_index, bracket);
  std::vector<DegeneracyResult> out;
  // Sturm counts come from the raw grid; extrapolated roots may sit on either
  // side of a bracket end, so neighbouring branches are probed as well.
  const std::size_t lo = s.c_lo > 0 ? s.c_lo - 1 : 0;
  for (std::size_t m = lo; m <= s.c_hi; ++m) {
    try {
      out.push_back(solve_branch(solver, s.energy, m, bracket, s.n_coarse, s.spacing));
    } catch (const SearchError&) {
    }
  }
  std::sort(out.begin(), out.end(),
            [](const DegeneracyResult& a, const DegeneracyResult& b) { return a.ell0 < b.ell0; });
  return out;
}

DegeneracyResult find_degeneracy_ell(const PotentialModel& model, const Geometry& geometry,
                                     double hbar, std::size_t interior_index, Side side,
                                     Interval bracket, const SolverSettings& settings) {
  const auto all = enumerate_degeneracies(model, geometry, hbar, interior_index, side, bracket,
                                          settings);
  if (all.empty()) {
    throw SearchError("find_degeneracy_ell: no exterior eigenvalue on the " +
                      std::string(to_string(side)) + " side crosses the interior level " +
                      std::to_string(interior_index) + " for ell in [" +
                      std::to_string(bracket.lo) + ", " + std::to_string(bracket.hi) + "]");
  }
  return all.front();
}

InterlacingReport interlacing_check(const PotentialModel& model, const Geometry& geometry,
                                    double hbar, std::size_t k, const SolverSettings& settings) {
  require_geometry(geometry);
  const Interval box = geometry.box();
  const std::size_t n = nodes_for_spacing(box, target_spacing(hbar, settings));
  const auto op = build_operator(model, box, hbar, n);
  const auto snap = [&](double omega) {
    const double idx = std::round((omega - box.lo) / op.h) - 1.0;
    return static_cast<std::size_t>(std::clamp(idx, 1.0, static_cast<double>(n - 2)));
  };
  const std::size_t i_minus = snap(geometry.omega_minus);
  const std::size_t i_plus = snap(geometry.omega_plus);
  if (i_plus <= i_minus + 1) throw DomainError("interlacing_check: split points too close");

  const auto block = [&](std::size_t from, std::size_t to) {  // nodes [from, to)
    std::vector<double> d(op.diag.begin() + from, op.diag.begin() + to);
    std::vector<double> e(op.offdiag.begin() + from, op.offdiag.begin() + (to - 1));
    return TridiagonalOperator::from_arrays(std::move(d), std::move(e));
  };
  const auto lowest = [&](const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
    std::vector<double> all;
    for (auto [from, to] : ranges) {
      if (to <= from) continue;
      const auto b = block(from, to);
      const auto ev = eigenvalues_below(b, std::min(k, b.n), 0.0);
      all.insert(all.end(), ev.begin(), ev.end());
    }
    std::sort(all.begin(), all.end());
    if (all.size() > k) all.resize(k);
    return all;
  };

  InterlacingReport r;
  r.k = k;
  r.full = eigenvalues_below(op, k, 0.0);
  r.decoupled = lowest({{0, i_minus}, {i_minus + 1, i_plus}, {i_plus + 1, n}});
  r.one_condition = lowest({{0, i_plus}, {i_plus + 1, n}});
  r.omega_minus_used = op.node(i_minus);
  r.omega_plus_used = op.node(i_plus);

  const double slack = 64.0 * DBL_EPSILON * (op.diag_norm() + 2.0 * std::abs(op.offdiag[0]));
  const auto check = [&](const std::vector<double>& split, int shift) {
    bool ok = true;
    for (std::size_t j = 0; j < split.size(); ++j) {
      if (split[j] < r.full[j] - slack) {
        r.violations.push_back({j, 0, r.full[j], split[j]});
        ok = false;
      }
      if (j + shift < r.full.size() && split[j] > r.full[j + shift] + slack) {
        r.violations.push_back({j, shift, split[j], r.full[j + shift]});
        ok = false;
      }
    }
    return ok;
  };
  r.two_condition_ok = check(r.decoupled, 2);
  r.one_condition_ok = check(r.one_condition, 1);
  for (int s = 0; s <= 2; ++s) {
    bool holds = true;
    for (std::size_t j = 0; j + s < r.full.size() && j < r.decoupled.size(); ++j) {
      if (r.decoupled[j] > r.full[j + s] + slack) holds = false;
    }
    if (holds) {
      r.shift_needed = s;
      break;
    }
    r.shift_needed = s + 1;
  }
  return r;
}

}  // namespace resbox
