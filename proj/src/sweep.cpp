#include "resbox/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "resbox/decoupled.hpp"
#include "resbox/errors.hpp"
#include "resbox/parallel.hpp"

namespace resbox {

std::string_view to_string(BranchTag tag) {
  switch (tag) {
    case BranchTag::interior_like:
      return "interior_like";
    case BranchTag::exterior_left:
      return "exterior_left";
    case BranchTag::exterior_right:
      return "exterior_right";
    case BranchTag::mixed:
      return "mixed";
  }
  return "mixed";
}

namespace {

Interval box_of(double ell) { return {-ell, ell}; }

/// Diabatic labels: at each step the labels of the previous point are
/// ranked by their linear prediction and handed to the sorted slots in that
/// order. The top slot opens a new label when its value is far from the
/// prediction of the label it would inherit.
std::vector<std::vector<int>> track_labels(const std::vector<double>& ell,
                                           const std::vector<std::vector<double>>& e) {
  const std::size_t n = ell.size();
  std::vector<std::vector<int>> labels(n);
  if (n == 0) return labels;
  const std::size_t k = e[0].size();
  labels[0].resize(k);
  std::iota(labels[0].begin(), labels[0].end(), 0);
  int next_label = static_cast<int>(k);
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<std::pair<double, int>> predicted(k);
    for (std::size_t j = 0; j < k; ++j) {
      double p = e[i - 1][j];
      if (i >= 2) {
        // Slot of the same label one step earlier.
        const auto& prev = labels[i - 2];
        const auto it = std::find(prev.begin(), prev.end(), labels[i - 1][j]);
        if (it != prev.end()) {
          const double slope = (e[i - 1][j] - e[i - 2][static_cast<std::size_t>(it - prev.begin())]) /
                               (ell[i - 1] - ell[i - 2]);
          p += slope * (ell[i] - ell[i - 1]);
        }
      }
      predicted[j] = {p, labels[i - 1][j]};
    }
    std::stable_sort(predicted.begin(), predicted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    labels[i].resize(k);
    for (std::size_t j = 0; j < k; ++j) labels[i][j] = predicted[j].second;
    if (k >= 2) {
      const double spacing = e[i][k - 1] - e[i][k - 2];
      if (std::abs(e[i][k - 1] - predicted[k - 1].first) > 0.5 * spacing) {
        labels[i][k - 1] = next_label++;
      }
    }
  }
  return labels;
}

double nearest_distance(const std::vector<double>& values, double x, double* local_spacing) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = std::abs(values[i] - x);
    if (d < best) {
      best = d;
      arg = i;
    }
  }
  if (local_spacing != nullptr) {
    double s = std::numeric_limits<double>::infinity();
    if (arg > 0) s = std::min(s, values[arg] - values[arg - 1]);
    if (arg + 1 < values.size()) s = std::min(s, values[arg + 1] - values[arg]);
    *local_spacing = s;
  }
  return best;
}

std::size_t count_interior_below(const PotentialModel& model, const Geometry& g, double hbar,
                                 double spacing, double energy) {
  const auto op = build_operator(model, g.interior(), hbar, nodes_for_spacing(g.interior(), spacing));
  return sturm_count(op, energy);
}

}  // namespace

BranchSet sweep_eigenvalues(const PotentialModel& model, const Geometry& geometry, double hbar,
                            Interval ell_range, std::size_t n_ell, std::size_t k,
                            const SolverSettings& settings, unsigned jobs) {
  if (n_ell < 2) throw ConfigError("sweep: n_ell must be at least 2");
  if (k < 1) throw ConfigError("sweep: k must be at least 1");
  if (!(ell_range.lo < ell_range.hi)) throw ConfigError("sweep: empty ell range");
  if (!(ell_range.lo > std::max(-geometry.omega_minus, geometry.omega_plus))) {
    throw ConfigError("sweep: ell_min must exceed max(|omega_-|, omega_+)");
  }
  BranchSet b;
  b.k = k;
  b.hbar = hbar;
  b.geometry = geometry.with_ell(ell_range.hi);
  b.ell_grid = linspace(ell_range.lo, ell_range.hi, n_ell);

  if (settings.spacing > 0.0) {
    b.spacing = settings.spacing;
  } else {
    // The smallest box carries the highest k-th eigenvalue.
    SolverSettings probe = settings;
    probe.richardson = false;
    const auto top = dirichlet_eigenvalues(model, box_of(ell_range.lo), hbar, k - 1, 1, probe);
    const double span = 1.05 * (top.values[0] - model.minimum_on(box_of(ell_range.hi)));
    b.spacing = resolution_spacing(hbar, span, settings.points_per_wavelength);
  }
  SolverSettings fixed = settings;
  fixed.spacing = b.spacing;

  b.energies.resize(n_ell);
  b.raw.resize(n_ell);
  parallel_for(n_ell, jobs, [&](std::size_t i) {
    const auto s = dirichlet_eigenvalues(model, box_of(b.ell_grid[i]), hbar, 0, k, fixed);
    b.energies[i] = s.values;
    b.raw[i] = s.raw;
  });
  b.labels = track_labels(b.ell_grid, b.energies);
  return b;
}

void classify_branches(BranchSet& b, const PotentialModel& model, const SolverSettings& settings,
                       unsigned jobs) {
  const std::size_t n = b.size();
  if (n < 2) throw DomainError("classify_branches: need at least two sweep points");
  SolverSettings fixed = settings;
  fixed.spacing = b.spacing;
  const Geometry& g = b.geometry;

  double e_top = -std::numeric_limits<double>::infinity();
  for (const auto& row : b.energies) e_top = std::max(e_top, row.back());
  const std::size_t k_interior = count_interior_below(model, g, b.hbar, b.spacing, e_top) + 1;
  b.interior = interior_spectrum(model, g, b.hbar, k_interior, fixed);

  std::array<Geometry, 2> balanced{g, g};
  if (model.has_strict_well()) {
    balanced[0] = balanced_geometry(model, Side::left, g.ell);
    balanced[1] = balanced_geometry(model, Side::right, g.ell);
  }
  for (std::size_t s = 0; s < 2; ++s) {
    b.balanced_interior[s] = interior_spectrum(model, balanced[s], b.hbar, k_interior, fixed);
    b.balanced_exterior[s].assign(n, {});
  }

  b.exterior_left.assign(n, {});
  b.exterior_right.assign(n, {});
  const auto exterior_below = [&](const Geometry& gi, Side side, double top) {
    const Interval region = gi.exterior(side);
    const auto op = build_operator(model, region, b.hbar, nodes_for_spacing(region, b.spacing));
    const std::size_t count = std::min(sturm_count(op, top) + 2, op.n);
    return dirichlet_eigenvalues(model, region, b.hbar, 0, count, fixed).values;
  };
  parallel_for(n, jobs, [&](std::size_t i) {
    const double ell = b.ell_grid[i];
    const double top = b.energies[i].back();
    b.exterior_left[i] = exterior_below(g.with_ell(ell), Side::left, top);
    b.exterior_right[i] = exterior_below(g.with_ell(ell), Side::right, top);
    b.balanced_exterior[0][i] = exterior_below(balanced[0].with_ell(ell), Side::left, top);
    b.balanced_exterior[1][i] = exterior_below(balanced[1].with_ell(ell), Side::right, top);
  });

  const double d_star = model.has_strict_well() ? agmon_summary(model, g).d_star : 0.0;
  b.tags.assign(n, std::vector<BranchTag>(b.k, BranchTag::mixed));
  for (std::size_t i = 0; i < n; ++i) {
    const double ell = b.ell_grid[i];
    for (std::size_t j = 0; j < b.k; ++j) {
      const double e = b.energies[i][j];
      const std::size_t i0 = i == 0 ? 0 : i - 1;
      const std::size_t i1 = i + 1 == n ? i : i + 1;
      const double slope = (b.energies[i1][j] - b.energies[i0][j]) / (b.ell_grid[i1] - b.ell_grid[i0]);
      double typical = std::numeric_limits<double>::infinity();
      for (Side side : {Side::left, Side::right}) {
        const double reach = ell - std::abs(g.omega(side));
        typical = std::min(typical, 2.0 * std::max(e - model.v_side(side), 0.0) / reach);
      }
      const double tol = settings.rel_tol * std::max(1.0, std::abs(e));
      const double allowance = 10.0 * tol + std::exp(-d_star / b.hbar);
      if (std::abs(slope) < 0.1 * typical &&
          nearest_distance(b.interior, e, nullptr) <= allowance) {
        b.tags[i][j] = BranchTag::interior_like;
        continue;
      }
      double spacing_left = 0.0;
      double spacing_right = 0.0;
      const double dl = nearest_distance(b.exterior_left[i], e, &spacing_left);
      const double dr = nearest_distance(b.exterior_right[i], e, &spacing_right);
      const bool near_left = dl <= 0.25 * spacing_left;
      const bool near_right = dr <= 0.25 * spacing_right;
      if (near_left && (!near_right || dl <= dr)) {
        b.tags[i][j] = BranchTag::exterior_left;
      } else if (near_right) {
        b.tags[i][j] = BranchTag::exterior_right;
      }
    }
  }

  std::map<int, std::array<std::size_t, 4>> votes;
  int max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < b.k; ++j) {
      const int label = b.labels[i][j];
      max_label = std::max(max_label, label);
      votes[label][static_cast<std::size_t>(b.tags[i][j])]++;
    }
  }
  b.classification.assign(static_cast<std::size_t>(max_label + 1), BranchTag::mixed);
  for (const auto& [label, v] : votes) {
    std::size_t best = 3;
    std::size_t best_votes = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      if (v[t] > best_votes) {
        best_votes = v[t];
        best = t;
      }
    }
    b.classification[static_cast<std::size_t>(label)] = static_cast<BranchTag>(best);
  }
}

std::vector<CrossingCandidate> detect_avoided_crossings(const BranchSet& b) {
  if (!b.classified()) throw DomainError("detect_avoided_crossings: classify the branches first");
  std::vector<CrossingCandidate> out;
  const std::size_t n = b.size();
  if (b.k < 2 || n < 3) return out;
  const std::size_t window = std::max<std::size_t>(3, n / 40);
  for (std::size_t j = 0; j + 1 < b.k; ++j) {
    const auto gap = [&](std::size_t i) { return b.raw[i][j + 1] - b.raw[i][j]; };
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double g = gap(i);
      if (!(g <= gap(i - 1) && g < gap(i + 1))) continue;
      const double lo = b.energies[i][j] - g;
      const double hi = b.energies[i][j + 1] + g;
      std::size_t interior_index = b.interior.size();
      for (std::size_t m = 0; m < b.interior.size(); ++m) {
        if (b.interior[m] >= lo && b.interior[m] <= hi) {
          interior_index = m;
          break;
        }
      }
      if (interior_index == b.interior.size()) continue;
      bool flat_nearby = false;
      const std::size_t from = i > window ? i - window : 0;
      const std::size_t to = std::min(n - 1, i + window);
      for (std::size_t q = from; q <= to && !flat_nearby; ++q) {
        flat_nearby = b.tags[q][j] == BranchTag::interior_like ||
                      b.tags[q][j + 1] == BranchTag::interior_like;
      }
      if (!flat_nearby) continue;
      // The participating family is the one whose balanced-split spectrum
      // passes the matching interior level across the bracket; ties fall
      // back to proximity at the grid minimum.
      const auto below = [&](const std::vector<double>& v, double ed) {
        return std::count_if(v.begin(), v.end(), [&](double e) { return e < ed; });
      };
      const auto moves = [&](std::size_t s) {
        const double ed = b.balanced_interior[s][interior_index];
        return below(b.balanced_exterior[s][i - 1], ed) != below(b.balanced_exterior[s][i + 1], ed);
      };
      const bool moves_left = moves(0);
      const bool moves_right = moves(1);
      double dl = nearest_distance(b.balanced_exterior[0][i], b.balanced_interior[0][interior_index],
                                   nullptr);
      double dr = nearest_distance(b.balanced_exterior[1][i], b.balanced_interior[1][interior_index],
                                   nullptr);
      if (moves_left != moves_right) {
        dl = moves_left ? 0.0 : 1.0;
        dr = moves_right ? 0.0 : 1.0;
      }
      CrossingCandidate c;
      c.slot = j;
      c.point = i;
      c.bracket = {b.ell_grid[i - 1], b.ell_grid[i + 1]};
      c.grid_gap = g;
      c.side = dl < dr ? Side::left : Side::right;
      c.interior_index = interior_index;
      out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(), [](const CrossingCandidate& a, const CrossingCandidate& c) {
    return a.point < c.point || (a.point == c.point && a.slot < c.slot);
  });
  return out;
}

GapMinimum minimize_gap(const std::function<double(double)>& gap, Interval bracket,
                        const RefineOptions& options) {
  if (!(bracket.lo < bracket.hi)) throw RefinementError("refine: empty bracket");
  const double g_lo = gap(bracket.lo);
  const double g_hi = gap(bracket.hi);
  const double g_mid = gap(bracket.midpoint());
  if (!(g_mid < g_lo && g_mid < g_hi)) {
    throw RefinementError("refine: gap is not unimodal on [" + std::to_string(bracket.lo) + ", " +
                          std::to_string(bracket.hi) +
                          "] (several branches pile up); use a denser sweep");
  }
  const double xtol = options.rel_ell_tol * std::max(std::abs(bracket.lo), std::abs(bracket.hi));
  const auto r = golden_section_minimize(gap, bracket.lo, bracket.hi, xtol,
                                         options.max_evaluations - 3);
  if (r.x - bracket.lo <= 2.0 * xtol || bracket.hi - r.x <= 2.0 * xtol) {
    throw RefinementError("refine: gap minimum sits on the bracket end; use a denser sweep");
  }
  GapMinimum m;
  m.ell = r.x;
  m.gap = r.fx;
  m.evaluations = r.evaluations + 3;
  if (g_mid < m.gap) {
    m.ell = bracket.midpoint();
    m.gap = g_mid;
  }
  return m;
}

CrossingReport refine_gap(const PotentialModel& model, const Geometry& geometry, double hbar,
                          const CrossingCandidate& candidate, double spacing,
                          const std::vector<double>& interior, const SolverSettings& settings,
                          const RefineOptions& options) {
  const std::size_t n = nodes_for_spacing(box_of(candidate.bracket.midpoint()), spacing);
  const std::size_t j = candidate.slot;
  const auto pair = [&](double ell) {
    return eigenvalue_range(build_operator(model, box_of(ell), hbar, n), j, 2, 0.0);
  };
  const auto gap = [&](double ell) {
    const auto e = pair(ell);
    return e[1] - e[0];
  };
  const GapMinimum m = minimize_gap(gap, candidate.bracket, options);

  CrossingReport r;
  r.ell_star = m.ell;
  r.gap = m.gap;
  r.evaluations = m.evaluations;
  r.bracket = candidate.bracket;
  r.side = candidate.side;

  const auto op = build_operator(model, box_of(m.ell), hbar, n);
  const std::size_t first = j > 0 ? j - 1 : 0;
  const std::size_t count = std::min(j + 3, op.n) - first;
  const auto around = eigenvalue_range(op, first, count, 0.0);
  const double lower = around[j - first];
  const double upper = around[j - first + 1];
  r.center_energy = 0.5 * (lower + upper);
  if ((j > 0 && lower - around[0] <= r.gap) ||
      (j - first + 2 < around.size() && around[j - first + 2] - upper <= r.gap)) {
    throw RefinementError("refine: three branches within one gap at ell=" +
                          std::to_string(m.ell) + "; use a denser sweep");
  }
  const double far = std::abs(candidate.bracket.lo - m.ell) > std::abs(candidate.bracket.hi - m.ell)
                         ? candidate.bracket.lo
                         : candidate.bracket.hi;
  const double g_far = gap(far);
  r.slope_difference = std::sqrt(std::max(g_far * g_far - r.gap * r.gap, 0.0)) / std::abs(far - m.ell);
  r.width = r.slope_difference > 0.0 ? 2.0 * r.gap / r.slope_difference
                                     : std::numeric_limits<double>::infinity();

  std::size_t idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < interior.size(); ++q) {
    if (std::abs(interior[q] - r.center_energy) < best) {
      best = std::abs(interior[q] - r.center_energy);
      idx = q;
    }
  }
  r.interior_index = interior.empty() ? candidate.interior_index : idx;
  r.interior_energy = interior.empty() ? r.center_energy : interior[idx];

  const Geometry at = geometry.with_ell(m.ell);
  const auto other = exterior_neighbours(model, at, hbar, opposite(r.side), r.interior_energy,
                                         settings);
  r.delta_isolation = std::numeric_limits<double>::infinity();
  for (double e : other) r.delta_isolation = std::min(r.delta_isolation, std::abs(e - r.interior_energy));
  const auto metrics = agmon_summary(model, at);
  r.agmon_prediction = r.side == Side::left ? metrics.d_minus : metrics.d_plus;
  r.isolated = r.delta_isolation >= options.delta_c * std::pow(hbar, options.delta_n);
  return r;
}

std::vector<FlatWindow> flat_windows(const BranchSet& b, double interior_energy,
                                     const std::vector<CrossingReport>& crossings, double widths,
                                     double noise) {
  std::vector<double> centers;
  std::vector<double> halo;
  for (const auto& c : crossings) {
    centers.push_back(c.ell_star);
    halo.push_back(widths * (std::isfinite(c.width) ? c.width : 0.0));
  }
  const std::size_t n = b.size();
  // Segment id of each grid point: number of crossings to its left; -1 when
  // inside a crossing halo.
  std::vector<long> segment(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ell = b.ell_grid[i];
    long s = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (std::abs(ell - centers[c]) <= halo[c]) {
        s = -1;
        break;
      }
      if (centers[c] < ell) ++s;
    }
    segment[i] = s;
  }
  std::vector<FlatWindow> out;
  std::size_t i = 0;
  while (i < n) {
    if (segment[i] < 0) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end + 1 < n && segment[end + 1] == segment[i]) ++end;
    // Trim one point at each end that borders a crossing.
    std::size_t first = i;
    std::size_t last = end;
    if (i > 0) ++first;
    if (end + 1 < n && last > first) --last;
    if (last >= first + 2) {
      FlatWindow w;
      w.first = first;
      w.last = last;
      for (std::size_t q = first; q <= last; ++q) {
        const auto& row = b.energies[q];
        double best = row[0];
        for (double e : row) {
          if (std::abs(e - interior_energy) < std::abs(best - interior_energy)) best = e;
        }
        w.values.push_back(best);
      }
      w.differences_decrease = true;
      for (std::size_t q = 1; q < w.values.size(); ++q) {
        w.total_variation += std::abs(w.values[q] - w.values[q - 1]);
        if (q >= 2) {
          const double prev = std::abs(w.values[q - 1] - w.values[q - 2]);
          const double cur = std::abs(w.values[q] - w.values[q - 1]);
          if (cur > prev + noise) w.differences_decrease = false;
        }
      }
      out.push_back(std::move(w));
    }
    i = end + 1;
  }
  return out;
}

}  // namespace resbox
