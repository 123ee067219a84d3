#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "resbox/decoupled.hpp"
#include "resbox/sweep.hpp"

using namespace resbox;

namespace {

constexpr double kPi = std::numbers::pi;

struct CanonicalSweep {
  PotentialModel model = PotentialModel::canonical();
  Geometry geometry;
  BranchSet branches;
  std::vector<CrossingCandidate> candidates;
  std::vector<CrossingReport> reports;
};

// ell in [4.5, 5.5], 120 points, ten levels at hbar = 0.1. Built once.
const CanonicalSweep& canonical_sweep() {
  static const CanonicalSweep sweep = [] {
    CanonicalSweep s;
    s.geometry = agmon_geometry(s.model, kOuterFraction, kOuterFraction, 5.5);
    s.branches = sweep_eigenvalues(s.model, s.geometry, 0.1, {4.5, 5.5}, 120, 10);
    classify_branches(s.branches, s.model);
    s.candidates = detect_avoided_crossings(s.branches);
    for (const auto& c : s.candidates) {
      s.reports.push_back(refine_gap(s.model, s.geometry, 0.1, c, s.branches.spacing, s.branches.interior));
    }
    return s;
  }();
  return sweep;
}

std::vector<double> label_values(const BranchSet& b, int label) {
  std::vector<double> out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.k; ++j) {
      if (b.labels[i][j] == label) out.push_back(b.energies[i][j]);
    }
  }
  return out;
}

const CrossingReport* find_report(const std::vector<CrossingReport>& reports, Side side, std::size_t level) {
  for (const auto& r : reports) {
    if (r.side == side && r.interior_index == level) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("free box sweep follows the closed form") {
  const auto m = PotentialModel::infinite_well_zero();
  const double hbar = 0.5;
  const auto b = sweep_eigenvalues(m, make_geometry(-0.5, 0.5, 2.0), hbar, {2.0, 3.0}, 11, 4);
  REQUIRE(b.size() == 11);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double ell = b.ell_grid[i];
    for (std::size_t j = 0; j < 4; ++j) {
      const double exact = std::pow((j + 1) * kPi * hbar / (2.0 * ell), 2);
      CHECK(b.energies[i][j] == doctest::Approx(exact).epsilon(1e-6));
    }
  }
}

TEST_CASE("free box sweep has no interior-like branch and no candidates") {
  const auto m = PotentialModel::infinite_well_zero();
  auto b = sweep_eigenvalues(m, make_geometry(-0.5, 0.5, 2.0), 0.5, {2.0, 3.0}, 21, 4);
  classify_branches(b, m);
  for (auto tag : b.classification) CHECK(tag != BranchTag::interior_like);
  CHECK(detect_avoided_crossings(b).empty());
}

TEST_CASE("sweep rejects bad arguments") {
  const auto m = PotentialModel::canonical();
  const auto g = agmon_geometry(m, kOuterFraction, kOuterFraction, 6.0);
  CHECK_THROWS_AS(sweep_eigenvalues(m, g, 0.1, {5.0, 6.0}, 1, 4), ConfigError);
  CHECK_THROWS_AS(sweep_eigenvalues(m, g, 0.1, {5.0, 6.0}, 10, 0), ConfigError);
  CHECK_THROWS_AS(sweep_eigenvalues(m, g, 0.1, {6.0, 5.0}, 10, 4), ConfigError);
  CHECK_THROWS_AS(sweep_eigenvalues(m, g, 0.1, {1.0, 6.0}, 10, 4), ConfigError);
}

TEST_CASE("tag names") {
  CHECK(to_string(BranchTag::interior_like) == "interior_like");
  CHECK(to_string(BranchTag::exterior_left) == "exterior_left");
  CHECK(to_string(BranchTag::exterior_right) == "exterior_right");
  CHECK(to_string(BranchTag::mixed) == "mixed");
}

TEST_CASE("surrogate two-level gap has minimum 2g") {
  const double g = 3.7e-6;
  const double center = 4.81234;
  const auto gap = [&](double ell) {
    const double s = 0.02 * (ell - center);
    return std::sqrt(s * s + 4.0 * g * g);
  };
  const auto r = minimize_gap(gap, {center - 0.03, center + 0.02});
  CHECK(r.gap == doctest::Approx(2.0 * g).epsilon(1e-8));
  CHECK(std::abs(r.ell - center) < 1e-8);
  CHECK(r.evaluations > 0);
}

TEST_CASE("gap search rejects brackets without an interior minimum") {
  const auto rising = [](double ell) { return ell; };
  CHECK_THROWS_AS(minimize_gap(rising, {1.0, 2.0}), RefinementError);
  CHECK_THROWS_AS(minimize_gap(rising, {2.0, 2.0}), RefinementError);
}

TEST_CASE("canonical sweep has one flat branch per trapped level") {
  const auto& s = canonical_sweep();
  const auto& b = s.branches;
  const double v0 = s.model.v0();
  std::size_t flat = 0;
  for (std::size_t label = 0; label < b.classification.size(); ++label) {
    const auto values = label_values(b, static_cast<int>(label));
    if (values.empty()) continue;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (b.classification[label] == BranchTag::interior_like) {
      ++flat;
      CHECK(*hi - *lo < 1e-3 * v0);
    }
  }
  CHECK(flat >= 2);
  const auto ground = label_values(b, 2);
  REQUIRE(b.classification[2] == BranchTag::interior_like);
  for (double e : ground) CHECK(std::abs(e - b.interior[0]) < 1e-3 * v0);
}

TEST_CASE("canonical exterior branches move with the box") {
  const auto& s = canonical_sweep();
  const auto& b = s.branches;
  for (std::size_t j = 0; j < b.k; ++j) {
    const double first = b.energies.front()[j];
    const double last = b.energies.back()[j];
    const bool near_interior = std::any_of(b.interior.begin(), b.interior.end(),
                                           [&](double e) { return std::abs(e - last) < 1e-3; });
    if (!near_interior && first > s.model.v0()) CHECK(first - last > 0.1 * s.model.v0());
  }
}

TEST_CASE("canonical crossings: both sides, positive gaps inside their brackets") {
  const auto& s = canonical_sweep();
  REQUIRE(!s.reports.empty());
  for (std::size_t q = 0; q < s.reports.size(); ++q) {
    const auto& r = s.reports[q];
    CHECK(r.gap > 0.0);
    CHECK(r.ell_star > r.bracket.lo);
    CHECK(r.ell_star < r.bracket.hi);
    CHECK(r.isolated);
  }
  for (std::size_t level : {0u, 1u}) {
    const auto* left = find_report(s.reports, Side::left, level);
    const auto* right = find_report(s.reports, Side::right, level);
    REQUIRE(left != nullptr);
    REQUIRE(right != nullptr);
    CHECK(right->gap > left->gap);
  }
}

TEST_CASE("canonical crossings sit within a width of the decoupled degeneracy") {
  const auto& s = canonical_sweep();
  SolverSettings raw;
  raw.richardson = false;
  raw.spacing = s.branches.spacing;
  for (const auto& r : s.reports) {
    const auto d = find_degeneracy_ell(s.model, balanced_geometry(s.model, r.side, 5.5), 0.1,
                                       r.interior_index, r.side, {r.ell_star - 0.1, r.ell_star + 0.1}, raw);
    CHECK_MESSAGE(std::abs(r.ell_star - d.ell0) < r.width, "ell* " << r.ell_star << " ell0 " << d.ell0);
  }
}

TEST_CASE("flat windows between ground-level crossings stay flat") {
  const auto& s = canonical_sweep();
  std::vector<CrossingReport> ground;
  for (const auto& r : s.reports) {
    if (r.interior_index == 0) ground.push_back(r);
  }
  const auto windows = flat_windows(s.branches, s.branches.interior[0], ground, 5.0, 1e-11);
  CHECK(windows.size() == ground.size() + 1);
  for (const auto& w : windows) {
    CHECK(w.last > w.first);
    CHECK(w.values.size() == w.last - w.first + 1);
    CHECK(w.total_variation < std::pow(0.1, 8));
  }
}

// Properties

TEST_CASE("property: sorted slots and one label per slot") {
  const auto& b = canonical_sweep().branches;
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(std::is_sorted(b.energies[i].begin(), b.energies[i].end()));
    for (std::size_t j = 1; j < b.k; ++j) CHECK(b.energies[i][j] > b.energies[i][j - 1]);
    auto labels = b.labels[i];
    std::sort(labels.begin(), labels.end());
    CHECK(std::adjacent_find(labels.begin(), labels.end()) == labels.end());
  }
}

TEST_CASE("property: each slot falls as the box grows") {
  // H(ell) on a larger box is dominated in the min-max sense.
  const auto& b = canonical_sweep().branches;
  for (std::size_t i = 1; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.k; ++j) CHECK(b.energies[i][j] <= b.energies[i - 1][j] + 1e-12);
  }
}

TEST_CASE("property: every candidate straddles an interior level") {
  const auto& s = canonical_sweep();
  const auto& b = s.branches;
  for (const auto& c : s.candidates) {
    const double ed = b.interior[c.interior_index];
    const double lo = b.energies[c.point][c.slot];
    const double hi = b.energies[c.point][c.slot + 1];
    CHECK(lo <= ed + 1e-3 * s.model.v0());
    CHECK(hi >= ed - 1e-3 * s.model.v0());
    CHECK(c.bracket.lo < b.ell_grid[c.point]);
    CHECK(c.bracket.hi > b.ell_grid[c.point]);
  }
}
