#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "resbox/agmon.hpp"
#include "resbox/decoupled.hpp"
#include "resbox/semiclassics.hpp"

using namespace resbox;

namespace {

constexpr double kPi = std::numbers::pi;

Geometry outer_geometry(const PotentialModel& m, double ell = 6.0) {
  return agmon_geometry(m, kOuterFraction, kOuterFraction, ell);
}

PotentialModel symmetric_model() { return PotentialModel::two_gaussian_barriers(0.8, 0.8, -1.6, 1.6, 0.8, 0.8); }

PotentialModel mirrored_canonical() {
  return PotentialModel::two_gaussian_barriers(0.5, 0.8, -1.6, 1.6, 0.8, 0.8);
}

const ResonanceReport& canonical_report() {
  static const ResonanceReport report = [] {
    const auto m = PotentialModel::canonical();
    return resonance_report(m, outer_geometry(m), 0.1, 4);
  }();
  return report;
}

}  // namespace

TEST_CASE("free interior surrogate in closed form") {
  // phi_1 = sqrt(2) sin(pi (x + 1/2)) on (-1/2, 1/2): |phi'| = sqrt(2) pi at both ends.
  const auto m = PotentialModel::infinite_well_zero();
  const auto g = make_geometry(-0.5, 0.5, 2.2);
  SolverSettings fine;
  fine.spacing = 1e-3;
  const auto t = tunneling_surrogate(m, g, 1.0, 0, fine);
  CHECK(t.energy == doctest::Approx(kPi * kPi).epsilon(1e-9));
  CHECK(std::abs(t.phi_prime_minus) == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-5));
  CHECK(std::abs(t.phi_prime_plus) == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-5));

  // Exterior levels ((m + 1) pi / 1.7)^2 on both sides; the nearest is m = 1.
  const double delta = std::abs(std::pow(2.0 * kPi / 1.7, 2) - kPi * kPi);
  CHECK(t.delta == doctest::Approx(delta).epsilon(1e-7));
  CHECK(t.r == doctest::Approx(0.5 * t.delta).epsilon(1e-12));
  CHECK(t.t_bound == doctest::Approx(kPi * kPi / (t.r * t.r)).epsilon(1e-5));
}

TEST_CASE("degenerate free pieces give a domain error") {
  // Interior length 1 and exteriors length 2 on one shared raw grid: the
  // discrete levels (pi hbar)^2 coincide to rounding.
  const auto m = PotentialModel::infinite_well_zero();
  SolverSettings raw;
  raw.richardson = false;
  raw.spacing = 0.01;
  CHECK_THROWS_AS(tunneling_surrogate(m, make_geometry(-0.5, 0.5, 2.5), 1.0, 0, raw), DomainError);
  CHECK_THROWS_AS(tunneling_surrogate(m, make_geometry(-0.5, 0.5, 2.2), -0.5, 0), DomainError);
}

TEST_CASE("symmetric model has equal boundary slopes") {
  const auto m = symmetric_model();
  const auto t = tunneling_surrogate(m, outer_geometry(m), 0.1, 0);
  CHECK(std::abs(t.phi_prime_minus) == doctest::Approx(std::abs(t.phi_prime_plus)).epsilon(1e-8));
  CHECK(t.t_bound > 0.0);
}

TEST_CASE("symmetric model: coincident crossings are reported as a pile-up") {
  // Exact parity puts the left and right degeneracies at the same ell.
  const auto m = symmetric_model();
  CHECK_THROWS_AS(locate_crossing(m, outer_geometry(m), 0.1, 0, Side::left), RefinementError);
}

TEST_CASE("mirroring the potential swaps the two gaps") {
  const auto a = PotentialModel::canonical();
  const auto b = mirrored_canonical();
  const auto ga = outer_geometry(a);
  const auto gb = outer_geometry(b);
  const auto a_left = locate_crossing(a, ga, 0.1, 0, Side::left);
  const auto a_right = locate_crossing(a, ga, 0.1, 0, Side::right);
  const auto b_left = locate_crossing(b, gb, 0.1, 0, Side::left);
  const auto b_right = locate_crossing(b, gb, 0.1, 0, Side::right);
  CHECK(b_right.report.gap == doctest::Approx(a_left.report.gap).epsilon(1e-4));
  CHECK(b_left.report.gap == doctest::Approx(a_right.report.gap).epsilon(1e-4));
  CHECK(a_right.report.gap > a_left.report.gap);
}

TEST_CASE("two-point check of the tunneling surrogate rate") {
  const auto m = PotentialModel::canonical();
  const auto g = outer_geometry(m);
  const double d_star = agmon_summary(m, g).d_star;
  const auto t1 = tunneling_surrogate(m, g.with_ell(most_isolated_ell(m, g, 0.1, 0)), 0.1, 0);
  const auto t2 = tunneling_surrogate(m, g.with_ell(most_isolated_ell(m, g, 0.08, 0)), 0.08, 0);
  const double predicted = std::exp(-2.0 * d_star * (1.0 / 0.08 - 1.0 / 0.1));
  const double measured = t2.t_bound / t1.t_bound;
  CHECK(measured < 10.0 * predicted);
  CHECK(measured > 0.1 * predicted);
}

TEST_CASE("gap scaling slopes follow the Agmon distances of each side") {
  const auto m = PotentialModel::canonical();
  const auto g = outer_geometry(m);
  const auto a = agmon_summary(m, g);
  const std::vector<double> hbars{0.14, 0.12, 0.10, 0.08};
  const auto left = run_scaling_study(m, g, Observable::gap_left, hbars, 0);
  const auto right = run_scaling_study(m, g, Observable::gap_right, hbars, 0);
  CHECK(left.fitted_slope < 0.0);
  CHECK(right.fitted_slope < 0.0);
  CHECK(left.hbar_values.front() > left.hbar_values.back());
  const double ratio = left.fitted_slope / right.fitted_slope;
  CHECK(ratio == doctest::Approx(a.d_minus / a.d_plus).epsilon(0.2));
}

TEST_CASE("observable names") {
  for (auto o : {Observable::gap_left, Observable::gap_right, Observable::t_bound}) {
    CHECK(parse_observable(to_string(o)) == o);
  }
  CHECK_FALSE(parse_observable("width").has_value());
}

TEST_CASE("scaling study argument checks") {
  const auto m = PotentialModel::canonical();
  const auto g = outer_geometry(m);
  CHECK_THROWS_AS(run_scaling_study(m, g, Observable::t_bound, {0.1, 0.09, 0.08}, 0), DomainError);
  CHECK_THROWS_AS(run_scaling_study(m, g, Observable::t_bound, {0.1, 0.1, 0.09, 0.08}, 0), DomainError);
  CHECK_THROWS_AS(run_scaling_study(m, g, Observable::t_bound, {0.1, -0.1, 0.09, 0.08}, 0), DomainError);
}

TEST_CASE("canonical report lists the well-localised levels below the lower barrier") {
  const auto m = PotentialModel::canonical();
  const auto& r = canonical_report();
  CHECK(r.hbar == 0.1);
  CHECK(r.energy_ceiling == doctest::Approx(std::min(m.barrier_top(Side::left), m.barrier_top(Side::right))));
  REQUIRE(r.rows.size() == 3);
  const auto interior = interior_spectrum(m, outer_geometry(m), 0.1, 4);
  for (std::size_t q = 0; q < r.rows.size(); ++q) {
    const auto& row = r.rows[q];
    CHECK(row.level == q);
    CHECK(row.interior_energy == doctest::Approx(interior[q]).epsilon(1e-9));
    CHECK(row.interior_energy < r.energy_ceiling);
    CHECK(row.well_mass >= 0.5);
    CHECK(row.width_order == doctest::Approx(std::pow(std::max(row.gap_left, row.gap_right), 2)));
  }
}

TEST_CASE("larger gap sits on the side with the smaller Agmon distance") {
  for (const auto& row : canonical_report().rows) {
    CHECK(row.larger_gap_side == (row.d_plus < row.d_minus ? Side::right : Side::left));
    CHECK((row.larger_gap_side == Side::right) == (row.gap_right > row.gap_left));
  }
}

TEST_CASE("free model gives an empty report") {
  const auto m = PotentialModel::infinite_well_zero();
  CHECK(resonance_report(m, make_geometry(-0.5, 0.5, 3.0), 0.3, 3).rows.empty());
}

// Properties

TEST_CASE("property: flat-branch resonance energy matches the interior level") {
  const auto m = PotentialModel::canonical();
  const auto g = outer_geometry(m);
  const auto& rows = canonical_report().rows;
  REQUIRE(!rows.empty());
  // Ground level, with the distance taken at v0.
  const double d_star = std::min(rows[0].d_minus, rows[0].d_plus);
  CHECK(std::abs(rows[0].resonance_energy - rows[0].interior_energy) <= std::exp(-1.5 * d_star / 0.1) + 1e-9);
  // Every level, with the distance taken at its own energy.
  for (const auto& row : rows) {
    const double e = row.interior_energy;
    const double d = std::min(agmon_distance(m, e, g.omega_minus, m.x0()), agmon_distance(m, e, m.x0(), g.omega_plus));
    CHECK_MESSAGE(std::abs(row.resonance_energy - e) <= std::exp(-1.5 * d / 0.1) + 1e-9, "level " << row.level);
  }
}

TEST_CASE("property: surrogate is positive and falls with hbar") {
  const auto m = PotentialModel::canonical();
  const auto g = outer_geometry(m);
  double previous = 1e300;
  for (double hbar : {0.14, 0.12, 0.1, 0.08}) {
    const auto t = tunneling_surrogate(m, g.with_ell(most_isolated_ell(m, g, hbar, 0)), hbar, 0);
    CHECK(t.t_bound > 0.0);
    CHECK(std::isfinite(t.t_bound));
    CHECK(t.t_bound < previous);
    previous = t.t_bound;
  }
}

TEST_CASE("property: well mass of interior states lies in [0, 1]") {
  const auto m = PotentialModel::canonical();
  const auto g = outer_geometry(m);
  const auto op = build_operator(m, g.interior(), 0.1, 1500);
  for (const auto& p : eigenpairs_below(op, 6)) {
    const double w = well_mass(m, op, p);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0 + 1e-12);
  }
}
