#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "resbox/agmon.hpp"
#include "resbox/eigensolve.hpp"

using namespace resbox;

namespace {

constexpr double kPi = std::numbers::pi;

double weighted_dot(const std::vector<double>& a, const std::vector<double>& b, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * h;
}

std::size_t dense_count_below(const std::vector<double>& values, double lambda) {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                [&](double v) { return v < lambda; }));
}

}  // namespace

TEST_CASE("free operator arithmetic on three nodes") {
  const auto op = build_operator(PotentialModel::infinite_well_zero(), {-1.0, 1.0}, 1.0, 3);
  CHECK(op.h == 0.5);
  CHECK(op.diag == std::vector<double>{8.0, 8.0, 8.0});
  CHECK(op.offdiag == std::vector<double>{-4.0, -4.0});
  CHECK(op.node(0) == -0.5);
  CHECK(op.node(2) == 0.5);
}

TEST_CASE("constant potential shifts the diagonal uniformly") {
  const auto op = build_operator(PotentialModel::constant(2.5), {0.0, 3.0}, 0.3, 50);
  const double expected = 2.0 * 0.09 / (op.h * op.h) + 2.5;
  for (double d : op.diag) CHECK(d == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("canonical diagonal matches pointwise evaluation") {
  const auto m = PotentialModel::canonical();
  const auto op = build_operator(m, {-6.0, 6.0}, 0.1, 777);
  const double kinetic = 2.0 * 0.01 / (op.h * op.h);
  for (std::size_t i = 0; i < op.n; ++i) {
    REQUIRE(op.diag[i] == doctest::Approx(kinetic + eval_potential(m, op.node(i))).epsilon(1e-14));
  }
  for (double e : op.offdiag) CHECK(e < 0.0);
}

TEST_CASE("too few nodes for the requested energy names the required count") {
  const auto m = PotentialModel::canonical();
  CHECK_THROWS_AS(build_operator(m, {-6.0, 6.0}, 0.1, 50, 1.0), ConfigError);
  try {
    (void)build_operator(m, {-6.0, 6.0}, 0.1, 50, 1.0);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid too coarse") != std::string::npos);
  }
}

TEST_CASE("sturm count on a nearly diagonal matrix") {
  const auto op = TridiagonalOperator::from_arrays({1.0, 2.0, 3.0}, {-1e-12, -1e-12});
  CHECK(sturm_count(op, 2.5) == 2);
  CHECK(sturm_count(op, 0.5) == 0);
  CHECK(sturm_count(op, 3.5) == 3);
}

TEST_CASE("sturm count below the free ground state is zero") {
  const auto op = build_operator(PotentialModel::infinite_well_zero(), {-1.0, 1.0}, 1.0, 500);
  CHECK(sturm_count(op, 0.99 * kPi * kPi / 4.0) == 0);
}

TEST_CASE("sturm counts match the dense oracle on random matrices") {
  std::mt19937_64 rng(40);
  const auto t = oracle::random_tridiagonal(rng, 40);
  const auto op = TridiagonalOperator::from_arrays(t.diag, t.offdiag);
  const auto dense = oracle::tridiagonal_eigenvalues(t.diag, t.offdiag);
  std::uniform_real_distribution<double> lambdas(dense.front() - 1.0, dense.back() + 1.0);
  for (int i = 0; i < 100; ++i) {
    const double l = lambdas(rng);
    CHECK(sturm_count(op, l) == dense_count_below(dense, l));
  }
}

TEST_CASE("dense oracle agrees with characteristic polynomial roots") {
  std::mt19937_64 rng(8);
  for (std::size_t n = 2; n <= 8; ++n) {
    const auto t = oracle::random_tridiagonal(rng, n);
    const auto jacobi = oracle::tridiagonal_eigenvalues(t.diag, t.offdiag);
    const auto roots = oracle::characteristic_roots(t.diag, t.offdiag);
    REQUIRE(roots.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(jacobi[i] - roots[i]) < 1e-10);
  }
}

TEST_CASE("infinite well levels after extrapolation") {
  const auto s = dirichlet_eigenvalues(PotentialModel::infinite_well_zero(), {-1.0, 1.0}, 1.0, 0, 3,
                                       SolverSettings{}, 4000);
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = std::pow((k + 1) * kPi / 2.0, 2);
    CHECK(std::abs(s.values[k] - exact) <= 1e-6 * exact);
  }
}

TEST_CASE("constant shift moves the discrete spectrum by the constant") {
  const auto free_op = build_operator(PotentialModel::infinite_well_zero(), {0.0, 2.0}, 0.7, 300);
  const auto shifted = build_operator(PotentialModel::constant(1.75), {0.0, 2.0}, 0.7, 300);
  const auto a = eigenvalues_below(free_op, 8);
  const auto b = eigenvalues_below(shifted, 8);
  for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(b[k] - a[k] - 1.75) < 1e-11 * (1.0 + b[k]));
}

TEST_CASE("sixty-node random operator against the dense oracle") {
  std::mt19937_64 rng(60);
  const auto t = oracle::random_tridiagonal(rng, 60);
  const auto op = TridiagonalOperator::from_arrays(t.diag, t.offdiag);
  const auto got = eigenvalues_below(op, 60);
  const auto dense = oracle::tridiagonal_eigenvalues(t.diag, t.offdiag);
  for (std::size_t i = 0; i < 60; ++i) CHECK(std::abs(got[i] - dense[i]) < 1e-10);
}

TEST_CASE("asking for more eigenvalues than nodes is a domain error") {
  const auto op = TridiagonalOperator::from_arrays({1.0, 2.0, 3.0}, {-1.0, -1.0});
  CHECK_THROWS_AS(eigenvalues_below(op, 4), DomainError);
}

TEST_CASE("free ground state vector is a sampled sine") {
  const auto op = build_operator(PotentialModel::infinite_well_zero(), {-1.0, 1.0}, 1.0, 999);
  const auto pairs = eigenpairs_below(op, 1);
  const auto& u = pairs[0].vector;
  std::vector<double> s(op.n);
  for (std::size_t i = 0; i < op.n; ++i) s[i] = std::sin(kPi * (op.node(i) + 1.0) / 2.0);
  const double norm = std::sqrt(weighted_dot(s, s, op.h));
  double worst = 0.0;
  for (std::size_t i = 0; i < op.n; ++i) worst = std::max(worst, std::abs(u[i] - s[i] / norm));
  CHECK(worst <= 1e-6);
  CHECK(u[0] > 0.0);
}

TEST_CASE("eigenpairs have small residuals and the right node count") {
  const auto m = PotentialModel::canonical();
  const auto op = build_operator(m, {-6.0, 6.0}, 0.1, 3000);
  const auto pairs = eigenpairs_below(op, 12);
  for (const auto& p : pairs) {
    CHECK(residual_norm(op, p) <= 1e-8 * op.diag_norm());
    // Tunnelling-separated states carry lobes far below 1e-10 of their peak.
    CHECK(sign_changes(p.vector, 0.0) == p.index);
    CHECK(weighted_dot(p.vector, p.vector, op.h) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("near-degenerate double-well pair stays orthogonal") {
  // A tall central barrier splits the box into two identical wells.
  const auto m = PotentialModel::single_gaussian(20.0, 0.0, 0.4);
  const Interval box{-3.0, 3.0};

  const auto coarse = build_operator(m, box, 0.3, 200);
  const auto dense = oracle::tridiagonal_eigenvalues(coarse.diag, coarse.offdiag);
  const auto sturm = eigenvalues_below(coarse, 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(sturm[i] - dense[i]) < 1e-10);

  const auto op = build_operator(m, box, 0.3, 2000);
  const auto pairs = eigenpairs_below(op, 2);
  CHECK(pairs[1].value - pairs[0].value < 1e-6);
  CHECK(std::abs(weighted_dot(pairs[0].vector, pairs[1].vector, op.h)) <= 1e-8);
  CHECK(sign_changes(pairs[0].vector) == 0);
  CHECK(sign_changes(pairs[1].vector) == 1);
}

TEST_CASE("boundary slope of the free ground state") {
  const auto op = build_operator(PotentialModel::infinite_well_zero(), {-1.0, 1.0}, 1.0, 2000);
  const auto pairs = eigenpairs_below(op, 1);
  CHECK(boundary_derivative(pairs[0], op, Side::left) == doctest::Approx(kPi / 2.0).epsilon(1e-3));
  CHECK(boundary_derivative(pairs[0], op, Side::right) == doctest::Approx(kPi / 2.0).epsilon(1e-3));
}

TEST_CASE("boundary slope of a fully decayed state is zero") {
  const auto op = build_operator(PotentialModel::single_gaussian(-5.0, 0.0, 0.5), {-15.0, 15.0}, 0.05,
                                 6000);
  const auto pairs = eigenpairs_below(op, 1);
  CHECK(boundary_derivative(pairs[0], op, Side::left) <= 1e-14);
  CHECK(boundary_derivative(pairs[0], op, Side::right) <= 1e-14);
}

namespace {

void check_against_spline(const TridiagonalOperator& op, const EigenPair& p) {
  std::vector<double> x{op.interval.lo}, y{0.0};
  for (std::size_t i = 0; i < op.n; ++i) {
    x.push_back(op.node(i));
    y.push_back(p.vector[i]);
  }
  x.push_back(op.interval.hi);
  y.push_back(0.0);
  const double left = std::abs(oracle::natural_spline_start_slope(x, y));
  std::vector<double> xr(x.size()), yr(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xr[i] = -x[x.size() - 1 - i];
    yr[i] = y[y.size() - 1 - i];
  }
  const double right = std::abs(oracle::natural_spline_start_slope(xr, yr));
  CHECK(boundary_derivative(p, op, Side::left) == doctest::Approx(left).epsilon(1e-4));
  CHECK(boundary_derivative(p, op, Side::right) == doctest::Approx(right).epsilon(1e-4));
}

}  // namespace

TEST_CASE("canonical interior boundary slopes against the spline oracle") {
  const auto m = PotentialModel::canonical();
  const auto g = agmon_geometry(m, kOuterFraction, kOuterFraction, 6.0);
  const double h = resolution_spacing(0.1, 1.0, 100.0);

  SUBCASE("ground state on the default grid") {
    const auto op = build_operator(m, g.interior(), 0.1, nodes_for_spacing(g.interior(), h));
    check_against_spline(op, eigenpairs_below(op, 1)[0]);
  }
  SUBCASE("three lowest states on a finer grid") {
    // The one-sided formula errs by about h^2 |V - E| / (3 hbar^2) relative.
    const auto op = build_operator(m, g.interior(), 0.1, nodes_for_spacing(g.interior(), h / 3.0));
    for (const auto& p : eigenpairs_below(op, 3)) check_against_spline(op, p);
  }
}

// Properties

TEST_CASE("property: bisection matches the dense oracle on 50 random operators") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> sizes(1, 60);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = sizes(rng);
    const auto t = oracle::random_tridiagonal(rng, n);
    const auto got = eigenvalues_below(TridiagonalOperator::from_arrays(t.diag, t.offdiag), n);
    const auto dense = oracle::tridiagonal_eigenvalues(t.diag, t.offdiag);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(got[i] - dense[i]) < 1e-10);
  }
}

TEST_CASE("property: eigenvalues strictly increase with index") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = oracle::random_tridiagonal(rng, 45);
    const auto v = eigenvalues_below(TridiagonalOperator::from_arrays(t.diag, t.offdiag), 45);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);
  }
}

TEST_CASE("property: larger boxes never raise an eigenvalue") {
  // Nested grids (ell on multiples of h) make the smaller operator a
  // principal submatrix of the larger one.
  const auto m = PotentialModel::canonical();
  const double h = 0.005;
  std::vector<double> previous;
  for (int step = 0; step <= 10; ++step) {
    const double ell = 4.0 + 0.1 * step;
    const auto n = static_cast<std::size_t>(std::lround(2.0 * ell / h)) - 1;
    const auto v = eigenvalues_below(build_operator(m, {-ell, ell}, 0.1, n), 12, 0.0);
    if (!previous.empty()) {
      for (std::size_t k = 0; k < v.size(); ++k) CHECK(v[k] <= previous[k]);
    }
    previous = v;
  }
}

TEST_CASE("property: extrapolated levels never rise across a sweep") {
  const auto m = PotentialModel::canonical();
  SolverSettings s;
  s.spacing = 0.006;
  std::vector<double> previous;
  for (int step = 0; step <= 10; ++step) {
    const double ell = 4.0 + 0.05 * step;
    const auto v = dirichlet_eigenvalues(m, {-ell, ell}, 0.1, 0, 10, s).values;
    if (!previous.empty()) {
      for (std::size_t k = 0; k < v.size(); ++k) CHECK(v[k] <= previous[k] + 1e-10);
    }
    previous = v;
  }
}

TEST_CASE("property: second-order convergence on the free well") {
  const auto m = PotentialModel::infinite_well_zero();
  for (std::size_t n : {100u, 400u}) {
    const auto coarse = eigenvalues_below(build_operator(m, {-1.0, 1.0}, 1.0, n), 4);
    const auto fine = eigenvalues_below(build_operator(m, {-1.0, 1.0}, 1.0, 2 * n), 4);
    for (std::size_t k = 0; k < 4; ++k) {
      const double exact = std::pow((k + 1) * kPi / 2.0, 2);
      const double ratio = (exact - coarse[k]) / (exact - fine[k]);
      CHECK(ratio >= 3.6);
      CHECK(ratio <= 4.4);
    }
  }
}
