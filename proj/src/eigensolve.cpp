#include "resbox/eigensolve.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "resbox/errors.hpp"

namespace resbox {

double TridiagonalOperator::diag_norm() const noexcept {
  double m = 0.0;
  for (double d : diag) m = std::max(m, std::abs(d));
  return m;
}

TridiagonalOperator TridiagonalOperator::from_arrays(std::vector<double> diag,
                                                     std::vector<double> offdiag) {
  if (diag.empty() || offdiag.size() + 1 != diag.size()) {
    throw DomainError("tridiagonal operator: offdiag must have exactly n - 1 entries");
  }
  TridiagonalOperator op;
  op.n = diag.size();
  op.interval = {0.0, static_cast<double>(op.n + 1)};
  op.h = 1.0;
  op.hbar = 1.0;
  op.diag = std::move(diag);
  op.offdiag = std::move(offdiag);
  op.offdiag_sq.resize(op.offdiag.size());
  for (std::size_t i = 0; i < op.offdiag.size(); ++i) op.offdiag_sq[i] = op.offdiag[i] * op.offdiag[i];
  return op;
}

double resolution_spacing(double hbar, double energy_span, double points_per_wavelength) {
  return 2.0 * std::numbers::pi * hbar /
         (points_per_wavelength * std::sqrt(std::max(energy_span, 1.0)));
}

std::size_t nodes_for_spacing(Interval interval, double spacing) {
  const double cells = std::ceil(interval.length() / spacing * (1.0 - 1e-12));
  return static_cast<std::size_t>(std::max(cells, 4.0)) - 1;
}

TridiagonalOperator build_operator(const PotentialModel& model, Interval interval, double hbar,
                                   std::size_t n, std::optional<double> e_max) {
  if (!std::isfinite(interval.lo) || !std::isfinite(interval.hi) || !(interval.lo < interval.hi)) {
    throw DomainError("build_operator: interval must be finite and nondegenerate");
  }
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError("build_operator: hbar must be > 0");
  if (n < 3) throw ConfigError("build_operator: need at least 3 interior points");
  const double h = interval.length() / static_cast<double>(n + 1);
  if (e_max) {
    const double span = *e_max - model.minimum_on(interval);
    const double bound = resolution_spacing(hbar, span, kMinPointsPerWavelength);
    if (h > bound) {
      const std::size_t required = nodes_for_spacing(interval, bound);
      throw ConfigError("grid too coarse: " + std::to_string(n) +
                        " interior points resolve fewer than 20 points per wavelength at E=" +
                        std::to_string(*e_max) + "; need n >= " + std::to_string(required));
    }
  }
  TridiagonalOperator op;
  op.interval = interval;
  op.n = n;
  op.h = h;
  op.hbar = hbar;
  const double kinetic = hbar * hbar / (h * h);
  op.diag.resize(n);
  for (std::size_t i = 0; i < n; ++i) op.diag[i] = 2.0 * kinetic + model.value(op.node(i));
  op.offdiag.assign(n - 1, -kinetic);
  op.offdiag_sq.assign(n - 1, kinetic * kinetic);
  return op;
}

std::size_t sturm_count(const TridiagonalOperator& op, double lambda) {
  double emax = 1.0;
  for (double e2 : op.offdiag_sq) emax = std::max(emax, e2);
  const double pivmin = DBL_MIN * emax;
  std::size_t count = 0;
  double q = op.diag[0] - lambda;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < op.n; ++i) {
    q = op.diag[i] - lambda - op.offdiag_sq[i - 1] / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

Interval spectrum_bounds(const TridiagonalOperator& op) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < op.n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(op.offdiag[i - 1]);
    if (i + 1 < op.n) radius += std::abs(op.offdiag[i]);
    lo = std::min(lo, op.diag[i] - radius);
    hi = std::max(hi, op.diag[i] + radius);
  }
  const double pad = 2.0 * DBL_EPSILON * std::max(std::abs(lo), std::abs(hi)) + DBL_MIN;
  return {lo - pad, hi + pad};
}

std::vector<double> eigenvalue_range(const TridiagonalOperator& op, std::size_t first,
                                     std::size_t count, double rel_tol) {
  if (first + count > op.n) {
    throw DomainError("eigenvalue_range: requested index " + std::to_string(first + count) +
                      " exceeds operator size " + std::to_string(op.n));
  }
  const Interval bounds = spectrum_bounds(op);
  std::vector<double> lo(count, bounds.lo);
  std::vector<double> hi(count, bounds.hi);
  const auto update = [&](double mid, std::size_t below) {
    for (std::size_t j = 0; j < count; ++j) {
      if (first + j < below) {
        hi[j] = std::min(hi[j], mid);
      } else {
        lo[j] = std::max(lo[j], mid);
      }
    }
  };
  for (std::size_t j = 0; j < count; ++j) {
    while (true) {
      const double mid = 0.5 * (lo[j] + hi[j]);
      if (mid <= lo[j] || mid >= hi[j]) break;
      const double tol = rel_tol * std::max(1.0, std::abs(mid));
      if (hi[j] - lo[j] <= tol) break;
      update(mid, sturm_count(op, mid));
    }
  }
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = 0.5 * (lo[j] + hi[j]);
  return out;
}

std::vector<double> eigenvalues_below(const TridiagonalOperator& op, std::size_t k, double rel_tol) {
  if (k > op.n) {
    throw DomainError("eigenvalues_below: k=" + std::to_string(k) + " exceeds n=" +
                      std::to_string(op.n));
  }
  return eigenvalue_range(op, 0, k, rel_tol);
}

namespace {

/// LU factorisation of T - lambda I with partial pivoting (dgttrf layout).
struct ShiftedLu {
  std::vector<double> dl, d, du, du2;
  std::vector<char> pivot;

  ShiftedLu(const TridiagonalOperator& op, double lambda) {
    const std::size_t n = op.n;
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = op.diag[i] - lambda;
    dl = op.offdiag;
    du = op.offdiag;
    du2.assign(n > 2 ? n - 2 : 0, 0.0);
    pivot.assign(n, 0);
    const double tiny = DBL_EPSILON * std::max(op.diag_norm(), 1.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double l = dl[i] / d[i];
        dl[i] = l;
        d[i + 1] -= l * du[i];
      } else {
        const double l = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = l;
        const double t = du[i];
        du[i] = d[i + 1];
        d[i + 1] = t - l * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -l * du[i + 1];
        }
        pivot[i] = 1;
      }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!pivot[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double t = b[i];
        b[i] = b[i + 1];
        b[i + 1] = t - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    if (n < 3) return;
    for (std::size_t i = n - 2; i-- > 0;) {
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
  }
};

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

void apply(const TridiagonalOperator& op, const std::vector<double>& u, std::vector<double>& out) {
  const std::size_t n = op.n;
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = op.diag[i] * u[i];
    if (i > 0) s += op.offdiag[i - 1] * u[i - 1];
    if (i + 1 < n) s += op.offdiag[i] * u[i + 1];
    out[i] = s;
  }
}

double rayleigh(const TridiagonalOperator& op, const std::vector<double>& unit) {
  std::vector<double> tu;
  apply(op, unit, tu);
  double s = 0.0;
  for (std::size_t i = 0; i < op.n; ++i) s += unit[i] * tu[i];
  return s;
}

double unit_residual(const TridiagonalOperator& op, const std::vector<double>& unit, double lambda) {
  std::vector<double> tu;
  apply(op, unit, tu);
  for (std::size_t i = 0; i < op.n; ++i) tu[i] -= lambda * unit[i];
  return norm2(tu);
}

}  // namespace

EigenPair eigenvector(const TridiagonalOperator& op, double lambda, std::uint64_t seed,
                      const std::vector<const EigenPair*>& against) {
  if (!std::isfinite(lambda)) throw DomainError("eigenvector: shift must be finite");
  const std::size_t n = op.n;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = uniform(rng);

  // Previously accepted vectors, rescaled to unit Euclidean norm.
  std::vector<std::vector<double>> basis;
  for (const EigenPair* p : against) {
    std::vector<double> b = p->vector;
    const double nb = norm2(b);
    for (double& v : b) v /= nb;
    basis.push_back(std::move(b));
  }

  const ShiftedLu lu(op, lambda);
  const double target = 1e-8 * std::max(op.diag_norm(), 1.0);
  bool converged = false;
  for (int it = 0; it < 5; ++it) {
    const double nx = norm2(x);
    for (double& v : x) v /= nx;
    lu.solve(x);
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += b[i] * x[i];
      for (std::size_t i = 0; i < n; ++i) x[i] -= dot * b[i];
    }
    const double nrm = norm2(x);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      throw NumericalError("eigenvector: inverse iteration broke down at shift " +
                           std::to_string(lambda));
    }
    for (double& v : x) v /= nrm;
    if (converged) break;
    if (unit_residual(op, x, rayleigh(op, x)) <= target) converged = true;
  }
  if (!converged) {
    throw NumericalError("eigenvector: inverse iteration did not converge in 5 steps at shift " +
                         std::to_string(lambda) + " (clustered eigenvalues?)");
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double v : x) {
    if (std::abs(v) > 1e-12 * peak) {
      if (v < 0.0) {
        for (double& w : x) w = -w;
      }
      break;
    }
  }

  EigenPair pair;
  pair.value = rayleigh(op, x);
  const double norm = std::sqrt(op.h);
  for (double& v : x) v /= norm;
  pair.vector = std::move(x);
  const double guard = std::max(1e-12 * std::max(1.0, std::abs(pair.value)),
                                8.0 * DBL_EPSILON * op.diag_norm());
  pair.index = sturm_count(op, pair.value - guard);
  return pair;
}

std::vector<EigenPair> eigenpairs_below(const TridiagonalOperator& op, std::size_t k,
                                        std::uint64_t seed) {
  const auto values = eigenvalues_below(op, k, 0.0);
  double one_norm = 0.0;
  for (std::size_t i = 0; i < op.n; ++i) {
    double s = std::abs(op.diag[i]);
    if (i > 0) s += std::abs(op.offdiag[i - 1]);
    if (i + 1 < op.n) s += std::abs(op.offdiag[i]);
    one_norm = std::max(one_norm, s);
  }
  const double ortol = 1e-3 * one_norm;
  const double separation = 10.0 * DBL_EPSILON * one_norm;
  std::vector<EigenPair> out;
  out.reserve(k);
  std::size_t cluster_start = 0;
  double previous_shift = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0 && values[j] - values[j - 1] > ortol) cluster_start = j;
    double shift = values[j];
    if (shift - previous_shift < separation) shift = previous_shift + separation;
    previous_shift = shift;
    std::vector<const EigenPair*> against;
    for (std::size_t i = cluster_start; i < j; ++i) against.push_back(&out[i]);
    EigenPair pair = eigenvector(op, shift, seed + j, against);
    pair.value = values[j];
    pair.index = j;
    out.push_back(std::move(pair));
  }
  return out;
}

double residual_norm(const TridiagonalOperator& op, const EigenPair& pair) {
  std::vector<double> unit = pair.vector;
  const double nrm = norm2(unit);
  for (double& v : unit) v /= nrm;
  return unit_residual(op, unit, pair.value);
}

std::size_t sign_changes(const std::vector<double>& u, double threshold) {
  double peak = 0.0;
  for (double v : u) peak = std::max(peak, std::abs(v));
  const double floor = threshold * peak;
  std::size_t changes = 0;
  int last = 0;
  for (double v : u) {
    if (std::abs(v) <= floor) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

double boundary_derivative(const EigenPair& pair, const TridiagonalOperator& op, Side side) {
  const auto& u = pair.vector;
  if (u.size() < 2) throw DomainError("boundary_derivative: vector too short");
  if (side == Side::left) return std::abs((4.0 * u[0] - u[1]) / (2.0 * op.h));
  const std::size_t n = u.size();
  return std::abs((4.0 * u[n - 1] - u[n - 2]) / (2.0 * op.h));
}

DirichletSpectrum dirichlet_eigenvalues(const PotentialModel& model, Interval interval,
                                        double hbar, std::size_t first, std::size_t count,
                                        const SolverSettings& settings,
                                        std::optional<std::size_t> n_override) {
  if (settings.points_per_wavelength < kMinPointsPerWavelength) {
    throw ConfigError("points_per_wavelength must be at least 20");
  }
  const double min_v = model.minimum_on(interval);
  const auto solve = [&](std::size_t n) {
    DirichletSpectrum s;
    const auto coarse = build_operator(model, interval, hbar, n);
    if (first + count > n) {
      throw ConfigError("grid with " + std::to_string(n) + " points cannot hold eigenvalue index " +
                        std::to_string(first + count - 1));
    }
    s.n = n;
    s.h = coarse.h;
    s.raw = eigenvalue_range(coarse, first, count, settings.rel_tol);
    if (settings.richardson) {
      const auto fine = build_operator(model, interval, hbar, 2 * n + 1);
      const auto e_fine = eigenvalue_range(fine, first, count, settings.rel_tol);
      s.values.resize(count);
      for (std::size_t j = 0; j < count; ++j) s.values[j] = richardson(s.raw[j], e_fine[j]);
    } else {
      s.values = s.raw;
    }
    return s;
  };

  const bool fixed = n_override.has_value() || settings.spacing > 0.0;
  std::size_t n = n_override ? *n_override
                             : nodes_for_spacing(interval, settings.spacing > 0.0
                                                               ? settings.spacing
                                                               : resolution_spacing(
                                                                     hbar, 1.0,
                                                                     settings.points_per_wavelength));
  auto result = solve(n);
  if (count == 0) return result;
  const double top = result.raw.back() - min_v;
  if (fixed) {
    const double bound = resolution_spacing(hbar, top, kMinPointsPerWavelength);
    if (result.h > bound * (1.0 + 1e-12)) {
      throw ConfigError("grid too coarse for E=" + std::to_string(result.raw.back()) +
                        ": need n >= " + std::to_string(nodes_for_spacing(interval, bound)) +
                        " on [" + std::to_string(interval.lo) + ", " +
                        std::to_string(interval.hi) + "], have " + std::to_string(n));
    }
    return result;
  }
  const double wanted = resolution_spacing(hbar, top, settings.points_per_wavelength);
  if (result.h > wanted * (1.0 + 1e-12)) {
    n = nodes_for_spacing(interval, resolution_spacing(hbar, 1.05 * top,
                                                       settings.points_per_wavelength));
    result = solve(n);
  }
  return result;
}

}  // namespace resbox
