#include "resbox/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resbox/errors.hpp"

namespace resbox {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double gaussian(double b, double p, double w, double x) {
  const double u = (x - p) / w;
  return b * std::exp(-u * u);
}

double gaussian_d1(double b, double p, double w, double x) {
  const double u = (x - p) / w;
  return -2.0 * u / w * b * std::exp(-u * u);
}

double gaussian_d2(double b, double p, double w, double x) {
  const double u = (x - p) / w;
  return b * std::exp(-u * u) * (4.0 * u * u - 2.0) / (w * w);
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw ConfigError(std::string("potential parameter '") + what + "' must be finite");
  }
}

void require_positive(double value, const char* what) {
  require_finite(value, what);
  if (value <= 0.0) {
    throw ConfigError(std::string("potential parameter '") + what + "' must be positive");
  }
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::left ? "left" : "right"; }

Side side_from_string(std::string_view name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  throw ConfigError("unknown side '" + std::string(name) + "' (expected left or right)");
}

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::two_gaussian_barriers:
      return "two_gaussian_barriers";
    case PotentialKind::single_gaussian:
      return "single_gaussian";
    case PotentialKind::square_barriers:
      return "square_barriers";
    case PotentialKind::constant:
      return "constant";
    case PotentialKind::infinite_well_zero:
      return "infinite_well_zero";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(std::string_view name) {
  for (auto kind : {PotentialKind::two_gaussian_barriers, PotentialKind::single_gaussian,
                    PotentialKind::square_barriers, PotentialKind::constant,
                    PotentialKind::infinite_well_zero}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown potential kind '" + std::string(name) + "'");
}

PotentialModel::PotentialModel(PotentialParams params, double tail_exponent)
    : params_(std::move(params)), tail_exponent_(tail_exponent) {
  require_positive(tail_exponent_, "tail_exponent");
  std::visit(overloaded{
                 [](const TwoGaussianParams& p) {
                   require_finite(p.b_minus, "b_minus");
                   require_finite(p.b_plus, "b_plus");
                   require_finite(p.p_minus, "p_minus");
                   require_finite(p.p_plus, "p_plus");
                   require_positive(p.w_minus, "w_minus");
                   require_positive(p.w_plus, "w_plus");
                   if (!(p.p_minus < p.p_plus)) {
                     throw ConfigError("two_gaussian_barriers requires p_minus < p_plus");
                   }
                 },
                 [](const SingleGaussianParams& p) {
                   require_finite(p.height, "height");
                   require_finite(p.center, "center");
                   require_positive(p.width, "width");
                 },
                 [](const SquareBarrierParams& p) {
                   for (double v : {p.b_minus, p.b_plus, p.left_outer, p.left_inner,
                                    p.right_inner, p.right_outer, p.floor}) {
                     require_finite(v, "square barrier edge/height");
                   }
                   if (!(p.left_outer < p.left_inner && p.left_inner < p.right_inner &&
                         p.right_inner < p.right_outer)) {
                     throw ConfigError(
                         "square_barriers requires left_outer < left_inner < right_inner < "
                         "right_outer");
                   }
                 },
                 [](const ConstantParams& p) { require_finite(p.value, "value"); },
                 [](const ZeroParams&) {},
             },
             params_);
  locate_well();
}

PotentialModel PotentialModel::two_gaussian_barriers(double b_minus, double b_plus,
                                                     double p_minus, double p_plus,
                                                     double w_minus, double w_plus) {
  return PotentialModel(TwoGaussianParams{b_minus, b_plus, p_minus, p_plus, w_minus, w_plus});
}

PotentialModel PotentialModel::single_gaussian(double height, double center, double width) {
  return PotentialModel(SingleGaussianParams{height, center, width});
}

PotentialModel PotentialModel::square_barriers(const SquareBarrierParams& params) {
  return PotentialModel(params);
}

PotentialModel PotentialModel::constant(double value) {
  return PotentialModel(ConstantParams{value});
}

PotentialModel PotentialModel::infinite_well_zero() { return PotentialModel(ZeroParams{}); }

PotentialModel PotentialModel::canonical() {
  return two_gaussian_barriers(0.8, 0.5, -1.6, 1.6, 0.8, 0.8);
}

PotentialKind PotentialModel::kind() const noexcept {
  return std::visit(overloaded{
                        [](const TwoGaussianParams&) { return PotentialKind::two_gaussian_barriers; },
                        [](const SingleGaussianParams&) { return PotentialKind::single_gaussian; },
                        [](const SquareBarrierParams&) { return PotentialKind::square_barriers; },
                        [](const ConstantParams&) { return PotentialKind::constant; },
                        [](const ZeroParams&) { return PotentialKind::infinite_well_zero; },
                    },
                    params_);
}

double PotentialModel::value(double x) const noexcept {
  return std::visit(overloaded{
                        [x](const TwoGaussianParams& p) {
                          return gaussian(p.b_minus, p.p_minus, p.w_minus, x) +
                                 gaussian(p.b_plus, p.p_plus, p.w_plus, x);
                        },
                        [x](const SingleGaussianParams& p) {
                          return gaussian(p.height, p.center, p.width, x);
                        },
                        [x](const SquareBarrierParams& p) {
                          if (x < p.left_outer || x > p.right_outer) return 0.0;
                          if (x <= p.left_inner) return p.b_minus;
                          if (x < p.right_inner) return p.floor;
                          return p.b_plus;
                        },
                        [](const ConstantParams& p) { return p.value; },
                        [](const ZeroParams&) { return 0.0; },
                    },
                    params_);
}

double PotentialModel::derivative(double x) const noexcept {
  return std::visit(overloaded{
                        [x](const TwoGaussianParams& p) {
                          return gaussian_d1(p.b_minus, p.p_minus, p.w_minus, x) +
                                 gaussian_d1(p.b_plus, p.p_plus, p.w_plus, x);
                        },
                        [x](const SingleGaussianParams& p) {
                          return gaussian_d1(p.height, p.center, p.width, x);
                        },
                        // Zero away from the jumps; the jumps themselves carry no
                        // classical derivative.
                        [](const SquareBarrierParams&) { return 0.0; },
                        [](const ConstantParams&) { return 0.0; },
                        [](const ZeroParams&) { return 0.0; },
                    },
                    params_);
}

std::vector<double> PotentialModel::breakpoints() const {
  if (const auto* p = std::get_if<SquareBarrierParams>(&params_)) {
    return {p->left_outer, p->left_inner, p->right_inner, p->right_outer};
  }
  return {};
}

void PotentialModel::locate_well() {
  std::visit(
      overloaded{
          [this](const TwoGaussianParams& p) {
            v_minus_ = 0.0;
            v_plus_ = 0.0;
            // Coarse scan between the centres, then Newton on V'.
            const std::size_t n = 4001;
            double best_x = p.p_minus;
            double best_v = value(best_x);
            for (std::size_t i = 1; i < n; ++i) {
              const double x = p.p_minus + (p.p_plus - p.p_minus) * static_cast<double>(i) /
                                               static_cast<double>(n - 1);
              const double v = value(x);
              if (v < best_v) {
                best_v = v;
                best_x = x;
              }
            }
            const double step = (p.p_plus - p.p_minus) / static_cast<double>(n - 1);
            double x = best_x;
            for (int it = 0; it < 60; ++it) {
              const double d2 = gaussian_d2(p.b_minus, p.p_minus, p.w_minus, x) +
                                gaussian_d2(p.b_plus, p.p_plus, p.w_plus, x);
              if (!(d2 > 0.0)) break;
              const double dx = -derivative(x) / d2;
              if (!std::isfinite(dx) || std::abs(dx) > step) break;
              x += dx;
              if (std::abs(dx) < 1e-15 * std::max(1.0, std::abs(x))) break;
            }
            if (value(x) > best_v) x = best_x;
            x0_ = x;
            v0_ = value(x);
            const double d2 = gaussian_d2(p.b_minus, p.p_minus, p.w_minus, x) +
                              gaussian_d2(p.b_plus, p.p_plus, p.w_plus, x);
            strict_well_ = d2 > 0.0 && x > p.p_minus && x < p.p_plus &&
                           std::abs(derivative(x)) < 1e-10;
          },
          [this](const SingleGaussianParams& p) {
            x0_ = p.center;
            v0_ = p.height;
            v_minus_ = 0.0;
            v_plus_ = 0.0;
            strict_well_ = p.height < 0.0;
          },
          [this](const SquareBarrierParams& p) {
            x0_ = 0.5 * (p.left_inner + p.right_inner);
            v0_ = p.floor;
            v_minus_ = 0.0;
            v_plus_ = 0.0;
            strict_well_ = false;
          },
          [this](const ConstantParams& p) {
            x0_ = 0.0;
            v0_ = p.value;
            v_minus_ = p.value;
            v_plus_ = p.value;
            strict_well_ = false;
          },
          [this](const ZeroParams&) {
            x0_ = 0.0;
            v0_ = 0.0;
            v_minus_ = 0.0;
            v_plus_ = 0.0;
            strict_well_ = false;
          },
      },
      params_);
}

namespace {

std::size_t scan_points(Interval interval, double step) {
  const double n = std::ceil(interval.length() / step);
  return static_cast<std::size_t>(std::clamp(n, 2000.0, 2.0e6)) + 1;
}

}  // namespace

double PotentialModel::minimum_on(Interval interval) const {
  const std::size_t n = scan_points(interval, 1e-3);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = interval.lo + interval.length() * static_cast<double>(i) /
                                       static_cast<double>(n - 1);
    best = std::min(best, value(x));
  }
  return best;
}

double PotentialModel::maximum_on(Interval interval) const {
  const std::size_t n = scan_points(interval, 1e-3);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = interval.lo + interval.length() * static_cast<double>(i) /
                                       static_cast<double>(n - 1);
    best = std::max(best, value(x));
  }
  return best;
}

double PotentialModel::barrier_top(Side side, double window) const {
  const Interval region = side == Side::left ? Interval{x0_ - window, x0_}
                                             : Interval{x0_, x0_ + window};
  const std::size_t n = scan_points(region, 1e-3);
  const double step = region.length() / static_cast<double>(n - 1);
  double best_x = region.lo;
  double best_v = value(best_x);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = region.lo + step * static_cast<double>(i);
    const double v = value(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const auto refined = golden_section_minimize([this](double x) { return -value(x); },
                                               best_x - step, best_x + step, 1e-13, 200);
  return std::max(best_v, -refined.fx);
}

Geometry Geometry::with_ell(double new_ell) const {
  return make_geometry(omega_minus, omega_plus, new_ell);
}

Geometry make_geometry(double omega_minus, double omega_plus, double ell) {
  if (!std::isfinite(omega_minus) || !std::isfinite(omega_plus) || !std::isfinite(ell)) {
    throw ConfigError("geometry values must be finite");
  }
  if (!(omega_minus < 0.0) || !(omega_plus > 0.0)) {
    throw ConfigError("geometry requires omega_minus < 0 < omega_plus");
  }
  if (!(ell > std::max(-omega_minus, omega_plus))) {
    throw ConfigError("box half-width ell must exceed max(|omega_minus|, omega_plus)");
  }
  return Geometry{omega_minus, omega_plus, ell};
}

double eval_potential(const PotentialModel& model, double x) {
  if (!std::isfinite(x)) throw DomainError("eval_potential: x must be finite");
  return model.value(x);
}

double eval_potential_derivative(const PotentialModel& model, double x) {
  if (!std::isfinite(x)) throw DomainError("eval_potential_derivative: x must be finite");
  return model.derivative(x);
}

double default_delta(const PotentialModel& model) {
  return 0.5 * (model.v0() - std::max(model.v_minus(), model.v_plus()));
}

std::vector<Interval> forbidden_region(const PotentialModel& model, double energy, Interval search,
                                       const ForbiddenRegionOptions& options) {
  if (!std::isfinite(energy)) throw DomainError("forbidden_region: energy must be finite");
  if (!std::isfinite(search.lo) || !std::isfinite(search.hi) || !(search.lo < search.hi)) {
    throw DomainError("forbidden_region: search interval must be bounded and non-empty");
  }
  const auto f = [&](double x) { return model.value(x) - energy; };
  const std::size_t n =
      static_cast<std::size_t>(std::ceil(search.length() / options.scan_step)) + 1;
  const double step = search.length() / static_cast<double>(n - 1);
  std::vector<double> xs(n);
  std::vector<double> fs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = i + 1 == n ? search.hi : search.lo + step * static_cast<double>(i);
    fs[i] = f(xs[i]);
  }

  const auto root = [&](double a, double b) {
    try {
      return bisect_root(f, a, b, options.tolerance);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("forbidden_region: bracketing failed near x=") +
                           std::to_string(a) + " at E=" + std::to_string(energy) + ": " +
                           e.what());
    }
  };

  // Boundaries where V - E changes sign, in order, plus the tangential contacts.
  std::vector<Interval> result;
  bool inside = fs[0] > 0.0;
  double start = search.lo;
  const double contact = 1e-12 * std::max(1.0, std::abs(energy));
  for (std::size_t i = 1; i < n; ++i) {
    const bool now = fs[i] > 0.0;
    if (inside && !now) {
      result.push_back({start, root(xs[i - 1], xs[i])});
      inside = false;
    } else if (!inside && now) {
      start = root(xs[i - 1], xs[i]);
      inside = true;
    } else if (inside && now && i + 1 < n && fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1]) {
      // Local minimum of V - E that stays positive on the grid: it may touch
      // or dip below zero between samples.
      const auto m = golden_section_minimize(f, xs[i - 1], xs[i + 1], 1e-13, 300);
      if (m.fx <= contact && m.fx >= -contact) {
        result.push_back({start, m.x});
        start = m.x;
      } else if (m.fx < -contact) {
        result.push_back({start, root(xs[i - 1], m.x)});
        start = root(m.x, xs[i + 1]);
      }
    }
  }
  if (inside) result.push_back({start, search.hi});
  return result;
}

TurningPointResult turning_points(const PotentialModel& model, double energy, Interval region) {
  if (!std::isfinite(energy)) throw DomainError("turning_points: energy must be finite");
  if (!(region.lo < region.hi)) throw DomainError("turning_points: empty region");
  const auto f = [&](double x) { return model.value(x) - energy; };
  const double step = std::min(1e-3, region.length() / 1000.0);
  const std::size_t n = static_cast<std::size_t>(std::ceil(region.length() / step)) + 1;
  const double h = region.length() / static_cast<double>(n - 1);
  TurningPointResult out;
  double x_prev = region.lo;
  double f_prev = f(x_prev);
  if (f_prev == 0.0) out.points.push_back(x_prev);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = i + 1 == n ? region.hi : region.lo + h * static_cast<double>(i);
    const double fx = f(x);
    if (fx == 0.0) {
      out.points.push_back(x);
    } else if (f_prev != 0.0 && (fx < 0.0) != (f_prev < 0.0)) {
      out.points.push_back(bisect_root(f, x_prev, x, 1e-12));
    }
    x_prev = x;
    f_prev = fx;
  }
  if (out.points.empty()) {
    out.warning = "no turning point in [" + std::to_string(region.lo) + ", " +
                  std::to_string(region.hi) + "] at E=" + std::to_string(energy);
  } else if (out.points.size() > 1) {
    out.warning = std::to_string(out.points.size()) + " turning points in [" +
                  std::to_string(region.lo) + ", " + std::to_string(region.hi) +
                  "] at E=" + std::to_string(energy);
  }
  return out;
}

TurningPointResult turning_points(const PotentialModel& model, double energy,
                                  const Geometry& geometry, Side side) {
  return turning_points(model, energy, geometry.exterior(side));
}

namespace {

/// Decay exponent of |g(x)| on [from, to] along direction sign (+1/-1),
/// from a log-log fit. Returns +inf when the tail underflows faster than any
/// power or vanishes identically.
template <class G>
double tail_decay_exponent(G&& g, double sign, double from, double to) {
  std::vector<double> lx;
  std::vector<double> ly;
  const std::size_t n = 400;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = from * std::pow(to / from, static_cast<double>(i) / (n - 1));
    const double v = std::abs(g(sign * t));
    if (v > 1e-300 && std::isfinite(v)) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(v));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::infinity();
  return -fit_line(lx, ly).slope;
}

}  // namespace

HypothesisReport check_hypotheses(const PotentialModel& model, const Geometry& geometry,
                                  double energy, const HypothesisOptions& options) {
  HypothesisReport r;
  r.grid = options;
  r.energy = energy;
  const double w = options.window;
  const auto grid = linspace(-w, w, options.grid_points);
  const double v0 = model.v0();
  const double x0 = model.x0();

  // (H1)
  r.bounded = std::all_of(grid.begin(), grid.end(), [&](double x) {
    const double v = model.value(x);
    return std::isfinite(v) && std::abs(v) < 1e300;
  });
  const double eta = 1e-4;
  r.local_minimum = model.has_strict_well() && model.value(x0 - eta) > v0 &&
                    model.value(x0 + eta) > v0;
  r.forbidden_at_v0 = forbidden_region(model, v0, {-w, w});
  bool connected = !r.forbidden_at_v0.empty();
  for (std::size_t i = 1; i < r.forbidden_at_v0.size(); ++i) {
    if (r.forbidden_at_v0[i].lo - r.forbidden_at_v0[i - 1].hi > 1e-6) connected = false;
  }
  if (connected) {
    connected = r.forbidden_at_v0.front().lo < x0 && x0 < r.forbidden_at_v0.back().hi;
  }
  r.forbidden_closure_connected = connected;
  r.limits_below_v0 = std::max(model.v_minus(), model.v_plus()) < v0;
  r.h1 = r.bounded && r.local_minimum && r.forbidden_closure_connected && r.limits_below_v0;

  // (H2): (x - omega)/x * (2 (V - E) + x V') < -S on the exterior minus J(E).
  double worst_left = -std::numeric_limits<double>::infinity();
  double worst_right = -std::numeric_limits<double>::infinity();
  for (double x : grid) {
    const bool left = x < geometry.omega_minus;
    const bool right = x > geometry.omega_plus;
    if (!left && !right) continue;
    const double v = model.value(x);
    if (v > energy) continue;
    const double om = left ? geometry.omega_minus : geometry.omega_plus;
    const double q = (x - om) / x * (2.0 * (v - energy) + x * model.derivative(x));
    (left ? worst_left : worst_right) = std::max(left ? worst_left : worst_right, q);
  }
  r.virial_margin_left = -worst_left;
  r.virial_margin_right = -worst_right;
  r.virial_margin = std::min(r.virial_margin_left, r.virial_margin_right);
  r.h2 = r.virial_margin > 0.0;

  // (H4)
  r.tail_exponent_left = tail_decay_exponent(
      [&](double x) { return model.value(x) - model.v_minus(); }, -1.0, options.tail_from,
      options.tail_to);
  r.tail_exponent_right = tail_decay_exponent(
      [&](double x) { return model.value(x) - model.v_plus(); }, 1.0, options.tail_from,
      options.tail_to);
  const double claimed = model.tail_exponent();
  const bool tails = r.tail_exponent_left >= 0.95 * claimed &&
                     r.tail_exponent_right >= 0.95 * claimed;
  bool below = true;
  const double plateau = 1e-14 * std::max(1.0, std::abs(v0));
  for (double x : grid) {
    if (x >= geometry.omega_minus && x <= geometry.omega_plus) continue;
    const double v = model.value(x);
    if (v > v0 + plateau) continue;  // inside J(v0)
    if (v >= v0 - plateau) {
      const bool at_edge = std::any_of(
          r.forbidden_at_v0.begin(), r.forbidden_at_v0.end(), [&](const Interval& j) {
            return std::abs(x - j.lo) < 1e-6 || std::abs(x - j.hi) < 1e-6;
          });
      if (!at_edge) below = false;
    }
  }
  r.exterior_below_v0 = below;
  r.h4 = tails && r.limits_below_v0 && r.exterior_below_v0;

  // Geometry admissibility.
  bool admissible = geometry.omega_minus < x0 && x0 < geometry.omega_plus;
  for (double x : linspace(geometry.omega_minus, geometry.omega_plus, 2001)) {
    if (std::abs(x - x0) <= 1e-6) continue;
    if (!(model.value(x) > v0)) admissible = false;
  }
  r.geometry_admissible = admissible;
  return r;
}

}  // namespace resbox
