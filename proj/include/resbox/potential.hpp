#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "resbox/numerics.hpp"

namespace resbox {

enum class Side { left, right };

std::string_view to_string(Side side);
Side side_from_string(std::string_view name);
inline Side opposite(Side side) { return side == Side::left ? Side::right : Side::left; }

enum class PotentialKind {
  two_gaussian_barriers,
  single_gaussian,
  square_barriers,
  constant,
  infinite_well_zero,
};

std::string_view to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(std::string_view name);

/// b_- exp(-((x - p_-)/w_-)^2) + b_+ exp(-((x - p_+)/w_+)^2), with p_- < p_+.
struct TwoGaussianParams {
  double b_minus = 0.0;
  double b_plus = 0.0;
  double p_minus = 0.0;
  double p_plus = 0.0;
  double w_minus = 1.0;
  double w_plus = 1.0;
  friend bool operator==(const TwoGaussianParams&, const TwoGaussianParams&) = default;
};

struct SingleGaussianParams {
  double height = 0.0;
  double center = 0.0;
  double width = 1.0;
  friend bool operator==(const SingleGaussianParams&, const SingleGaussianParams&) = default;
};

/// Piecewise constant: b_- on [left_outer, left_inner], floor between the
/// barriers, b_+ on [right_inner, right_outer], zero outside.
struct SquareBarrierParams {
  double b_minus = 0.0;
  double b_plus = 0.0;
  double left_outer = -2.0;
  double left_inner = -1.0;
  double right_inner = 1.0;
  double right_outer = 2.0;
  double floor = 0.0;
  friend bool operator==(const SquareBarrierParams&, const SquareBarrierParams&) = default;
};

struct ConstantParams {
  double value = 0.0;
  friend bool operator==(const ConstantParams&, const ConstantParams&) = default;
};

/// V = 0; Dirichlet walls come from the box, giving the infinite square well.
struct ZeroParams {
  friend bool operator==(const ZeroParams&, const ZeroParams&) = default;
};

using PotentialParams = std::variant<TwoGaussianParams, SingleGaussianParams, SquareBarrierParams,
                                     ConstantParams, ZeroParams>;

/// Closed-form potential together with its well data and asymptotic levels.
///
/// The well location x0 and depth v0 are recomputed from the parameters at
/// construction. Models without a strict interior minimum (constant, single
/// barrier, flat-bottomed square well) still construct; `has_strict_well()`
/// reports the distinction and the hypothesis checks fail accordingly.
class PotentialModel {
 public:
  explicit PotentialModel(PotentialParams params, double tail_exponent = 2.0);

  static PotentialModel two_gaussian_barriers(double b_minus, double b_plus, double p_minus,
                                              double p_plus, double w_minus, double w_plus);
  static PotentialModel single_gaussian(double height, double center, double width);
  static PotentialModel square_barriers(const SquareBarrierParams& params);
  static PotentialModel constant(double value);
  static PotentialModel infinite_well_zero();

  /// Asymmetric double barrier used throughout the test and acceptance suites.
  static PotentialModel canonical();

  [[nodiscard]] PotentialKind kind() const noexcept;
  [[nodiscard]] const PotentialParams& params() const noexcept { return params_; }

  [[nodiscard]] double value(double x) const noexcept;
  [[nodiscard]] double derivative(double x) const noexcept;
  double operator()(double x) const noexcept { return value(x); }

  [[nodiscard]] double x0() const noexcept { return x0_; }
  [[nodiscard]] double v0() const noexcept { return v0_; }
  [[nodiscard]] double v_minus() const noexcept { return v_minus_; }
  [[nodiscard]] double v_plus() const noexcept { return v_plus_; }
  [[nodiscard]] double v_side(Side side) const noexcept {
    return side == Side::left ? v_minus_ : v_plus_;
  }
  [[nodiscard]] double tail_exponent() const noexcept { return tail_exponent_; }
  [[nodiscard]] bool has_strict_well() const noexcept { return strict_well_; }

  /// Points where V is discontinuous (square barriers); empty otherwise.
  [[nodiscard]] std::vector<double> breakpoints() const;

  /// Largest value of V on the given side of x0 (the barrier top), searched
  /// over |x - x0| <= window.
  [[nodiscard]] double barrier_top(Side side, double window = 50.0) const;

  /// Infimum of V over the interval (dense scan).
  [[nodiscard]] double minimum_on(Interval interval) const;
  /// Supremum of V over the interval (dense scan).
  [[nodiscard]] double maximum_on(Interval interval) const;

 private:
  void locate_well();

  PotentialParams params_;
  double tail_exponent_ = 2.0;
  double x0_ = 0.0;
  double v0_ = 0.0;
  double v_minus_ = 0.0;
  double v_plus_ = 0.0;
  bool strict_well_ = false;
};

/// Interior split points and box half-width.
struct Geometry {
  double omega_minus = -1.0;
  double omega_plus = 1.0;
  double ell = 2.0;

  [[nodiscard]] Interval box() const noexcept { return {-ell, ell}; }
  [[nodiscard]] Interval interior() const noexcept { return {omega_minus, omega_plus}; }
  [[nodiscard]] Interval exterior(Side side) const noexcept {
    return side == Side::left ? Interval{-ell, omega_minus} : Interval{omega_plus, ell};
  }
  [[nodiscard]] double omega(Side side) const noexcept {
    return side == Side::left ? omega_minus : omega_plus;
  }
  [[nodiscard]] Geometry with_ell(double new_ell) const;
};

/// Validated constructor: omega_minus < 0 < omega_plus and ell > max |omega|.
Geometry make_geometry(double omega_minus, double omega_plus, double ell);

double eval_potential(const PotentialModel& model, double x);
double eval_potential_derivative(const PotentialModel& model, double x);

/// 0.5 (v0 - max(v_-, v_+)): width of the energy window above v0 in which the
/// exterior problem has a single turning point.
double default_delta(const PotentialModel& model);

struct ForbiddenRegionOptions {
  double scan_step = 1e-3;
  double tolerance = 1e-10;
};

/// Maximal subintervals of `search` on which V > E, sorted and disjoint.
/// Tangential contacts V = E (for instance the well bottom at E = v0) split
/// an interval into two pieces that touch at the contact point.
std::vector<Interval> forbidden_region(const PotentialModel& model, double energy, Interval search,
                                       const ForbiddenRegionOptions& options = {});

struct TurningPointResult {
  std::vector<double> points;
  std::optional<std::string> warning;

  [[nodiscard]] bool single() const noexcept { return points.size() == 1; }
};

/// Zeros of V - E inside `region`, refined to 1e-12. Anything other than a
/// single zero carries a warning (outside the one-turning-point regime).
TurningPointResult turning_points(const PotentialModel& model, double energy, Interval region);
TurningPointResult turning_points(const PotentialModel& model, double energy,
                                  const Geometry& geometry, Side side);

struct HypothesisOptions {
  std::size_t grid_points = 10000;
  double window = 50.0;
  double tail_from = 20.0;
  double tail_to = 200.0;
};

struct HypothesisReport {
  // (H1) bounded potential with a strict local minimum at x0, connected
  // closure of J(v0), and asymptotic levels below v0.
  bool h1 = false;
  bool bounded = false;
  bool local_minimum = false;
  bool forbidden_closure_connected = false;
  bool limits_below_v0 = false;
  std::vector<Interval> forbidden_at_v0;

  // (H2) non-trapping on the exterior at energy E.
  bool h2 = false;
  double virial_margin = 0.0;  ///< empirical S (minimum over both sides)
  double virial_margin_left = 0.0;
  double virial_margin_right = 0.0;

  // (H4) tail decay towards v_- and v_+.
  bool h4 = false;
  double tail_exponent_left = 0.0;  ///< +inf when the tail vanishes faster than any power
  double tail_exponent_right = 0.0;
  bool exterior_below_v0 = false;

  // Geometry admissibility: closure of (omega_-, omega_+) minus x0 inside J(v0).
  bool geometry_admissible = false;

  HypothesisOptions grid;
  double energy = 0.0;

  [[nodiscard]] bool all_pass() const noexcept { return h1 && h2 && h4; }
};

HypothesisReport check_hypotheses(const PotentialModel& model, const Geometry& geometry,
                                  double energy, const HypothesisOptions& options = {});

}  // namespace resbox
