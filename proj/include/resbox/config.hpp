#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resbox/eigensolve.hpp"
#include "resbox/potential.hpp"
#include "resbox/semiclassics.hpp"
#include "resbox/sweep.hpp"

namespace resbox {

inline constexpr std::string_view kVersion = "0.1.0";

struct RunConfig {
  // [potential]
  PotentialKind kind = PotentialKind::infinite_well_zero;
  PotentialParams params = ZeroParams{};
  double tail_exponent = 2.0;

  // [geometry]: explicit split points, or split_fraction of each barrier's
  // Agmon distance (models with a strict well), or +-ell/2 otherwise.
  std::optional<double> omega_minus;
  std::optional<double> omega_plus;
  double split_fraction = kOuterFraction;
  double ell = 0.0;

  // [numerics]
  double hbar = 0.0;
  std::vector<double> hbar_list{0.14, 0.12, 0.10, 0.08};
  double points_per_wavelength = 100.0;
  bool richardson = true;
  double rel_tol = 1e-12;
  std::uint64_t seed = 20240607;
  std::size_t k = 10;
  double delta_c = 1.0;
  double delta_n = 4.0;

  // [sweep]; bounds default to [ell, 2 ell].
  std::optional<double> ell_min;
  std::optional<double> ell_max;
  std::size_t n_ell = 400;
  std::size_t sweep_k = 14;

  // [study]
  Observable observable = Observable::gap_right;
  std::size_t interior_index = 0;
  Side side = Side::right;
  std::size_t report_levels = 4;
  std::size_t wkb_levels = 4;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the INI-style text. Unknown sections or keys, duplicates, missing
/// required keys, malformed numbers and invalid values raise ConfigError with
/// the offending line number.
RunConfig parse_config(std::string_view text);

/// Canonical text form with every default filled in; parse_config of the
/// result reproduces the same RunConfig and the same text.
std::string to_text(const RunConfig& config);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

PotentialModel build_model(const RunConfig& config);
Geometry build_geometry(const RunConfig& config, const PotentialModel& model);
SolverSettings build_settings(const RunConfig& config);
RefineOptions build_refine_options(const RunConfig& config);
Interval sweep_range(const RunConfig& config);

/// Shortest decimal that reads back to the same double.
std::string format_number(double value);

}  // namespace resbox
