#include "resbox/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>

#include "resbox/agmon.hpp"
#include "resbox/decoupled.hpp"
#include "resbox/errors.hpp"
#include "resbox/parallel.hpp"
#include "resbox/semiclassics.hpp"
#include "resbox/sweep.hpp"
#include "resbox/wkb.hpp"

namespace resbox {

namespace {

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

struct Context {
  const RunConfig& config;
  PotentialModel model;
  Geometry geometry;
  SolverSettings settings;
  unsigned jobs;
};

CsvTable spectrum(const Context& c) {
  CsvTable t{{"index", "energy", "raw"}, {}};
  const auto s = dirichlet_eigenvalues(c.model, c.geometry.box(), c.config.hbar, 0, c.config.k,
                                       c.settings);
  for (std::size_t i = 0; i < s.values.size(); ++i) t.add({num(i), num(s.values[i]), num(s.raw[i])});
  return t;
}

CsvTable decoupled(const Context& c) {
  CsvTable t{{"family", "index", "energy"}, {}};
  const auto d = decoupled_spectra(c.model, c.geometry, c.config.hbar, c.config.k, c.config.k,
                                   c.settings);
  const auto dump = [&](const char* family, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) t.add({family, num(i), num(values[i])});
  };
  dump("interior", d.interior);
  dump("exterior_left", d.exterior_left);
  dump("exterior_right", d.exterior_right);
  return t;
}

CsvTable agmon(const Context& c) {
  CsvTable t{{"d_minus", "d_plus", "d_star", "d_boundary_minus", "d_boundary_plus"}, {}};
  const auto m = agmon_summary(c.model, c.geometry);
  t.add({num(m.d_minus), num(m.d_plus), num(m.d_star), num(m.d_boundary_minus),
         num(m.d_boundary_plus)});
  return t;
}

BranchSet classified_sweep(const Context& c) {
  BranchSet b = sweep_eigenvalues(c.model, c.geometry, c.config.hbar, sweep_range(c.config),
                                  c.config.n_ell, c.config.sweep_k, c.settings, c.jobs);
  classify_branches(b, c.model, c.settings, c.jobs);
  return b;
}

CsvTable sweep(const Context& c) {
  CsvTable t{{"ell", "slot", "energy", "classification"}, {}};
  const BranchSet b = classified_sweep(c);
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.k; ++j) {
      t.add({num(b.ell_grid[i]), num(j), num(b.energies[i][j]), std::string(to_string(b.tags[i][j]))});
    }
  }
  return t;
}

CsvTable crossings(const Context& c) {
  CsvTable t{{"ell_star", "center_energy", "gap", "side", "interior_index", "delta", "agmon_d",
              "isolated"},
             {}};
  const BranchSet b = classified_sweep(c);
  const auto candidates = detect_avoided_crossings(b);
  const RefineOptions options = build_refine_options(c.config);
  std::vector<std::optional<CrossingReport>> refined(candidates.size());
  std::vector<std::string> failures(candidates.size());
  parallel_for(candidates.size(), c.jobs, [&](std::size_t i) {
    try {
      refined[i] = refine_gap(c.model, c.geometry, c.config.hbar, candidates[i], b.spacing,
                              b.interior, c.settings, options);
    } catch (const RefinementError& e) {
      failures[i] = e.what();
    }
  });
  std::vector<CrossingReport> reports;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (refined[i]) {
      reports.push_back(*refined[i]);
    } else {
      std::cerr << "resonance-box: skipped candidate near ell=" << num(b.ell_grid[candidates[i].point])
                << ": " << failures[i] << '\n';
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const auto& a, const auto& b) { return a.ell_star < b.ell_star; });
  for (const auto& r : reports) {
    t.add({num(r.ell_star), num(r.center_energy), num(r.gap), std::string(to_string(r.side)),
           num(r.interior_index), num(r.delta_isolation), num(r.agmon_prediction),
           r.isolated ? "1" : "0"});
  }
  return t;
}

CsvTable wkb(const Context& c) {
  CsvTable t{{"side", "n", "E_wkb", "E_numeric", "abs_err"}, {}};
  const Side side = c.config.side;
  const std::size_t levels = c.config.wkb_levels;
  if (levels == 0) return t;
  const auto numeric = exterior_spectrum(c.model, c.geometry, c.config.hbar, side, levels, c.settings);
  for (std::size_t n = 0; n < levels; ++n) {
    double predicted = 0.0;
    try {
      predicted = predict_exterior_eigenvalue(c.model, c.geometry, c.config.hbar, side, n);
    } catch (const SearchError&) {
      break;  // remaining levels lie above the semiclassical window
    }
    t.add({std::string(to_string(side)), num(n), num(predicted), num(numeric[n]),
           num(std::abs(predicted - numeric[n]))});
  }
  return t;
}

std::vector<std::pair<std::string, CsvTable>> scaling(const Context& c) {
  const auto s = run_scaling_study(c.model, c.geometry, c.config.observable, c.config.hbar_list,
                                   c.config.interior_index, c.settings,
                                   build_refine_options(c.config), c.jobs);
  CsvTable rows{{"hbar", "inv_hbar", "value", "log_value", "ell"}, {}};
  for (std::size_t i = 0; i < s.hbar_values.size(); ++i) {
    rows.add({num(s.hbar_values[i]), num(1.0 / s.hbar_values[i]), num(s.values[i]),
              num(s.log_values[i]), num(s.ells[i])});
  }
  CsvTable fit{{"observable", "fitted_slope", "intercept", "r_squared", "agmon_reference",
                "slope_ratio"},
               {}};
  fit.add({std::string(to_string(s.observable)), num(s.fitted_slope), num(s.intercept),
           num(s.r_squared), num(s.agmon_reference), num(s.slope_ratio)});
  return {{"scaling", rows}, {"scaling_fit", fit}};
}

CsvTable report(const Context& c) {
  CsvTable t{{"level", "well_mass", "E_d", "E_res", "ell_flat", "gap_left", "ell_left",
              "gap_right", "ell_right", "t_bound", "d_minus", "d_plus", "width_order",
              "larger_gap_side"},
             {}};
  const auto r = resonance_report(c.model, c.geometry, c.config.hbar, c.config.report_levels,
                                  c.settings, build_refine_options(c.config), c.jobs);
  for (const auto& row : r.rows) {
    t.add({num(row.level), num(row.well_mass), num(row.interior_energy),
           num(row.resonance_energy), num(row.ell_flat), num(row.gap_left), num(row.ell_left),
           num(row.gap_right), num(row.ell_right), num(row.t_bound), num(row.d_minus),
           num(row.d_plus), num(row.width_order), std::string(to_string(row.larger_gap_side))});
  }
  return t;
}

}  // namespace

std::string CsvTable::render(const std::vector<std::string>& comments) const {
  std::ostringstream out;
  for (const auto& line : comments) out << line << '\n';
  const auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  join(columns);
  for (const auto& row : rows) join(row);
  return out.str();
}

std::vector<std::string> output_header(const RunConfig& config, bool timestamp) {
  std::vector<std::string> lines{"# resonance-box v" + std::string(kVersion) +
                                 " config-hash=" + config_hash(config)};
  std::istringstream text(to_text(config));
  for (std::string line; std::getline(text, line);) {
    lines.push_back(line.empty() ? "#" : "# " + line);
  }
  if (timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    lines.push_back(std::string("# generated ") + buf);
  }
  return lines;
}

const std::vector<std::string_view>& command_names() {
  static const std::vector<std::string_view> names{"spectrum", "decoupled", "agmon", "sweep",
                                                   "crossings", "wkb",      "scaling", "report"};
  return names;
}

std::vector<std::pair<std::string, CsvTable>> compute_command(const RunConfig& config,
                                                             std::string_view command,
                                                             unsigned jobs) {
  const PotentialModel model = build_model(config);
  const Context c{config, model, build_geometry(config, model), build_settings(config),
                  std::max(jobs, 1u)};
  if (command == "spectrum") return {{"spectrum", spectrum(c)}};
  if (command == "decoupled") return {{"decoupled", decoupled(c)}};
  if (command == "agmon") return {{"agmon", agmon(c)}};
  if (command == "sweep") return {{"sweep", sweep(c)}};
  if (command == "crossings") return {{"crossings", crossings(c)}};
  if (command == "wkb") return {{"wkb", wkb(c)}};
  if (command == "scaling") return scaling(c);
  if (command == "report") return {{"report", report(c)}};
  throw ConfigError("unknown command '" + std::string(command) + "'");
}

std::vector<std::filesystem::path> run_command(const RunConfig& config, std::string_view command,
                                               const std::filesystem::path& out_dir, unsigned jobs,
                                               bool timestamp) {
  const auto tables = compute_command(config, command, jobs);
  const auto header = output_header(config, timestamp);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [stem, table] : tables) {
    const auto path = out_dir / (stem + ".csv");
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot open " + path.string() + " for writing");
    file << table.render(header);
    if (!file) throw Error("failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return 2;
  if (dynamic_cast<const DomainError*>(&error)) return 3;
  if (dynamic_cast<const NumericalError*>(&error)) return 4;
  if (dynamic_cast<const SearchError*>(&error) || dynamic_cast<const RegimeError*>(&error) ||
      dynamic_cast<const RefinementError*>(&error) || dynamic_cast<const StudyError*>(&error)) {
    return 5;
  }
  return 1;
}

}  // namespace resbox
