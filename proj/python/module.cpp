#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <thread>

#include "resbox/agmon.hpp"
#include "resbox/cli.hpp"
#include "resbox/config.hpp"
#include "resbox/decoupled.hpp"
#include "resbox/eigensolve.hpp"
#include "resbox/errors.hpp"
#include "resbox/semiclassics.hpp"
#include "resbox/sweep.hpp"
#include "resbox/wkb.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace resbox;

namespace {

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string repr_fields(const char* name, std::initializer_list<std::pair<const char*, double>> fields) {
  std::ostringstream out;
  out.precision(17);
  out << name << "(";
  bool first = true;
  for (const auto& [key, value] : fields) {
    out << (first ? "" : ", ") << key << "=" << value;
    first = false;
  }
  out << ")";
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Box-method resonance computations for one-dimensional Schroedinger operators.";
  m.attr("__version__") = std::string(kVersion);
  m.attr("OUTER_FRACTION") = kOuterFraction;
  m.attr("BALANCED_FRACTION") = kBalancedFraction;

  // Errors: one Python class per C++ class, all under resbox.Error.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<NumericalError>(m, "NumericalError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<SearchError>(m, "SearchError", base);
  py::register_exception<RegimeError>(m, "RegimeError", base);
  py::register_exception<RefinementError>(m, "RefinementError", base);
  py::register_exception<StudyError>(m, "StudyError", base);

  py::enum_<Side>(m, "Side").value("left", Side::left).value("right", Side::right);
  py::enum_<BranchTag>(m, "BranchTag")
      .value("interior_like", BranchTag::interior_like)
      .value("exterior_left", BranchTag::exterior_left)
      .value("exterior_right", BranchTag::exterior_right)
      .value("mixed", BranchTag::mixed);
  py::enum_<Observable>(m, "Observable")
      .value("gap_left", Observable::gap_left)
      .value("gap_right", Observable::gap_right)
      .value("t_bound", Observable::t_bound);

  py::class_<Interval>(m, "Interval")
      .def(py::init([](double lo, double hi) { return Interval{lo, hi}; }), "lo"_a, "hi"_a)
      .def(py::init([](const py::tuple& t) {
        if (t.size() != 2) throw py::value_error("Interval needs (lo, hi)");
        return Interval{t[0].cast<double>(), t[1].cast<double>()};
      }))
      .def_readwrite("lo", &Interval::lo)
      .def_readwrite("hi", &Interval::hi)
      .def("__repr__", [](const Interval& i) {
        return repr_fields("Interval", {{"lo", i.lo}, {"hi", i.hi}});
      });
  py::implicitly_convertible<py::tuple, Interval>();

  py::class_<PotentialModel>(m, "PotentialModel")
      .def_static("two_gaussian_barriers", &PotentialModel::two_gaussian_barriers, "b_minus"_a, "b_plus"_a,
                  "p_minus"_a, "p_plus"_a, "w_minus"_a, "w_plus"_a)
      .def_static("single_gaussian", &PotentialModel::single_gaussian, "height"_a, "center"_a, "width"_a)
      .def_static("constant", &PotentialModel::constant, "value"_a)
      .def_static("infinite_well_zero", &PotentialModel::infinite_well_zero)
      .def_static("canonical", &PotentialModel::canonical)
      .def("__call__", &PotentialModel::value, "x"_a)
      .def("value", &PotentialModel::value, "x"_a)
      .def("derivative", &PotentialModel::derivative, "x"_a)
      .def_property_readonly("kind", [](const PotentialModel& p) { return std::string(to_string(p.kind())); })
      .def_property_readonly("x0", &PotentialModel::x0)
      .def_property_readonly("v0", &PotentialModel::v0)
      .def_property_readonly("v_minus", &PotentialModel::v_minus)
      .def_property_readonly("v_plus", &PotentialModel::v_plus)
      .def_property_readonly("has_strict_well", &PotentialModel::has_strict_well)
      .def("barrier_top", &PotentialModel::barrier_top, "side"_a, "window"_a = 50.0);

  py::class_<Geometry>(m, "Geometry")
      .def(py::init(&make_geometry), "omega_minus"_a, "omega_plus"_a, "ell"_a)
      .def_readonly("omega_minus", &Geometry::omega_minus)
      .def_readonly("omega_plus", &Geometry::omega_plus)
      .def_readonly("ell", &Geometry::ell)
      .def("with_ell", &Geometry::with_ell, "ell"_a)
      .def("__repr__", [](const Geometry& g) {
        return repr_fields("Geometry", {{"omega_minus", g.omega_minus}, {"omega_plus", g.omega_plus}, {"ell", g.ell}});
      });
  m.def(
      "agmon_geometry",
      [](const PotentialModel& model, double ell, double left, double right) {
        return agmon_geometry(model, left, right, ell);
      },
      "model"_a, "ell"_a, "fraction_left"_a = kOuterFraction, "fraction_right"_a = kOuterFraction);
  m.def("balanced_geometry", &balanced_geometry, "model"_a, "side"_a, "ell"_a);

  py::class_<SolverSettings>(m, "SolverSettings")
      .def(py::init<>())
      .def_readwrite("points_per_wavelength", &SolverSettings::points_per_wavelength)
      .def_readwrite("richardson", &SolverSettings::richardson)
      .def_readwrite("rel_tol", &SolverSettings::rel_tol)
      .def_readwrite("seed", &SolverSettings::seed)
      .def_readwrite("spacing", &SolverSettings::spacing);

  m.def("agmon_distance", &agmon_distance, "model"_a, "energy"_a, "a"_a, "b"_a);
  py::class_<AgmonMetrics>(m, "AgmonMetrics")
      .def_readonly("d_minus", &AgmonMetrics::d_minus)
      .def_readonly("d_plus", &AgmonMetrics::d_plus)
      .def_readonly("d_star", &AgmonMetrics::d_star)
      .def_readonly("d_boundary_minus", &AgmonMetrics::d_boundary_minus)
      .def_readonly("d_boundary_plus", &AgmonMetrics::d_boundary_plus);
  m.def("agmon_summary", &agmon_summary, "model"_a, "geometry"_a);

  m.def(
      "tridiagonal_eigenvalues",
      [](std::vector<double> diag, std::vector<double> offdiag, std::size_t k, double rel_tol) {
        return eigenvalues_below(TridiagonalOperator::from_arrays(std::move(diag), std::move(offdiag)), k, rel_tol);
      },
      "diag"_a, "offdiag"_a, "k"_a, "rel_tol"_a = 1e-12,
      "Lowest k eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.");
  m.def(
      "dirichlet_eigenvalues",
      [](const PotentialModel& model, Interval interval, double hbar, std::size_t count,
         const SolverSettings& settings, std::optional<std::size_t> n) {
        return dirichlet_eigenvalues(model, interval, hbar, 0, count, settings, n).values;
      },
      "model"_a, "interval"_a, "hbar"_a, "count"_a, "settings"_a = SolverSettings{}, "n"_a = py::none());

  m.def("interior_spectrum", &interior_spectrum, "model"_a, "geometry"_a, "hbar"_a, "k"_a,
        "settings"_a = SolverSettings{});
  m.def("exterior_spectrum", &exterior_spectrum, "model"_a, "geometry"_a, "hbar"_a, "side"_a, "k"_a,
        "settings"_a = SolverSettings{});

  py::class_<InterlacingReport>(m, "InterlacingReport")
      .def_readonly("full", &InterlacingReport::full)
      .def_readonly("decoupled", &InterlacingReport::decoupled)
      .def_readonly("one_condition", &InterlacingReport::one_condition)
      .def_readonly("shift_needed", &InterlacingReport::shift_needed)
      .def_property_readonly("violations", [](const InterlacingReport& r) { return r.violations.size(); })
      .def_property_readonly("ok", &InterlacingReport::ok);
  m.def("interlacing_check", &interlacing_check, "model"_a, "geometry"_a, "hbar"_a, "k"_a,
        "settings"_a = SolverSettings{});

  py::class_<DegeneracyResult>(m, "DegeneracyResult")
      .def_readonly("ell0", &DegeneracyResult::ell0)
      .def_readonly("exterior_index", &DegeneracyResult::exterior_index)
      .def_readonly("energy", &DegeneracyResult::energy)
      .def_readonly("mismatch", &DegeneracyResult::mismatch);
  m.def("find_degeneracy_ell", &find_degeneracy_ell, "model"_a, "geometry"_a, "hbar"_a, "interior_index"_a,
        "side"_a, "bracket"_a, "settings"_a = SolverSettings{});

  py::class_<BranchSet>(m, "BranchSet")
      .def_readonly("ell_grid", &BranchSet::ell_grid)
      .def_readonly("k", &BranchSet::k)
      .def_readonly("hbar", &BranchSet::hbar)
      .def_readonly("spacing", &BranchSet::spacing)
      .def_readonly("energies", &BranchSet::energies)
      .def_readonly("labels", &BranchSet::labels)
      .def_readonly("tags", &BranchSet::tags)
      .def_readonly("classification", &BranchSet::classification)
      .def_readonly("interior", &BranchSet::interior);

  py::class_<CrossingReport>(m, "CrossingReport")
      .def_readonly("ell_star", &CrossingReport::ell_star)
      .def_readonly("gap", &CrossingReport::gap)
      .def_readonly("side", &CrossingReport::side)
      .def_readonly("interior_index", &CrossingReport::interior_index)
      .def_readonly("interior_energy", &CrossingReport::interior_energy)
      .def_readonly("width", &CrossingReport::width)
      .def_readonly("isolated", &CrossingReport::isolated)
      .def_readonly("bracket", &CrossingReport::bracket);

  m.def(
      "sweep",
      [](const PotentialModel& model, const Geometry& geometry, double hbar, Interval ell_range, std::size_t n_ell,
         std::size_t k, const SolverSettings& settings, bool classify, unsigned jobs) {
        py::gil_scoped_release release;
        auto b = sweep_eigenvalues(model, geometry, hbar, ell_range, n_ell, k, settings, jobs);
        if (classify) classify_branches(b, model, settings, jobs);
        return b;
      },
      "model"_a, "geometry"_a, "hbar"_a, "ell_range"_a, "n_ell"_a, "k"_a, "settings"_a = SolverSettings{},
      "classify"_a = true, "jobs"_a = default_jobs());
  m.def(
      "crossings",
      [](const PotentialModel& model, const Geometry& geometry, const BranchSet& b,
         const SolverSettings& settings) {
        py::gil_scoped_release release;
        std::vector<CrossingReport> out;
        for (const auto& c : detect_avoided_crossings(b)) {
          out.push_back(refine_gap(model, geometry, b.hbar, c, b.spacing, b.interior, settings));
        }
        return out;
      },
      "model"_a, "geometry"_a, "branches"_a, "settings"_a = SolverSettings{});
  m.def("minimize_gap", [](const std::function<double(double)>& gap, Interval bracket) {
    const auto r = minimize_gap(gap, bracket);
    return py::make_tuple(r.ell, r.gap);
  }, "gap"_a, "bracket"_a);

  m.def("action_integral", &action_integral, "model"_a, "energy"_a, "x_from"_a, "x_to"_a);
  m.def("quantization_residual", &quantization_residual, "model"_a, "geometry"_a, "hbar"_a, "energy"_a, "side"_a,
        "n"_a);
  m.def("predict_exterior_eigenvalue", &predict_exterior_eigenvalue, "model"_a, "geometry"_a, "hbar"_a, "side"_a,
        "n"_a, "delta"_a = -1.0);
  m.def("asymptotic_exterior_eigenvalue", &asymptotic_exterior_eigenvalue, "model"_a, "hbar"_a, "ell"_a, "side"_a,
        "m"_a);

  py::class_<TunnelingEstimate>(m, "TunnelingEstimate")
      .def_readonly("t_bound", &TunnelingEstimate::t_bound)
      .def_readonly("r", &TunnelingEstimate::r)
      .def_readonly("delta", &TunnelingEstimate::delta)
      .def_readonly("phi_prime_minus", &TunnelingEstimate::phi_prime_minus)
      .def_readonly("phi_prime_plus", &TunnelingEstimate::phi_prime_plus)
      .def_readonly("energy", &TunnelingEstimate::energy)
      .def_readonly("ell", &TunnelingEstimate::ell);
  m.def("tunneling_surrogate", &tunneling_surrogate, "model"_a, "geometry"_a, "hbar"_a, "interior_index"_a = 0,
        "settings"_a = SolverSettings{});

  py::class_<ScalingStudy>(m, "ScalingStudy")
      .def_readonly("observable", &ScalingStudy::observable)
      .def_readonly("hbar_values", &ScalingStudy::hbar_values)
      .def_readonly("values", &ScalingStudy::values)
      .def_readonly("fitted_slope", &ScalingStudy::fitted_slope)
      .def_readonly("r_squared", &ScalingStudy::r_squared)
      .def_readonly("agmon_reference", &ScalingStudy::agmon_reference)
      .def_readonly("slope_ratio", &ScalingStudy::slope_ratio);
  m.def(
      "scaling_study",
      [](const PotentialModel& model, const Geometry& geometry, Observable observable, std::vector<double> hbars,
         std::size_t interior_index, unsigned jobs) {
        py::gil_scoped_release release;
        return run_scaling_study(model, geometry, observable, std::move(hbars), interior_index, {}, {}, jobs);
      },
      "model"_a, "geometry"_a, "observable"_a, "hbar_values"_a, "interior_index"_a = 0, "jobs"_a = default_jobs());

  py::class_<ResonanceRow>(m, "ResonanceRow")
      .def_readonly("level", &ResonanceRow::level)
      .def_readonly("well_mass", &ResonanceRow::well_mass)
      .def_readonly("interior_energy", &ResonanceRow::interior_energy)
      .def_readonly("resonance_energy", &ResonanceRow::resonance_energy)
      .def_readonly("gap_left", &ResonanceRow::gap_left)
      .def_readonly("gap_right", &ResonanceRow::gap_right)
      .def_readonly("t_bound", &ResonanceRow::t_bound)
      .def_readonly("d_minus", &ResonanceRow::d_minus)
      .def_readonly("d_plus", &ResonanceRow::d_plus)
      .def_readonly("width_order", &ResonanceRow::width_order)
      .def_readonly("larger_gap_side", &ResonanceRow::larger_gap_side);
  py::class_<ResonanceReport>(m, "ResonanceReport")
      .def_readonly("hbar", &ResonanceReport::hbar)
      .def_readonly("energy_ceiling", &ResonanceReport::energy_ceiling)
      .def_readonly("rows", &ResonanceReport::rows);
  m.def(
      "resonance_report",
      [](const PotentialModel& model, const Geometry& geometry, double hbar, std::size_t max_levels,
         unsigned jobs) {
        py::gil_scoped_release release;
        return resonance_report(model, geometry, hbar, max_levels, {}, {}, jobs);
      },
      "model"_a, "geometry"_a, "hbar"_a, "max_levels"_a = 4, "jobs"_a = default_jobs());

  // Config-driven entry points, same tables the command-line tool writes.
  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("ell", &RunConfig::ell)
      .def_readonly("hbar", &RunConfig::hbar)
      .def_readonly("k", &RunConfig::k)
      .def("to_text", &to_text)
      .def_property_readonly("hash", &config_hash)
      .def_property_readonly("model", &build_model)
      .def_property_readonly("geometry", [](const RunConfig& c) { return build_geometry(c, build_model(c)); });
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, "text"_a);
  m.def("command_names", [] {
    std::vector<std::string> out;
    for (auto name : command_names()) out.emplace_back(name);
    return out;
  });
  m.def(
      "compute_command",
      [](const RunConfig& config, const std::string& command, unsigned jobs) {
        std::vector<std::pair<std::string, CsvTable>> tables;
        {
          py::gil_scoped_release release;
          tables = compute_command(config, command, jobs);
        }
        py::dict out;
        for (const auto& [name, table] : tables) {
          out[py::str(name)] = py::make_tuple(table.columns, table.rows);
        }
        return out;
      },
      "config"_a, "command"_a, "jobs"_a = 1);
  m.def(
      "run_command",
      [](const RunConfig& config, const std::string& command, const std::filesystem::path& out_dir, unsigned jobs) {
        py::gil_scoped_release release;
        return run_command(config, command, out_dir, jobs);
      },
      "config"_a, "command"_a, "out_dir"_a, "jobs"_a = 1);
}
