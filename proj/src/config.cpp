#include "resbox/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <variant>

#include "resbox/agmon.hpp"
#include "resbox/errors.hpp"

namespace resbox {

namespace {

template <class... Ts>
struct overloaded_params : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded_params(Ts...) -> overloaded_params<Ts...>;

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> entries;
};

constexpr std::array<std::string_view, 5> kSections{"potential", "geometry", "numerics", "sweep",
                                                     "study"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

/// Key lookup that marks entries as consumed so leftovers can be reported.
class Reader {
 public:
  Reader(std::string name, Section* section) : name_(std::move(name)), section_(section) {}

  [[nodiscard]] bool present() const { return section_ != nullptr; }
  [[nodiscard]] int header_line() const { return section_ ? section_->line : 0; }

  const Entry* find(const std::string& key) {
    if (!section_) return nullptr;
    auto it = section_->entries.find(key);
    if (it == section_->entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& key) {
    const Entry* e = find(key);
    if (!e) fail(header_line(), "[" + name_ + "] is missing required key '" + key + "'");
    return *e;
  }

  double number(const Entry& e, const std::string& key) {
    double v = 0.0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
      fail(e.line, "'" + key + "' expects a finite number, got '" + e.value + "'");
    }
    return v;
  }

  double number(const std::string& key) { return number(require(key), key); }

  void number(const std::string& key, double& out) {
    if (const Entry* e = find(key)) out = number(*e, key);
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    const Entry* e = find(key);
    if (!e) return;
    Int v{};
    const char* begin = e->value.data();
    const char* end = begin + e->value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
      fail(e->line, "'" + key + "' expects a non-negative integer, got '" + e->value + "'");
    }
    out = v;
  }

  void boolean(const std::string& key, bool& out) {
    const Entry* e = find(key);
    if (!e) return;
    if (e->value == "true") {
      out = true;
    } else if (e->value == "false") {
      out = false;
    } else {
      fail(e->line, "'" + key + "' expects true or false, got '" + e->value + "'");
    }
  }

  void number_list(const std::string& key, std::vector<double>& out) {
    const Entry* e = find(key);
    if (!e) return;
    std::vector<double> values;
    std::string_view rest = e->value;
    while (true) {
      const auto comma = rest.find(',');
      const std::string item(trim(rest.substr(0, comma)));
      values.push_back(number(Entry{item, e->line, true}, key));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    out = std::move(values);
  }

  void check(const Entry* e, bool ok, const std::string& message) {
    if (!ok) fail(e ? e->line : header_line(), message);
  }

  void reject_leftovers() {
    if (!section_) return;
    for (const auto& [key, e] : section_->entries) {
      if (!e.used) fail(e.line, "unknown key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  Section* section_;
};

std::map<std::string, Section> scan(std::string_view text) {
  std::map<std::string, Section> sections;
  Section* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header '" + std::string(line) + "'");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (std::find(kSections.begin(), kSections.end(), name) == kSections.end()) {
        fail(line_no, "unknown section [" + name + "]");
      }
      if (sections.count(name)) fail(line_no, "duplicate section [" + name + "]");
      current = &sections[name];
      current->line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    if (!current) fail(line_no, "key outside of any section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for '" + key + "'");
    if (!current->entries.emplace(key, Entry{value, line_no, false}).second) {
      fail(line_no, "duplicate key '" + key + "'");
    }
  }
  return sections;
}

Reader reader(std::map<std::string, Section>& sections, const std::string& name, bool required) {
  auto it = sections.find(name);
  if (it == sections.end()) {
    if (required) throw ConfigError("config: missing required section [" + name + "]");
    return Reader(name, nullptr);
  }
  return Reader(name, &it->second);
}

void read_potential(Reader& r, RunConfig& c) {
  const Entry& kind = r.require("kind");
  try {
    c.kind = potential_kind_from_string(kind.value);
  } catch (const ConfigError& e) {
    fail(kind.line, e.what());
  }
  switch (c.kind) {
    case PotentialKind::two_gaussian_barriers:
      c.params = TwoGaussianParams{r.number("b_minus"), r.number("b_plus"), r.number("p_minus"),
                                   r.number("p_plus"),  r.number("w_minus"), r.number("w_plus")};
      break;
    case PotentialKind::single_gaussian:
      c.params = SingleGaussianParams{r.number("height"), r.number("center"), r.number("width")};
      break;
    case PotentialKind::square_barriers: {
      SquareBarrierParams p;
      p.b_minus = r.number("b_minus");
      p.b_plus = r.number("b_plus");
      p.left_outer = r.number("left_outer");
      p.left_inner = r.number("left_inner");
      p.right_inner = r.number("right_inner");
      p.right_outer = r.number("right_outer");
      r.number("floor", p.floor);
      c.params = p;
      break;
    }
    case PotentialKind::constant:
      c.params = ConstantParams{r.number("value")};
      break;
    case PotentialKind::infinite_well_zero:
      c.params = ZeroParams{};
      break;
  }
  r.number("tail_exponent", c.tail_exponent);
}

void emit(std::ostringstream& out, std::string_view key, const std::string& value) {
  out << key << " = " << value << '\n';
}

void emit(std::ostringstream& out, std::string_view key, double value) {
  emit(out, key, format_number(value));
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw NumericalError("format_number: conversion failed");
  return std::string(buffer.data(), ptr);
}

RunConfig parse_config(std::string_view text) {
  auto sections = scan(text);
  RunConfig c;

  Reader potential = reader(sections, "potential", true);
  read_potential(potential, c);
  potential.reject_leftovers();

  Reader geometry = reader(sections, "geometry", true);
  const Entry* om = geometry.find("omega_minus");
  const Entry* op = geometry.find("omega_plus");
  const Entry* frac = geometry.find("split_fraction");
  if ((om == nullptr) != (op == nullptr)) {
    fail(om ? om->line : op->line, "omega_minus and omega_plus must be given together");
  }
  if (om && frac) fail(frac->line, "split_fraction conflicts with explicit omega_minus/omega_plus");
  if (om) {
    c.omega_minus = geometry.number(*om, "omega_minus");
    c.omega_plus = geometry.number(*op, "omega_plus");
  }
  if (frac) c.split_fraction = geometry.number(*frac, "split_fraction");
  geometry.check(frac, c.split_fraction > 0.0 && c.split_fraction < 1.0,
                 "split_fraction must lie in (0, 1)");
  const Entry& ell = geometry.require("ell");
  c.ell = geometry.number(ell, "ell");
  geometry.check(&ell, c.ell > 0.0, "ell must be positive");
  geometry.reject_leftovers();

  Reader numerics = reader(sections, "numerics", true);
  const Entry& hbar = numerics.require("hbar");
  c.hbar = numerics.number(hbar, "hbar");
  numerics.check(&hbar, c.hbar > 0.0, "hbar must be positive");
  numerics.number_list("hbar_list", c.hbar_list);
  for (double h : c.hbar_list) {
    numerics.check(numerics.find("hbar_list"), h > 0.0, "hbar_list entries must be positive");
  }
  numerics.number("points_per_wavelength", c.points_per_wavelength);
  numerics.check(numerics.find("points_per_wavelength"),
                 c.points_per_wavelength >= kMinPointsPerWavelength,
                 "points_per_wavelength must be at least " + format_number(kMinPointsPerWavelength));
  numerics.boolean("richardson", c.richardson);
  numerics.number("rel_tol", c.rel_tol);
  numerics.check(numerics.find("rel_tol"), c.rel_tol >= 0.0 && c.rel_tol <= 1e-3,
                 "rel_tol must lie in [0, 1e-3]");
  numerics.integer("seed", c.seed);
  numerics.integer("k", c.k);
  numerics.check(numerics.find("k"), c.k >= 1, "k must be at least 1");
  numerics.number("delta_c", c.delta_c);
  numerics.check(numerics.find("delta_c"), c.delta_c > 0.0, "delta_c must be positive");
  numerics.number("delta_n", c.delta_n);
  numerics.check(numerics.find("delta_n"), c.delta_n >= 0.0, "delta_n must be non-negative");
  numerics.reject_leftovers();

  Reader sweep = reader(sections, "sweep", false);
  double lo = c.ell;
  double hi = 2.0 * c.ell;
  sweep.number("ell_min", lo);
  sweep.number("ell_max", hi);
  c.ell_min = lo;
  c.ell_max = hi;
  sweep.check(sweep.find("ell_max"), lo < hi, "ell_min must be below ell_max");
  sweep.integer("n_ell", c.n_ell);
  sweep.check(sweep.find("n_ell"), c.n_ell >= 2, "n_ell must be at least 2");
  sweep.integer("k", c.sweep_k);
  sweep.check(sweep.find("k"), c.sweep_k >= 2, "sweep k must be at least 2");
  sweep.reject_leftovers();

  Reader study = reader(sections, "study", false);
  if (const Entry* e = study.find("observable")) {
    const auto o = parse_observable(e->value);
    if (!o) fail(e->line, "unknown observable '" + e->value + "' (gap_left, gap_right, t_bound)");
    c.observable = *o;
  }
  study.integer("interior_index", c.interior_index);
  if (const Entry* e = study.find("side")) {
    try {
      c.side = side_from_string(e->value);
    } catch (const ConfigError& err) {
      fail(e->line, err.what());
    }
  }
  study.integer("report_levels", c.report_levels);
  study.integer("wkb_levels", c.wkb_levels);
  study.reject_leftovers();

  // Semantic checks that need the model.
  try {
    const PotentialModel model = build_model(c);
    const Geometry g = build_geometry(c, model);
    if (!(c.ell_min.value() > std::max(-g.omega_minus, g.omega_plus))) {
      throw ConfigError("sweep ell_min must exceed max(|omega_minus|, omega_plus) = " +
                        format_number(std::max(-g.omega_minus, g.omega_plus)));
    }
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "[potential]\n";
  emit(out, "kind", std::string(to_string(c.kind)));
  std::visit(overloaded_params{
                 [&](const TwoGaussianParams& p) {
                   emit(out, "b_minus", p.b_minus);
                   emit(out, "b_plus", p.b_plus);
                   emit(out, "p_minus", p.p_minus);
                   emit(out, "p_plus", p.p_plus);
                   emit(out, "w_minus", p.w_minus);
                   emit(out, "w_plus", p.w_plus);
                 },
                 [&](const SingleGaussianParams& p) {
                   emit(out, "height", p.height);
                   emit(out, "center", p.center);
                   emit(out, "width", p.width);
                 },
                 [&](const SquareBarrierParams& p) {
                   emit(out, "b_minus", p.b_minus);
                   emit(out, "b_plus", p.b_plus);
                   emit(out, "left_outer", p.left_outer);
                   emit(out, "left_inner", p.left_inner);
                   emit(out, "right_inner", p.right_inner);
                   emit(out, "right_outer", p.right_outer);
                   emit(out, "floor", p.floor);
                 },
                 [&](const ConstantParams& p) { emit(out, "value", p.value); },
                 [&](const ZeroParams&) {},
             },
             c.params);
  emit(out, "tail_exponent", c.tail_exponent);

  out << "\n[geometry]\n";
  if (c.omega_minus && c.omega_plus) {
    emit(out, "omega_minus", *c.omega_minus);
    emit(out, "omega_plus", *c.omega_plus);
  } else {
    emit(out, "split_fraction", c.split_fraction);
  }
  emit(out, "ell", c.ell);

  out << "\n[numerics]\n";
  emit(out, "hbar", c.hbar);
  std::string list;
  for (std::size_t i = 0; i < c.hbar_list.size(); ++i) {
    if (i) list += ", ";
    list += format_number(c.hbar_list[i]);
  }
  emit(out, "hbar_list", list);
  emit(out, "points_per_wavelength", c.points_per_wavelength);
  emit(out, "richardson", std::string(c.richardson ? "true" : "false"));
  emit(out, "rel_tol", c.rel_tol);
  emit(out, "seed", std::to_string(c.seed));
  emit(out, "k", std::to_string(c.k));
  emit(out, "delta_c", c.delta_c);
  emit(out, "delta_n", c.delta_n);

  out << "\n[sweep]\n";
  emit(out, "ell_min", c.ell_min.value_or(c.ell));
  emit(out, "ell_max", c.ell_max.value_or(2.0 * c.ell));
  emit(out, "n_ell", std::to_string(c.n_ell));
  emit(out, "k", std::to_string(c.sweep_k));

  out << "\n[study]\n";
  emit(out, "observable", std::string(to_string(c.observable)));
  emit(out, "interior_index", std::to_string(c.interior_index));
  emit(out, "side", std::string(to_string(c.side)));
  emit(out, "report_levels", std::to_string(c.report_levels));
  emit(out, "wkb_levels", std::to_string(c.wkb_levels));
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PotentialModel build_model(const RunConfig& config) {
  return PotentialModel(config.params, config.tail_exponent);
}

Geometry build_geometry(const RunConfig& config, const PotentialModel& model) {
  if (config.omega_minus && config.omega_plus) {
    return make_geometry(*config.omega_minus, *config.omega_plus, config.ell);
  }
  if (model.has_strict_well()) {
    return agmon_geometry(model, config.split_fraction, config.split_fraction, config.ell);
  }
  return make_geometry(-0.5 * config.ell, 0.5 * config.ell, config.ell);
}

SolverSettings build_settings(const RunConfig& config) {
  SolverSettings s;
  s.points_per_wavelength = config.points_per_wavelength;
  s.richardson = config.richardson;
  s.rel_tol = config.rel_tol;
  s.seed = config.seed;
  return s;
}

RefineOptions build_refine_options(const RunConfig& config) {
  RefineOptions o;
  o.delta_c = config.delta_c;
  o.delta_n = config.delta_n;
  return o;
}

Interval sweep_range(const RunConfig& config) {
  return {config.ell_min.value_or(config.ell), config.ell_max.value_or(2.0 * config.ell)};
}

}  // namespace resbox
