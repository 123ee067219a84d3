#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "csv_reader.hpp"
#include "doctest.h"
#include "resbox/cli.hpp"
#include "resbox/errors.hpp"

using namespace resbox;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::string config_path(const char* name) { return std::string(RESBOX_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("resbox_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(RESBOX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run(const std::string& command, const std::string& config, const fs::path& out) {
  return run_cli(command + " --config " + config + " --out " + out.string() + " --jobs 1");
}

csv::Table read_table(const fs::path& path) { return csv::parse(csv::slurp(path.string()), csv::text_columns()); }

}  // namespace

TEST_CASE("spectrum of the free well matches (j pi / 2)^2") {
  const auto out = scratch("spectrum");
  REQUIRE(run("spectrum", config_path("free_well.ini"), out) == 0);
  const auto t = read_table(out / "spectrum.csv");
  REQUIRE(t.rows.size() == 5);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(t.number(j, "index") == j);
    const double exact = std::pow((j + 1) * kPi / 2.0, 2);
    CHECK(t.number(j, "energy") == doctest::Approx(exact).epsilon(1e-8));
    CHECK(t.number(j, "raw") < t.number(j, "energy"));
  }
}

TEST_CASE("decoupled spectra of the free well") {
  const auto out = scratch("decoupled");
  REQUIRE(run("decoupled", config_path("free_well.ini"), out) == 0);
  const auto t = read_table(out / "decoupled.csv");
  REQUIRE(t.rows.size() == 15);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& family = t.rows[r][t.column("family")];
    const double j = t.number(r, "index") + 1.0;
    // Interior length 1, each exterior length 1/2.
    const double length = family == "interior" ? 1.0 : 0.5;
    CHECK(t.number(r, "energy") == doctest::Approx(std::pow(j * kPi / length, 2)).epsilon(5e-8));
  }
}

TEST_CASE("header carries the version and the config hash") {
  const auto out = scratch("header");
  REQUIRE(run("agmon", config_path("canonical.ini"), out) == 0);
  const auto text = csv::slurp((out / "agmon.csv").string());
  const auto config = parse_config(csv::slurp(config_path("canonical.ini")));
  const std::string first = text.substr(0, text.find('\n'));
  CHECK(first == "# resonance-box v" + std::string(kVersion) + " config-hash=" + config_hash(config));
  const auto t = csv::parse(text, csv::text_columns());
  REQUIRE(t.rows.size() == 1);
  CHECK(t.number(0, "d_minus") > t.number(0, "d_plus"));
  CHECK(t.number(0, "d_star") == t.number(0, "d_plus"));
}

TEST_CASE("crossings on the canonical config cover both sides of the ground level") {
  const auto out = scratch("crossings");
  REQUIRE(run("crossings", config_path("canonical.ini"), out) == 0);
  const auto t = read_table(out / "crossings.csv");
  int left = 0;
  int right = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(t.number(r, "gap") > 0.0);
    if (t.number(r, "interior_index") != 0.0) continue;
    const auto& side = t.rows[r][t.column("side")];
    left += side == "left";
    right += side == "right";
  }
  CHECK(left >= 1);
  CHECK(right >= 1);
  CHECK(left + right >= 2);
}

TEST_CASE("reruns are byte-identical and every output passes the strict reader") {
  for (const char* command : {"spectrum", "decoupled", "agmon", "wkb", "report"}) {
    const auto a = scratch(std::string(command) + "_a");
    const auto b = scratch(std::string(command) + "_b");
    REQUIRE(run(command, config_path("canonical.ini"), a) == 0);
    REQUIRE(run(command, config_path("canonical.ini"), b) == 0);
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto name = entry.path().filename();
      const auto first = csv::slurp(entry.path().string());
      CHECK_MESSAGE(first == csv::slurp((b / name).string()), command);
      CHECK_NOTHROW(csv::parse(first, csv::text_columns()));
    }
  }
}

TEST_CASE("free well sweep has no interior-like tags and no crossings") {
  const auto out = scratch("free_sweep");
  REQUIRE(run("sweep", config_path("free_well.ini"), out) == 0);
  REQUIRE(run("crossings", config_path("free_well.ini"), out) == 0);
  const auto sweep = read_table(out / "sweep.csv");
  CHECK(sweep.rows.size() == 21 * 3);
  for (const auto& row : sweep.rows) CHECK(row[sweep.column("classification")] != "interior_like");
  CHECK(read_table(out / "crossings.csv").rows.empty());
}

TEST_CASE("exit codes") {
  const auto out = scratch("codes");
  CHECK(run("spectrum", config_path("missing.ini"), out) == 2);

  const auto bad = out / "bad.ini";
  fs::create_directories(out);
  std::ofstream(bad) << "[potential]\nkind = infinite_well_zero\n[geometry]\nell = 1\n[numerics]\nhbar = -1\n";
  CHECK(run("spectrum", bad.string(), out) == 2);

  // No turning point beyond a flat split.
  CHECK(run("wkb", config_path("free_well.ini"), out) == 5);
  CHECK(run("scaling", config_path("free_well.ini"), out) == 5);

  CHECK(run_cli("nonsense --config " + config_path("free_well.ini")) != 0);
  CHECK(run_cli("spectrum") != 0);
  CHECK(run_cli("--version") == 0);
}

TEST_CASE("exception classes map onto exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DomainError("x")) == 3);
  CHECK(exit_code_for(NumericalError("x")) == 4);
  CHECK(exit_code_for(SearchError("x")) == 5);
  CHECK(exit_code_for(RegimeError("x")) == 5);
  CHECK(exit_code_for(RefinementError("x")) == 5);
  CHECK(exit_code_for(StudyError("x")) == 5);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("command list") {
  CHECK(command_names().size() == 8);
  CHECK_THROWS_AS(compute_command(parse_config(csv::slurp(config_path("free_well.ini"))), "plot"), ConfigError);
}

// Properties

TEST_CASE("property: strict reader rejects malformed tables") {
  const std::string good = "# c\na,b\n1,2\n";
  CHECK_NOTHROW(csv::parse(good, {}));
  CHECK_THROWS(csv::parse("# c\na,b\n1,2", {}));
  CHECK_THROWS(csv::parse("# c\na,b\n1\n", {}));
  CHECK_THROWS(csv::parse("# c\na,b\n1,x\n", {}));
  CHECK_THROWS(csv::parse("# c\na,b\r\n1,2\r\n", {}));
  CHECK_THROWS(csv::parse("# only comments\n", {}));
}

TEST_CASE("property: timestamp is opt-in") {
  const auto config = parse_config(csv::slurp(config_path("free_well.ini")));
  const auto plain = output_header(config);
  const auto stamped = output_header(config, true);
  CHECK(stamped.size() == plain.size() + 1);
  for (const auto& line : plain) CHECK(line.find("generated") == std::string::npos);
  CHECK(stamped.back().rfind("# generated ", 0) == 0);
}
