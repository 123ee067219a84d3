#include <charconv>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>

#include "csv_reader.hpp"
#include "doctest.h"
#include "resbox/agmon.hpp"
#include "resbox/config.hpp"

using namespace resbox;

namespace {

const std::string kMinimal =
    "[potential]\n"
    "kind = infinite_well_zero\n"
    "\n"
    "[geometry]\n"
    "ell = 2\n"
    "\n"
    "[numerics]\n"
    "hbar = 1\n";

std::string config_path(const char* name) { return std::string(RESBOX_CONFIG_DIR) + "/" + name; }

// Reference FNV-1a, 64 bit.
std::string fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("minimal free config takes every default") {
  const auto c = parse_config(kMinimal);
  RunConfig expected;
  expected.ell = 2.0;
  expected.hbar = 1.0;
  expected.ell_min = 2.0;
  expected.ell_max = 4.0;
  CHECK(c == expected);
  CHECK(c.kind == PotentialKind::infinite_well_zero);
  CHECK(c.k == 10);
  CHECK(c.hbar_list == std::vector<double>{0.14, 0.12, 0.10, 0.08});
  CHECK(c.richardson);
  CHECK(c.split_fraction == kOuterFraction);
}

TEST_CASE("negative hbar is rejected with its line") {
  const auto message = error_of(replace(kMinimal, "hbar = 1", "hbar = -1"));
  CHECK(message.find("line 8") != std::string::npos);
  CHECK(message.find("hbar") != std::string::npos);
}

TEST_CASE("shipped configs round-trip byte for byte") {
  for (const char* name : {"canonical.ini", "free_well.ini"}) {
    const auto text = csv::slurp(config_path(name));
    const auto c = parse_config(text);
    CHECK(to_text(c) == text);
    CHECK(parse_config(to_text(c)) == c);
    CHECK(config_hash(c) == fnv1a(text));
  }
}

TEST_CASE("canonical config builds the canonical model and split") {
  const auto c = parse_config(csv::slurp(config_path("canonical.ini")));
  const auto m = build_model(c);
  CHECK(m.v0() == doctest::Approx(PotentialModel::canonical().v0()).epsilon(1e-14));
  const auto g = build_geometry(c, m);
  const auto expected = agmon_geometry(m, 0.98, 0.98, 6.0);
  CHECK(g.omega_minus == expected.omega_minus);
  CHECK(g.omega_plus == expected.omega_plus);
  CHECK(sweep_range(c).lo == 4.0);
  CHECK(sweep_range(c).hi == 8.0);
  CHECK(build_settings(c).points_per_wavelength == 100.0);
}

TEST_CASE("geometry without a well falls back to half the box") {
  const auto c = parse_config(kMinimal);
  const auto g = build_geometry(c, build_model(c));
  CHECK(g.omega_minus == -1.0);
  CHECK(g.omega_plus == 1.0);
}

TEST_CASE("errors name the offending line") {
  SUBCASE("unknown key") {
    const auto m = error_of(replace(kMinimal, "ell = 2\n", "ell = 2\nwidth = 3\n"));
    CHECK(m.find("line 6") != std::string::npos);
    CHECK(m.find("width") != std::string::npos);
  }
  SUBCASE("non-numeric value") {
    const auto m = error_of(replace(kMinimal, "ell = 2", "ell = two"));
    CHECK(m.find("line 5") != std::string::npos);
  }
  SUBCASE("duplicate key") {
    const auto m = error_of(replace(kMinimal, "hbar = 1\n", "hbar = 1\nhbar = 2\n"));
    CHECK(m.find("line 9") != std::string::npos);
  }
  SUBCASE("missing required key") {
    const auto m = error_of(replace(kMinimal, "ell = 2\n", ""));
    CHECK(m.find("line 4") != std::string::npos);
    CHECK(m.find("ell") != std::string::npos);
  }
  SUBCASE("unknown section") {
    const auto m = error_of(kMinimal + "[plot]\ncolor = red\n");
    CHECK(m.find("line 9") != std::string::npos);
  }
  SUBCASE("split fraction next to explicit split points") {
    const auto m = error_of(replace(kMinimal, "ell = 2\n",
                                    "omega_minus = -0.5\nomega_plus = 0.5\nsplit_fraction = 0.5\nell = 2\n"));
    CHECK(m.find("line 7") != std::string::npos);
  }
}

TEST_CASE("other invalid values") {
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "kind = infinite_well_zero", "kind = harmonic")), ConfigError);
  CHECK_THROWS_AS(parse_config(kMinimal + "[sweep]\nell_min = 5\nell_max = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(kMinimal + "[study]\nside = up\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(kMinimal + "[study]\nobservable = width\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "hbar = 1\n", "hbar = 1\nrichardson = yes\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "hbar = 1\n", "hbar = 1\nk = -3\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "hbar = 1\n", "hbar = 1\npoints_per_wavelength = 5\n")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[geometry]\nell = 2\n[numerics]\nhbar = 1\n"), ConfigError);
}

TEST_CASE("number formatting is the shortest round-trip form") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-12) == "1e-12");
  CHECK(format_number(6.0) == "6");
  CHECK(format_number(-1.6) == "-1.6");
}

// Properties

TEST_CASE("property: formatted numbers read back exactly") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-300, 300);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(mantissa(rng), exponent(rng));
    const auto s = format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("property: random valid configs round-trip") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int i = 0; i < 100; ++i) {
    RunConfig c;
    c.kind = PotentialKind::two_gaussian_barriers;
    c.params = TwoGaussianParams{u(rng), u(rng), -1.0 - u(rng), 1.0 + u(rng), u(rng), u(rng)};
    c.omega_minus = -0.1 - u(rng) / 10.0;
    c.omega_plus = 0.1 + u(rng) / 10.0;
    c.ell = 5.0 + u(rng);
    c.ell_min = c.ell;
    c.ell_max = c.ell + u(rng);
    c.hbar = u(rng) / 10.0;
    c.hbar_list = {u(rng), u(rng) / 2.0, u(rng) / 3.0, u(rng) / 4.0};
    c.seed = rng();
    c.k = 1 + rng() % 20;
    c.n_ell = 2 + rng() % 500;
    c.side = rng() % 2 ? Side::left : Side::right;
    c.observable = rng() % 2 ? Observable::t_bound : Observable::gap_left;
    const auto text = to_text(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(to_text(back) == text);
    CHECK(config_hash(back) == fnv1a(text));
  }
}
