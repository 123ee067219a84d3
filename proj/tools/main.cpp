#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "resbox/cli.hpp"
#include "resbox/errors.hpp"

namespace {

unsigned default_jobs() {
  if (const char* env = std::getenv("RESONANCE_BOX_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "resonance-box: ignoring invalid RESONANCE_BOX_JOBS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Box-method resonance analysis for 1D Schrodinger operators"};
  app.set_version_flag("--version", "resonance-box " + std::string(resbox::kVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  unsigned jobs = 0;
  bool timestamp = false;
  for (auto name : resbox::command_names()) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--jobs", jobs, "worker threads (RESONANCE_BOX_JOBS when absent)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--timestamp", timestamp, "add a generation time line to the CSV header");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream file(config_path, std::ios::binary);
    if (!file) throw resbox::ConfigError("cannot read config file '" + config_path + "'");
    std::ostringstream text;
    text << file.rdbuf();
    const auto config = resbox::parse_config(text.str());
    const auto written =
        resbox::run_command(config, command, out_dir, jobs > 0 ? jobs : default_jobs(), timestamp);
    for (const auto& path : written) std::cout << path.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "resonance-box " << command << ": " << e.what() << '\n';
    return resbox::exit_code_for(e);
  }
  return 0;
}
