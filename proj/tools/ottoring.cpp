// Command-line front end for the simulator experiments.
//
//   ottoring <experiment> --config <path> [--out <dir>] [--workers <n>] [--key value ...]
//
// Precedence (lowest to highest): built-in defaults, config file,
// OTTORING_* environment variables, command-line --key value overrides.
// Exit codes: 0 success, 2 configuration error, 3 numerical-accuracy error.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ottoring/experiments.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian phase-space simulator of a cyclic heat engine with finite ring baths"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int workers = 1;
  std::vector<std::string> overrides;

  for (const char* name : {"thermalize", "cone", "otto", "correlations", "scaling"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--out", out_dir, "output directory for CSV/JSON artifacts");
    sub->add_option("--workers", workers, "max concurrent sweep points")
        ->check(CLI::PositiveNumber);
    sub->allow_extras();  // --key value pairs named after config keys
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    ottoring::KeyValueConfig kv;
    if (!config_path.empty()) ottoring::load_config_file(kv, config_path);
    ottoring::apply_environment(kv, ottoring::known_config_keys());

    std::vector<std::string> extras = sub->remaining();
    if (extras.size() % 2 != 0)
      throw ottoring::config_error("overrides must come in --key value pairs");
    for (size_t i = 0; i < extras.size(); i += 2) {
      std::string key = extras[i];
      if (key.rfind("--", 0) != 0)
        throw ottoring::config_error("expected --key, got '" + key + "'");
      key.erase(0, 2);
      const auto& known = ottoring::known_config_keys();
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ottoring::config_error("unknown config key '" + key + "'");
      kv.set(key, extras[i + 1]);
    }

    std::filesystem::create_directories(out_dir);
    ottoring::ExperimentManifest manifest(sub->get_name(), std::move(kv), out_dir, workers);
    ottoring::run_experiment(manifest);
  } catch (const ottoring::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ottoring::integration_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const ottoring::invalid_state& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumericalError;
  }
  return 0;
}
