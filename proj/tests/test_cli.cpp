#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ottoring/experiments.hpp"

using namespace ottoring;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "ottoring_test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Path of the built command-line binary, exported by the test harness.
const char* cli_path() { return std::getenv("OTTORING_CLI_PATH"); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("number formatting uses 12 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-6.2e-3) == "-0.0062");
  CHECK(format_number(4.082988165073596) == "4.08298816507");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(1e20) == "1e+20");
}

TEST_CASE("csv writer emits header, comma delimiters and LF endings") {
  const fs::path path = temp_dir() / "w.csv";
  {
    CsvWriter csv(path.string(), {"a", "b", "c"});
    csv.row({1.5, static_cast<long>(7), std::string("x")});
    csv.row({-0.25, static_cast<long>(-1), std::string("y")});
    CHECK_THROWS_AS(csv.row({1.0}), std::invalid_argument);
  }
  CHECK(read_file(path) == "a,b,c\n1.5,7,x\n-0.25,-1,y\n");
}

TEST_CASE("key-value config file parsing") {
  const fs::path path = temp_dir() / "c.cfg";
  write_file(path, "# engine setup\nn_hot = 30\ntau=100.0  # inline comment\n"
                   "\nadiabat_mode = counterdiabatic\nalpha_values = 0.05,0.1,0.2\n");
  KeyValueConfig kv;
  load_config_file(kv, path.string());
  CHECK(kv.get_int("n_hot", 0) == 30);
  CHECK(kv.get_double("tau", 0) == 100.0);
  CHECK(kv.get_string("adiabat_mode", "") == "counterdiabatic");
  CHECK(kv.get_double_list("alpha_values", {}) == std::vector<double>{0.05, 0.1, 0.2});
  CHECK(kv.get_double("missing", 7.5) == 7.5);
  CHECK_THROWS_AS(load_config_file(kv, (temp_dir() / "nope.cfg").string()), config_error);
  write_file(path, "just a line\n");
  CHECK_THROWS_AS(load_config_file(kv, path.string()), config_error);
}

TEST_CASE("typed accessors reject malformed values") {
  KeyValueConfig kv;
  kv.set("x", "abc");
  CHECK_THROWS_AS(kv.get_double("x", 0), config_error);
  CHECK_THROWS_AS(kv.get_int("x", 0), config_error);
  CHECK_THROWS_AS(kv.get_bool("x", false), config_error);
  kv.set("flag", "true");
  CHECK(kv.get_bool("flag", false));
  kv.set("flag", "off");
  CHECK_FALSE(kv.get_bool("flag", true));
  kv.set("n", "3.5");
  CHECK_THROWS_AS(kv.get_int("n", 0), config_error);
}

TEST_CASE("engine config construction honours overrides and defaults") {
  KeyValueConfig kv;
  kv.set("n_hot", "12");
  kv.set("tau", "20");
  kv.set("alpha", "0.15");
  EngineConfig cfg = engine_config_from(kv);
  CHECK(cfg.n_hot == 12);
  CHECK(cfg.n_cold == 12);  // follows n_hot unless given
  CHECK(cfg.gamma() == 0.15);
  CHECK(cfg.delta() == doctest::Approx(2.0));
  kv.set("n_cold", "8");
  kv.set("gamma", "0.01");
  kv.set("delta", "3");
  kv.set("temp_wm", "1.25");
  cfg = engine_config_from(kv);
  CHECK(cfg.n_cold == 8);
  CHECK(cfg.gamma() == 0.01);
  CHECK(cfg.delta() == 3.0);
  CHECK(cfg.temp_wm() == 1.25);
  kv.set("adiabat_mode", "sideways");
  CHECK_THROWS_AS(engine_config_from(kv), config_error);
}

TEST_CASE("environment variables override file values") {
  KeyValueConfig kv;
  kv.set("tau", "100");
  setenv("OTTORING_TAU", "25", 1);
  apply_environment(kv, known_config_keys());
  unsetenv("OTTORING_TAU");
  CHECK(kv.get_double("tau", 0) == 25.0);
}

TEST_CASE("json sidecar echoes the resolved configuration") {
  EngineConfig cfg;
  cfg.gamma_override = 0.07;
  const nlohmann::json j = resolved_config_json(cfg);
  CHECK(j["gamma"] == 0.07);
  CHECK(j["delta"] == 10.0);
  CHECK(j["adiabat_mode"] == "instantaneous");
  const fs::path path = temp_dir() / "sidecar.json";
  write_json_sidecar(path.string(), j);
  const nlohmann::json back = nlohmann::json::parse(read_file(path));
  CHECK(back == j);
}

TEST_CASE("thermalize experiment writes the expected artifacts") {
  const fs::path out = temp_dir() / "thermalize_small";
  fs::create_directories(out);
  KeyValueConfig kv;
  kv.set("n_hot", "6");
  kv.set("tau", "4");
  kv.set("delta", "1");
  kv.set("dt", "0.002");
  kv.set("trace_stride", "500");
  run_experiment(ExperimentManifest("thermalize", kv, out.string(), 1));
  const std::string csv = read_file(out / "thermalize.csv");
  CHECK(csv.rfind("t,T_eff,MI_wm_bath,MI_wm_node1,MI_node1_rest,athermality\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5);  // header + ceil(4/1)+1 samples
  // first sample: no correlations yet
  std::stringstream ss(csv);
  std::string header, first;
  std::getline(ss, header);
  std::getline(ss, first);
  CHECK(first.rfind("0,0.5,", 0) == 0);
  CHECK(nlohmann::json::parse(read_file(out / "thermalize.json"))["experiment"] == "thermalize");
}

TEST_CASE("otto experiment emits one row per cycle plus the sidecar") {
  const fs::path out = temp_dir() / "otto_small";
  fs::create_directories(out);
  KeyValueConfig kv;
  kv.set("n_hot", "6");
  kv.set("tau", "4");
  kv.set("n_cycles", "2");
  kv.set("dt", "0.002");
  run_experiment(ExperimentManifest("otto", kv, out.string(), 1));
  const std::string csv = read_file(out / "cycles.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("cycle,W_ih,W_ic,", 0) == 0);
  CHECK_THROWS_AS(run_experiment(ExperimentManifest("nonsense", kv, out.string(), 1)),
                  config_error);
}

TEST_CASE("cone experiment sweeps the grid, optionally in parallel") {
  const fs::path out = temp_dir() / "cone_small";
  fs::create_directories(out);
  KeyValueConfig kv;
  kv.set("dt", "0.005");
  kv.set("n_values", "4,6");
  kv.set("tau_values", "2,4");
  run_experiment(ExperimentManifest("cone", kv, out.string(), 2));
  const std::string csv = read_file(out / "cone.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4);
  CHECK(csv.rfind("N,tau,T_eff_final\n4,2,", 0) == 0);
}

TEST_CASE("command line interface end to end") {
  if (!cli_path()) {
    MESSAGE("OTTORING_CLI_PATH not set; skipping binary tests");
    return;
  }
  const fs::path out = temp_dir() / "cli_run";
  fs::remove_all(out);
  const std::string base =
      "otto --out " + out.string() + " --n_hot 6 --tau 4 --n_cycles 2 --dt 0.002";
  CHECK(run_cli(base) == 0);
  CHECK(fs::exists(out / "cycles.csv"));
  CHECK(fs::exists(out / "cycles.json"));
  // determinism: a second identical run reproduces the bytes
  const std::string first = read_file(out / "cycles.csv");
  CHECK(run_cli(base) == 0);
  CHECK(read_file(out / "cycles.csv") == first);
  // config errors exit with 2
  CHECK(run_cli("otto --out " + out.string() + " --no_such_key 1") == 2);
  CHECK(run_cli("otto --config /nonexistent.cfg") == 2);
  CHECK(run_cli("otto --out " + out.string() + " --tau abc") == 2);
  CHECK(run_cli("") == 2);  // missing subcommand
  // config file + env override behave as documented
  const fs::path cfg_file = temp_dir() / "cli.cfg";
  write_file(cfg_file, "n_hot = 6\ntau = 4\nn_cycles = 1\ndt = 0.002\n");
  const std::string with_env = "OTTORING_N_CYCLES=2 " + std::string(cli_path()) + " otto --config " +
                               cfg_file.string() + " --out " + out.string() + " >/dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(with_env.c_str())) == 0);
  const std::string csv = read_file(out / "cycles.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // env raised n_cycles to 2
}
