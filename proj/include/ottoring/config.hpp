#pragma once

// Flat key-value configuration: file -> environment -> command line, later
// sources override earlier ones. Keys are named after EngineConfig fields.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ottoring/engine.hpp"

namespace ottoring {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered key->string map plus typed accessors with defaults.
class KeyValueConfig {
 public:
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double(key, it->second);
  }

  long get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      size_t used = 0;
      const long v = std::stol(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw config_error("config: key '" + key + "' is not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error("config: key '" + key + "' is not a boolean: " + v);
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw config_error("config: key '" + key + "' is an empty list");
    return out;
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  static double parse_double(const std::string& key, const std::string& text) {
    try {
      size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw config_error("config: key '" + key + "' is not a number: " + text);
    }
  }

  std::map<std::string, std::string> values_;
};

/// key = value lines; '#' starts a comment; blank lines ignored.
inline void load_config_file(KeyValueConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot read " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const size_t b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: " + path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw config_error("config: " + path + ":" + std::to_string(lineno) + ": empty key");
    cfg.set(key, value);
  }
}

/// OTTORING_<KEY> environment variables override file values.
inline void apply_environment(KeyValueConfig& cfg, const std::vector<std::string>& known_keys,
                              const std::string& prefix = "OTTORING_") {
  for (const std::string& key : known_keys) {
    std::string var = prefix;
    for (char c : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(var.c_str())) cfg.set(key, v);
  }
}

/// The configuration surface shared by every experiment.
inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "n_hot", "n_cold", "omega_h", "omega_c", "alpha", "gamma", "temp_hot", "temp_cold",
      "temp_wm", "tau", "delta", "n_cycles", "n_sites", "adiabat_mode", "tau_ad", "dt",
      "tol_symp", "record_bath_mi", "record_relative_entropy", "use_cached_propagators",
      "trace_stride", "snapshot_times", "n_values", "tau_values", "alpha_values",
      "tau_lo", "tau_hi", "tau_resolution"};
  return keys;
}

inline EngineConfig engine_config_from(const KeyValueConfig& kv) {
  EngineConfig cfg;
  cfg.n_hot = static_cast<int>(kv.get_int("n_hot", cfg.n_hot));
  cfg.n_cold = static_cast<int>(kv.get_int("n_cold", cfg.n_hot));
  cfg.omega_h = kv.get_double("omega_h", cfg.omega_h);
  cfg.omega_c = kv.get_double("omega_c", cfg.omega_c);
  cfg.alpha = kv.get_double("alpha", cfg.alpha);
  cfg.temp_hot = kv.get_double("temp_hot", cfg.temp_hot);
  cfg.temp_cold = kv.get_double("temp_cold", cfg.temp_cold);
  cfg.tau = kv.get_double("tau", cfg.tau);
  cfg.n_cycles = static_cast<int>(kv.get_int("n_cycles", cfg.n_cycles));
  cfg.n_sites = static_cast<int>(kv.get_int("n_sites", cfg.n_sites));
  cfg.tau_ad = kv.get_double("tau_ad", cfg.tau_ad);
  cfg.controls.dt = kv.get_double("dt", cfg.controls.dt);
  cfg.controls.tol_symp = kv.get_double("tol_symp", cfg.controls.tol_symp);
  cfg.record_bath_mi = kv.get_bool("record_bath_mi", cfg.record_bath_mi);
  cfg.record_relative_entropy = kv.get_bool("record_relative_entropy", cfg.record_relative_entropy);
  cfg.use_cached_propagators = kv.get_bool("use_cached_propagators", cfg.use_cached_propagators);
  if (kv.has("gamma")) cfg.gamma_override = kv.get_double("gamma", 0);
  if (kv.has("delta")) cfg.delta_override = kv.get_double("delta", 0);
  if (kv.has("temp_wm")) cfg.temp_wm_override = kv.get_double("temp_wm", 0);
  const std::string mode = kv.get_string("adiabat_mode", "instantaneous");
  if (mode == "instantaneous")
    cfg.adiabat_mode = AdiabatMode::instantaneous;
  else if (mode == "counterdiabatic")
    cfg.adiabat_mode = AdiabatMode::counterdiabatic;
  else
    throw config_error("config: unknown adiabat_mode '" + mode + "'");
  return cfg;
}

/// The resolved configuration as written to the JSON sidecar.
inline nlohmann::json resolved_config_json(const EngineConfig& cfg) {
  nlohmann::json j;
  j["n_hot"] = cfg.n_hot;
  j["n_cold"] = cfg.n_cold;
  j["omega_h"] = cfg.omega_h;
  j["omega_c"] = cfg.omega_c;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma();
  j["temp_hot"] = cfg.temp_hot;
  j["temp_cold"] = cfg.temp_cold;
  j["temp_wm"] = cfg.temp_wm();
  j["tau"] = cfg.tau;
  j["delta"] = cfg.delta();
  j["n_cycles"] = cfg.n_cycles;
  j["n_sites"] = cfg.n_sites;
  j["adiabat_mode"] =
      cfg.adiabat_mode == AdiabatMode::instantaneous ? "instantaneous" : "counterdiabatic";
  j["tau_ad"] = cfg.tau_ad;
  j["dt"] = cfg.controls.dt;
  j["tol_symp"] = cfg.controls.tol_symp;
  j["record_bath_mi"] = cfg.record_bath_mi;
  j["record_relative_entropy"] = cfg.record_relative_entropy;
  j["use_cached_propagators"] = cfg.use_cached_propagators;
  return j;
}

}  // namespace ottoring
