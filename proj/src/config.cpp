#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ltswave/harness.hpp"

namespace ltswave::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  if (slash != std::string::npos)
    return parse_number(key, t.substr(0, slash)) / parse_number(key, t.substr(slash + 1));
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config key '" + key + "': '" + text + "' is not a number");
}

std::vector<std::string> split_list(std::string s) {
  s = trim(s);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : parse_number(key, it->second);
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const double v = parse_number(key, it->second);
  if (v != static_cast<double>(static_cast<int>(v)))
    throw std::invalid_argument("config key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : unquote(trim(it->second));
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key,
                                                  const std::vector<double>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) out.push_back(parse_number(key, item));
  return out;
}

std::vector<int> ExperimentConfig::get_ints(const std::string& key, const std::vector<int>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(it->second)) {
    const double v = parse_number(key, item);
    if (v != static_cast<double>(static_cast<int>(v)))
      throw std::invalid_argument("config key '" + key + "' must hold integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string canonical_experiment(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '-', '_');
  static const char* known[] = {"converge", "energy", "spectrum", "cfl_table", "instability", "lshape"};
  for (const char* k : known)
    if (s == k) return s;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = canonical_experiment(experiment);
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  std::map<std::string, std::string> top, own;
  while (std::getline(is, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      std::replace(section.begin(), section.end(), '-', '_');
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      top[key] = value;
    else if (section == cfg.experiment)
      own[key] = value;
  }
  cfg.values = top;
  for (const auto& [k, v] : own) cfg.values[k] = v;
  return cfg;
}

namespace {

void reject_unknown(const ExperimentConfig& cfg, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : cfg.values) {
    if (k == "out") continue;
    bool ok = false;
    for (const char* q : known) ok = ok || k == q;
    if (!ok) throw std::invalid_argument("unknown key '" + k + "' for experiment " + cfg.experiment);
  }
}

StartOperator parse_start(const ExperimentConfig& cfg) {
  const std::string s = cfg.get_string("start", "plain");
  if (s == "plain") return StartOperator::plain;
  if (s == "stabilized") return StartOperator::stabilized;
  throw std::invalid_argument("start must be plain or stabilized");
}

bool parse_bool(const ExperimentConfig& cfg, const std::string& key, bool fallback) {
  const std::string s = cfg.get_string(key, fallback ? "true" : "false");
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config key '" + key + "' must be true or false");
}

}  // namespace

ConvergeParams ConvergeParams::from(const ExperimentConfig& cfg) {
  reject_unknown(cfg, {"h_levels", "p_list", "nu", "T", "fine_lo", "fine_hi", "dt_rule", "dt_value",
                       "reference", "critical_points", "start"});
  ConvergeParams p;
  p.h_levels = cfg.get_doubles("h_levels", p.h_levels);
  p.p_list = cfg.get_ints("p_list", p.p_list);
  p.nu = cfg.get_double("nu", p.nu);
  p.T = cfg.get_double("T", p.T);
  p.fine_lo = cfg.get_double("fine_lo", p.fine_lo);
  p.fine_hi = cfg.get_double("fine_hi", p.fine_hi);
  p.dt_rule = cfg.get_string("dt_rule", p.dt_rule);
  p.dt_value = cfg.get_double("dt_value", p.dt_value);
  p.reference = cfg.get_string("reference", p.reference);
  p.critical_points = cfg.get_int("critical_points", p.critical_points);
  p.start = parse_start(cfg);
  p.validate();
  return p;
}

EnergyParams EnergyParams::from(const ExperimentConfig& cfg) {
  reject_unknown(cfg, {"hc", "p", "nu", "T", "fine_lo", "fine_hi", "dt_rule", "dt_value", "stride",
                       "check_stability"});
  EnergyParams p;
  p.h_c = cfg.get_double("hc", p.h_c);
  p.p = cfg.get_int("p", p.p);
  p.nu = cfg.get_double("nu", p.nu);
  p.T = cfg.get_double("T", p.T);
  p.fine_lo = cfg.get_double("fine_lo", p.fine_lo);
  p.fine_hi = cfg.get_double("fine_hi", p.fine_hi);
  p.dt_rule = cfg.get_string("dt_rule", p.dt_rule);
  p.dt_value = cfg.get_double("dt_value", p.dt_value);
  p.stride = cfg.get_int("stride", p.stride);
  p.check_stability = parse_bool(cfg, "check_stability", p.check_stability);
  p.validate();
  return p;
}

SpectrumParams SpectrumParams::from(const ExperimentConfig& cfg) {
  reject_unknown(cfg, {"hc", "p", "nu", "lo", "hi", "points", "critical_points", "fine_lo", "fine_hi"});
  SpectrumParams p;
  p.h_c = cfg.get_double("hc", p.h_c);
  p.p = cfg.get_int("p", p.p);
  p.nu = cfg.get_double("nu", p.nu);
  p.lo = cfg.get_double("lo", p.lo);
  p.hi = cfg.get_double("hi", p.hi);
  p.points = cfg.get_int("points", p.points);
  p.critical_points = cfg.get_int("critical_points", p.critical_points);
  p.fine_lo = cfg.get_double("fine_lo", p.fine_lo);
  p.fine_hi = cfg.get_double("fine_hi", p.fine_hi);
  p.validate();
  return p;
}

CflTableParams CflTableParams::from(const ExperimentConfig& cfg) {
  reject_unknown(cfg, {"hc", "p", "fine_lo", "fine_hi", "nu", "scan_points", "rel_width"});
  CflTableParams p;
  p.h_c = cfg.get_double("hc", p.h_c);
  p.p = cfg.get_int("p", p.p);
  p.fine_lo = cfg.get_double("fine_lo", p.fine_lo);
  p.fine_hi = cfg.get_double("fine_hi", p.fine_hi);
  p.nu_list = cfg.get_doubles("nu", p.nu_list);
  p.scan_points = cfg.get_int("scan_points", p.scan_points);
  p.rel_width = cfg.get_double("rel_width", p.rel_width);
  p.validate();
  return p;
}

InstabilityParams InstabilityParams::from(const ExperimentConfig& cfg) {
  reject_unknown(cfg, {"hc", "p", "nu", "T", "perturb", "fine_lo", "fine_hi", "critical_points",
                       "stride", "fit_from", "start"});
  InstabilityParams p;
  p.h_c = cfg.get_double("hc", p.h_c);
  p.p = cfg.get_int("p", p.p);
  p.nu = cfg.get_double("nu", p.nu);
  p.T = cfg.get_double("T", p.T);
  p.perturb = cfg.get_double("perturb", p.perturb);
  p.fine_lo = cfg.get_double("fine_lo", p.fine_lo);
  p.fine_hi = cfg.get_double("fine_hi", p.fine_hi);
  p.critical_points = cfg.get_int("critical_points", p.critical_points);
  p.stride = cfg.get_int("stride", p.stride);
  p.fit_from = cfg.get_double("fit_from", p.fit_from);
  p.start = parse_start(cfg);
  p.validate();
  return p;
}

LshapeParams LshapeParams::from(const ExperimentConfig& cfg) {
  reject_unknown(cfg, {"N_levels", "beta", "control_beta", "nu", "T", "dt_factor", "rhs", "control"});
  LshapeParams p;
  p.N_levels = cfg.get_ints("N_levels", p.N_levels);
  p.beta = cfg.get_double("beta", p.beta);
  p.control_beta = cfg.get_double("control_beta", p.control_beta);
  p.nu = cfg.get_double("nu", p.nu);
  p.T = cfg.get_double("T", p.T);
  p.dt_factor = cfg.get_double("dt_factor", p.dt_factor);
  p.rhs = cfg.get_double("rhs", p.rhs);
  p.control = parse_bool(cfg, "control", p.control);
  p.validate();
  return p;
}

}  // namespace ltswave::harness
