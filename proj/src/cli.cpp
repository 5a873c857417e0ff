#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltswave/csv.hpp"
#include "ltswave/harness.hpp"
#include "ltswave/parallel.hpp"

namespace ltswave::harness {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

struct Command {
  const char* name;
  const char* help;
  std::vector<const char*> keys;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = {
      {"converge", "1D convergence study",
       {"h_levels", "p_list", "nu", "T", "fine_lo", "fine_hi", "dt_rule", "dt_value", "reference",
        "critical_points", "start"}},
      {"energy", "discrete energy trace",
       {"hc", "p", "nu", "T", "fine_lo", "fine_hi", "dt_rule", "dt_value", "stride", "check_stability"}},
      {"spectrum", "eigenvalues of the stabilized operator over dt / h_c",
       {"hc", "p", "nu", "lo", "hi", "points", "critical_points", "fine_lo", "fine_hi"}},
      {"cfl-table", "maximal stable time step per nu",
       {"hc", "p", "fine_lo", "fine_hi", "nu", "scan_points", "rel_width"}},
      {"instability", "critical time step growth demo",
       {"hc", "p", "nu", "T", "perturb", "fine_lo", "fine_hi", "critical_points", "stride", "fit_from",
        "start"}},
      {"lshape", "graded L-shape convergence study",
       {"N_levels", "beta", "control_beta", "nu", "T", "dt_factor", "rhs", "control"}},
  };
  return cmds;
}

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> config_echo(const ExperimentConfig& cfg) {
  std::vector<std::string> out{"lts-wave " + std::string(kVersion) + " " + cfg.experiment};
  for (const auto& [k, v] : cfg.values) out.push_back(k + " = " + v);
  return out;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Writes a table and folds its bytes into the manifest checksum.
struct Writer {
  std::filesystem::path dir;
  std::vector<std::string> echo;
  json files = json::object();

  void operator()(const std::string& name, csv::Table t) {
    t.comments.insert(t.comments.begin(), echo.begin(), echo.end());
    const std::string path = (dir / name).string();
    csv::write(path, t);
    files[name] = hex(fnv1a(csv::format(t)));
  }
};

json run_converge(const ExperimentConfig& cfg, Writer& w) {
  const auto prm = ConvergeParams::from(cfg);
  const auto rows = convergence_study(prm);
  csv::Table t;
  t.columns = {"p", "h", "dofs", "steps", "dt", "t_final", "l2_error", "h1_error", "rate", "rate_h1"};
  for (const auto& r : rows)
    t.add({csv::num(r.p), csv::num(r.h), csv::num(r.dofs), csv::num(r.steps), csv::num(r.dt),
           csv::num(r.t_final), csv::num(r.l2_error), csv::num(r.h1_error), csv::num(r.observed_rate),
           csv::num(r.observed_rate_h1)});
  w("converge.csv", t);
  json s = json::array();
  for (const auto& r : rows)
    s.push_back({{"p", r.p}, {"h", r.h}, {"l2_error", r.l2_error}, {"rate", r.observed_rate}});
  return s;
}

json run_energy(const ExperimentConfig& cfg, Writer& w) {
  const auto prm = EnergyParams::from(cfg);
  const auto res = energy_trace(prm);
  csv::Table t;
  t.comments = {"dt = " + csv::num(res.dt), "steps = " + csv::num(res.steps),
                "validated_stable = " + std::string(res.validated_stable ? "true" : "false")};
  t.columns = {"step", "t", "E", "rel_dev"};
  for (const auto& r : res.rows) t.add({csv::num(r.step), csv::num(r.t), csv::num(r.E), csv::num(r.rel_dev)});
  w("energy.csv", t);
  return {{"dt", res.dt}, {"steps", res.steps}, {"max_rel_dev", res.max_rel_dev},
          {"validated_stable", res.validated_stable}};
}

json run_spectrum(const ExperimentConfig& cfg, Writer& w) {
  const auto prm = SpectrumParams::from(cfg);
  const auto res = spectrum_study(prm);
  csv::Table t;
  t.comments = {"dt_opt = " + csv::num(res.dt_opt)};
  t.columns = {"dt_over_hc", "eig_index", "value"};
  for (const auto& r : res.rows) t.add({csv::num(r.dt_over_hc), csv::num(r.index), csv::num(r.value)});
  w("spectrum.csv", t);
  csv::Table c;
  c.columns = {"dt_crit", "dt_crit_over_hc", "dt_crit_over_dt_opt", "distance", "touches", "kind"};
  json s = json::array();
  for (const auto& k : res.critical) {
    c.add({csv::num(k.dt), csv::num(k.dt / prm.h_c), csv::num(k.dt / res.dt_opt), csv::num(k.distance),
           k.at_one ? "1" : "0", k.tangent ? "tangent" : "crossing"});
    s.push_back({{"dt_crit", k.dt}, {"dt_crit_over_hc", k.dt / prm.h_c}, {"dt_crit_over_dt_opt", k.dt / res.dt_opt}});
  }
  w("critical.csv", c);
  return {{"dt_opt", res.dt_opt}, {"critical", s}};
}

json run_cfl_table(const ExperimentConfig& cfg, Writer& w) {
  const auto prm = CflTableParams::from(cfg);
  const auto rows = cfl_table(prm);
  csv::Table t;
  t.comments = {"mesh: h_c = " + csv::num(prm.h_c) + ", p = " + csv::num(prm.p) + ", fine region [" +
                csv::num(prm.fine_lo) + ", " + csv::num(prm.fine_hi) + ")"};
  t.columns = {"nu", "dt_max", "dt_opt", "ratio_pct", "min_margin", "theorem_bound", "max_scaled_max",
               "all_positive"};
  json s = json::array();
  for (const auto& r : rows) {
    const auto& rep = r.report;
    t.add({csv::num(rep.nu), csv::num(rep.dt_max), csv::num(rep.dt_opt), csv::num(rep.ratio_pct),
           csv::num(rep.min_margin), csv::num(r.theorem_bound), csv::num(r.max_scaled_max),
           r.all_positive ? "1" : "0"});
    s.push_back({{"nu", rep.nu}, {"ratio_pct", rep.ratio_pct}, {"min_margin", rep.min_margin}});
  }
  w("stability.csv", t);
  return s;
}

json run_instability(const ExperimentConfig& cfg, Writer& w) {
  const auto prm = InstabilityParams::from(cfg);
  const auto res = instability_demo(prm);
  csv::Table t;
  t.comments = {"dt_crit = " + csv::num(res.dt_crit), "dt_crit_over_hc = " + csv::num(res.dt_crit_over_hc),
                "eigenvector_checksum = " + res.eigenvector_checksum};
  t.columns = {"series", "t", "sup"};
  const std::pair<const char*, const std::vector<NormSample>*> series[] = {
      {"nu0_crit", &res.crit}, {"stabilized_crit", &res.stab}, {"nu0_smaller", &res.smaller},
      {"nu0_larger", &res.larger}};
  for (const auto& [name, trace] : series)
    for (const auto& s : *trace) t.add({name, csv::num(s.t), csv::num(s.sup)});
  w("instability.csv", t);
  return {{"dt_crit", res.dt_crit},
          {"dt_crit_over_hc", res.dt_crit_over_hc},
          {"growth_crit", res.growth_crit},
          {"growth_stab", res.growth_stab},
          {"growth_smaller", res.growth_smaller},
          {"growth_larger", res.growth_larger},
          {"fit_slope", res.fit_slope},
          {"fit_r2", res.fit_r2},
          {"eigenvector_checksum", res.eigenvector_checksum}};
}

json run_lshape(const ExperimentConfig& cfg, Writer& w) {
  const auto prm = LshapeParams::from(cfg);
  const auto rows = lshape_study(prm);
  csv::Table t;
  t.columns = {"series", "N", "beta", "p", "dofs", "fine_dofs", "h", "dt", "dt_max", "steps",
               "l2_error", "h1_error", "rate_l2", "rate_h1"};
  json s = json::array();
  for (const auto& r : rows) {
    t.add({r.series, csv::num(r.N), csv::num(r.beta), csv::num(r.p), csv::num(r.dofs), csv::num(r.fine_dofs),
           csv::num(r.h), csv::num(r.dt), csv::num(r.dt_max), csv::num(r.steps), csv::num(r.l2_error),
           csv::num(r.h1_error), csv::num(r.rate_l2), csv::num(r.rate_h1)});
    s.push_back({{"series", r.series}, {"N", r.N}, {"rate_l2", r.rate_l2}, {"rate_h1", r.rate_h1}});
  }
  w("lshape.csv", t);
  return s;
}

json run(const ExperimentConfig& cfg, Writer& w) {
  const std::string& e = cfg.experiment;
  if (e == "converge") return run_converge(cfg, w);
  if (e == "energy") return run_energy(cfg, w);
  if (e == "spectrum") return run_spectrum(cfg, w);
  if (e == "cfl_table") return run_cfl_table(cfg, w);
  if (e == "instability") return run_instability(cfg, w);
  return run_lshape(cfg, w);
}

}  // namespace

int cli_dispatch(int argc, char** argv) {
  CLI::App app{"Leapfrog local time-stepping for the wave equation"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::map<std::string, std::map<std::string, std::string>> flags;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--out", out_dir, "output directory");
    for (const char* key : cmd.keys)
      sub->add_option_function<std::string>(
          flag_name(key), [&flags, name = cmd.name, key](const std::string& v) { flags[name][key] = v; },
          std::string("override ") + key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const auto* sub = app.get_subcommands().front();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    ExperimentConfig cfg = parse_config(text, sub->get_name());
    for (const auto& [k, v] : flags[sub->get_name()]) cfg.values[k] = v;
    if (auto it = cfg.values.find("out"); it != cfg.values.end() && out_dir == ".")
      out_dir = cfg.get_string("out", ".");
    cfg.values.erase("out");

    Writer w{out_dir, config_echo(cfg)};
    json summary = run(cfg, w);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["tool"] = "lts-wave";
    manifest["version"] = kVersion;
    manifest["experiment"] = cfg.experiment;
    manifest["config"] = cfg.values;
    manifest["threads"] = worker_count();
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["wall_seconds"] = wall;
    manifest["files"] = w.files;
    manifest["summary"] = summary;
    std::ofstream os(std::filesystem::path(out_dir) / "run.json");
    if (!os) throw std::runtime_error("cannot write run.json in " + out_dir);
    os << manifest.dump(2) << "\n";
    std::cout << "wrote " << w.files.size() << " file(s) to " << out_dir << " in " << wall << " s\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "lts-wave: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lts-wave: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ltswave::harness
