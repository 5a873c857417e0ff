#pragma once

#include <map>
#include <string>
#include <vector>

#include "ltswave/fem.hpp"
#include "ltswave/lts.hpp"
#include "ltswave/mesh.hpp"
#include "ltswave/spectral.hpp"

namespace ltswave::harness {

/// Flat key/value configuration for one experiment. Keys come from a
/// TOML-style file (top-level keys plus the section named after the
/// experiment) and are overridden by command-line flags.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;
};

/// Parses `key = value` lines, `[section]` headers and `#` comments.
/// Values are kept as text; lists may be written as `[a, b]` or `a, b`.
ExperimentConfig parse_config(const std::string& text, const std::string& experiment);

/// Canonical experiment name for a CLI subcommand (cfl-table -> cfl_table).
std::string canonical_experiment(const std::string& name);

// ---------------------------------------------------------------- oracles

/// Exact solution of the semidiscrete (lumped) system through the
/// T-orthonormal eigenbasis of A^S. Dense; n must be <= kDenseCap.
Vec reference_semidiscrete(const LumpedSystem& sys, const Vec& u0, const Vec& v0, double t);

/// Gaussian bump exp(-400 (x - 1/2)^2) and its derivative.
double gaussian(double x);
double gaussian_dx(double x);

/// d'Alembert solution on (0,1) with homogeneous Dirichlet data, c = 1,
/// u(., 0) = gaussian, u_t(., 0) = 0 (odd 2-periodic extension).
double dalembert_gaussian(double x, double t);
double dalembert_gaussian_dx(double x, double t);

/// Solves K w = M (-rhs_const) (the weak form of Laplace w = rhs_const with
/// homogeneous Dirichlet data) by Jacobi-preconditioned CG to relative
/// residual 1e-12. Throws std::runtime_error after 10 n iterations.
Vec elliptic_solve(const LumpedSystem& sys, double rhs_const);
Vec elliptic_solve(const Mesh& mesh, double rhs_const);

/// Observed rate log(e0 / e1) / log(h0 / h1).
double observed_rate(double h0, double e0, double h1, double e1);

// ------------------------------------------------------------ experiments

struct ConvergenceRow {
  int p = 1;
  double h = 0.0;
  int dofs = 0;
  long steps = 0;
  double dt = 0.0;
  double t_final = 0.0;
  double l2_error = 0.0;
  double h1_error = 0.0;
  double observed_rate = 0.0;     // L2, NaN on the first row of each p
  double observed_rate_h1 = 0.0;  // H1, NaN on the first row of each p
};

struct ConvergeParams {
  std::vector<double> h_levels{1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320};
  std::vector<int> p_list{2, 5, 17};
  double nu = 0.01;
  double T = 2.0;
  double fine_lo = 0.9;
  double fine_hi = 1.0;
  std::string dt_rule = "exp_nu_times_hc";  // factor_of_dt_opt | absolute | critical
  double dt_value = 0.0;                    // factor or absolute step
  std::string reference = "analytic";       // or semidiscrete
  int critical_points = 1000;               // grid for the critical rule
  StartOperator start = StartOperator::plain;

  static ConvergeParams from(const ExperimentConfig& cfg);
  void validate() const;
};

std::vector<ConvergenceRow> convergence_study(const ConvergeParams& prm);

struct EnergyParams {
  double h_c = 1.0 / 320;
  int p = 2;
  double nu = 0.01;
  double T = 100.0;
  double fine_lo = 0.9;
  double fine_hi = 1.0;
  std::string dt_rule = "exp_nu_times_hc";
  double dt_value = 0.0;
  int stride = 0;  // 0: every step up to 1e4 steps, else every 10th
  bool check_stability = true;

  static EnergyParams from(const ExperimentConfig& cfg);
  void validate() const;
};

struct EnergyTraceRow {
  int step = 0;
  double t = 0.0;
  double E = 0.0;
  double rel_dev = 0.0;
};

struct EnergyResult {
  double dt = 0.0;
  long steps = 0;
  double max_rel_dev = 0.0;
  bool validated_stable = false;
  std::vector<EnergyTraceRow> rows;
};

EnergyResult energy_trace(const EnergyParams& prm);

struct SpectrumParams {
  double h_c = 0.025;
  int p = 3;
  double nu = 0.0;
  double lo = 0.05;  // dt / h_c
  double hi = 1.05;
  int points = 201;
  int critical_points = 4000;
  double fine_lo = 0.9;
  double fine_hi = 1.0;

  static SpectrumParams from(const ExperimentConfig& cfg);
  void validate() const;
};

struct SpectrumResult {
  double dt_opt = 0.0;
  std::vector<SpectrumRow> rows;
  std::vector<CriticalStep> critical;
};

SpectrumResult spectrum_study(const SpectrumParams& prm);

struct CflTableParams {
  double h_c = 0.01;
  int p = 1000;
  double fine_lo = 0.9;
  double fine_hi = 1.0;
  std::vector<double> nu_list{0.001, 0.01, 0.05, 0.5};
  int scan_points = 200;
  double rel_width = 1e-6;

  static CflTableParams from(const ExperimentConfig& cfg);
  void validate() const;
};

struct CflTableRow {
  StabilityReport report;
  double theorem_bound = 0.0;    // 4 - nu / (nu + 1)
  double max_scaled_max = 0.0;   // over all validated probes
  bool all_positive = false;     // every validated probe positive definite
};

/// Reference time step 2 / sqrt(lambda_max(A^S)) on the uniform h_c mesh.
double uniform_dt_opt(double h_c);

std::vector<CflTableRow> cfl_table(const CflTableParams& prm);

struct InstabilityParams {
  double h_c = 1.0 / 40;
  int p = 2;
  double nu = 0.01;
  double T = 500.0;
  double perturb = 0.01;
  double fine_lo = 0.9;
  double fine_hi = 1.0;
  int critical_points = 4000;
  int stride = 1;
  double fit_from = 10.0;
  StartOperator start = StartOperator::plain;

  static InstabilityParams from(const ExperimentConfig& cfg);
  void validate() const;
};

struct InstabilityResult {
  double dt_crit = 0.0;
  double dt_crit_over_hc = 0.0;
  double initial_sup = 0.0;
  double growth_crit = 0.0;  // max sup / initial sup
  double growth_stab = 0.0;
  double growth_smaller = 0.0;
  double growth_larger = 0.0;
  double fit_slope = 0.0;    // sup ~ c t on the fit window
  double fit_r2 = 0.0;
  std::string eigenvector_checksum;
  // Traces of the runs: nu = 0 at dt_crit, stabilized nu at dt_crit,
  // nu = 0 at dt_crit (1 - perturb) and at dt_crit (1 + perturb).
  std::vector<NormSample> crit, stab, smaller, larger;
};

InstabilityResult instability_demo(const InstabilityParams& prm);

struct LshapeParams {
  std::vector<int> N_levels{10, 20, 40, 80};
  double beta = 1.6;
  double control_beta = 1.0;
  double nu = 0.01;
  double T = 0.3;
  double dt_factor = 0.9;
  double rhs = 100.0;
  bool control = true;

  static LshapeParams from(const ExperimentConfig& cfg);
  void validate() const;
};

struct LshapeRow {
  std::string series;  // graded or uniform
  int N = 0;
  double beta = 1.0;
  int p = 1;
  int dofs = 0;
  int fine_dofs = 0;
  double h = 0.0;
  double dt = 0.0;
  double dt_max = 0.0;
  long steps = 0;
  double l2_error = 0.0;
  double h1_error = 0.0;
  double rate_l2 = 0.0;
  double rate_h1 = 0.0;
};

/// Each level N is compared against the solution on level 2N.
std::vector<LshapeRow> lshape_study(const LshapeParams& prm);

// ------------------------------------------------------------------- CLI

/// lts-wave entry point; returns the process exit code.
int cli_dispatch(int argc, char** argv);

}  // namespace ltswave::harness
