#include "ltswave/harness.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "ltswave/parallel.hpp"

namespace ltswave::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dt_from_rule(const std::string& rule, double value, double nu, double h_c, double dt_crit) {
  if (rule == "exp_nu_times_hc") return std::exp(-nu) * h_c;
  if (rule == "factor_of_dt_opt") return value * uniform_dt_opt(h_c);
  if (rule == "absolute") return value;
  if (rule == "critical") return dt_crit;
  throw std::invalid_argument("unknown dt_rule '" + rule + "'");
}

void check_rule(const std::string& rule, double value) {
  if (rule == "exp_nu_times_hc" || rule == "critical") return;
  if (rule == "factor_of_dt_opt" || rule == "absolute") {
    if (!(value > 0.0)) throw std::invalid_argument("dt_rule " + rule + " needs dt_value > 0");
    return;
  }
  throw std::invalid_argument("unknown dt_rule '" + rule + "'");
}

void check_nu(double nu) {
  if (!(nu >= 0.0 && nu <= 0.5)) throw std::invalid_argument("nu must lie in [0, 1/2]");
}

double odd_periodic(double y, double (*g)(double), bool derivative) {
  y = std::fmod(y, 2.0);
  if (y < 0.0) y += 2.0;
  if (y <= 1.0) return g(y);
  return derivative ? g(2.0 - y) : -g(2.0 - y);
}

std::string fnv1a_hex(const Vec& v) {
  std::uint64_t h = 1469598103934665603ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Vec reference_semidiscrete(const LumpedSystem& sys, const Vec& u0, const Vec& v0, double t) {
  const int n = sys.n_dofs();
  if (n > kDenseCap) throw std::invalid_argument("reference_semidiscrete needs n <= dense cap");
  if (u0.size() != n || v0.size() != n) throw std::invalid_argument("reference_semidiscrete: length mismatch");
  const Vec s = sys.mass.cwiseSqrt();
  const Vec si = s.cwiseInverse();
  DenseMat S = si.asDiagonal() * DenseMat(sys.K) * si.asDiagonal();
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMat> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error("reference_semidiscrete: eigensolve failed");
  const DenseMat& V = es.eigenvectors();
  const Vec a = V.transpose() * s.cwiseProduct(u0);
  const Vec b = V.transpose() * s.cwiseProduct(v0);
  Vec c(n);
  for (int j = 0; j < n; ++j) {
    const double w = std::sqrt(es.eigenvalues()(j));
    c[j] = std::cos(w * t) * a[j] + std::sin(w * t) / w * b[j];
  }
  return si.cwiseProduct(V * c);
}

double gaussian(double x) { return std::exp(-400.0 * (x - 0.5) * (x - 0.5)); }

double gaussian_dx(double x) { return -800.0 * (x - 0.5) * gaussian(x); }

double dalembert_gaussian(double x, double t) {
  return 0.5 * (odd_periodic(x - t, gaussian, false) + odd_periodic(x + t, gaussian, false));
}

double dalembert_gaussian_dx(double x, double t) {
  return 0.5 * (odd_periodic(x - t, gaussian_dx, true) + odd_periodic(x + t, gaussian_dx, true));
}

Vec elliptic_solve(const LumpedSystem& sys, double rhs_const) {
  const int n = sys.n_dofs();
  const Vec b = -rhs_const * sys.mass;
  if (b.norm() == 0.0) return Vec::Zero(n);
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * n);
  cg.compute(sys.K);
  Vec w = cg.solve(b);
  if (cg.info() != Eigen::Success)
    throw std::runtime_error("elliptic_solve: CG did not converge in " + std::to_string(10 * n) +
                             " iterations");
  return w;
}

Vec elliptic_solve(const Mesh& mesh, double rhs_const) { return elliptic_solve(assemble(mesh), rhs_const); }

double observed_rate(double h0, double e0, double h1, double e1) {
  return std::log(e0 / e1) / std::log(h0 / h1);
}

double uniform_dt_opt(double h_c) {
  const Mesh m = build_interval_mesh(h_c, 0.0, 0.0, 1);
  const LumpedSystem sys = assemble(m);
  LanczosOptions o;
  o.require_min = false;
  return 2.0 / std::sqrt(extreme_eigs_AS(sys, o).lambda_max);
}

// ------------------------------------------------------------ convergence

void ConvergeParams::validate() const {
  if (h_levels.size() < 2) throw std::invalid_argument("converge needs at least two mesh levels");
  for (double h : h_levels)
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("mesh sizes must lie in (0, 1)");
  if (p_list.empty()) throw std::invalid_argument("converge needs at least one p");
  for (int p : p_list)
    if (p < 1) throw std::invalid_argument("p must be >= 1");
  check_nu(nu);
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  check_rule(dt_rule, dt_value);
  if (reference != "analytic" && reference != "semidiscrete")
    throw std::invalid_argument("reference must be analytic or semidiscrete");
  if (critical_points < 3) throw std::invalid_argument("critical_points must be >= 3");
}

std::vector<ConvergenceRow> convergence_study(const ConvergeParams& prm) {
  prm.validate();
  const double h_ref = *std::min_element(prm.h_levels.begin(), prm.h_levels.end()) / 2.0;
  std::vector<ConvergenceRow> rows;
  for (int p : prm.p_list) {
    const cheb::StabParams params = cheb::make_stab_params(p, prm.nu);
    std::unique_ptr<Mesh> ref_mesh;
    std::unique_ptr<LumpedSystem> ref_sys;
    if (prm.reference == "semidiscrete") {
      ref_mesh = std::make_unique<Mesh>(build_interval_mesh(h_ref, prm.fine_lo, prm.fine_hi, p));
      ref_sys = std::make_unique<LumpedSystem>(assemble(*ref_mesh));
    }
    std::vector<ConvergenceRow> level_rows(prm.h_levels.size());
    parallel_for(static_cast<int>(prm.h_levels.size()), [&](int li) {
      const double h = prm.h_levels[li];
      const Mesh mesh = build_interval_mesh(h, prm.fine_lo, prm.fine_hi, p);
      const LumpedSystem sys = assemble(mesh);
      const auto& part = sys.partition;
      double dt_crit = kNaN;
      if (prm.dt_rule == "critical") {
        CriticalScanOptions co;
        co.points = prm.critical_points;
        const auto crit = critical_dt_scan(sys, p, h, co);
        if (crit.empty()) throw std::runtime_error("no critical time step found for h = " + std::to_string(h));
        dt_crit = crit.front().dt;
      }
      const double dt = dt_from_rule(prm.dt_rule, prm.dt_value, prm.nu, h, dt_crit);
      const Vec u0 = interpolate(mesh, part, [](const Point& x) { return gaussian(x[0]); });
      const Vec v0 = Vec::Zero(part.n_dofs());
      RunOptions ro;
      ro.start = prm.start;
      const WaveState s = run(sys, params, u0, v0, dt, prm.T, ro);
      ConvergenceRow r;
      r.p = p;
      r.h = h;
      r.dofs = part.n_dofs();
      r.steps = s.step;
      r.dt = dt;
      r.t_final = s.time();
      ErrorNorms e;
      if (prm.reference == "analytic") {
        const double tf = r.t_final;
        e = error_norms(
            mesh, part, s.u_cur, [tf](const Point& x) { return dalembert_gaussian(x[0], tf); },
            [tf](const Point& x) { return Point{dalembert_gaussian_dx(x[0], tf), 0.0}; });
      } else {
        const Vec ru0 = interpolate(*ref_mesh, ref_sys->partition, [](const Point& x) { return gaussian(x[0]); });
        const Vec ref = reference_semidiscrete(*ref_sys, ru0, Vec::Zero(ru0.size()), r.t_final);
        e = error_norms(mesh, part, s.u_cur, *ref_mesh, ref_sys->partition, ref);
      }
      r.l2_error = e.l2;
      r.h1_error = e.h1;
      level_rows[li] = r;
    });
    for (std::size_t i = 0; i < level_rows.size(); ++i) {
      auto& r = level_rows[i];
      if (i == 0) {
        r.observed_rate = r.observed_rate_h1 = kNaN;
      } else {
        const auto& q = level_rows[i - 1];
        r.observed_rate = observed_rate(q.h, q.l2_error, r.h, r.l2_error);
        r.observed_rate_h1 = observed_rate(q.h, q.h1_error, r.h, r.h1_error);
      }
      rows.push_back(r);
    }
  }
  return rows;
}

// ----------------------------------------------------------------- energy

void EnergyParams::validate() const {
  if (!(h_c > 0.0 && h_c < 1.0)) throw std::invalid_argument("h_c must lie in (0, 1)");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  check_nu(nu);
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  check_rule(dt_rule, dt_value);
  if (dt_rule == "critical") throw std::invalid_argument("energy does not support the critical rule");
  if (stride < 0) throw std::invalid_argument("stride must be >= 0");
}

EnergyResult energy_trace(const EnergyParams& prm) {
  prm.validate();
  const Mesh mesh = build_interval_mesh(prm.h_c, prm.fine_lo, prm.fine_hi, prm.p);
  const LumpedSystem sys = assemble(mesh);
  const cheb::StabParams params = cheb::make_stab_params(prm.p, prm.nu);
  EnergyResult res;
  res.dt = dt_from_rule(prm.dt_rule, prm.dt_value, prm.nu, prm.h_c, kNaN);
  res.steps = std::lround(prm.T / res.dt);
  if (prm.check_stability) {
    res.validated_stable = probe_stability(sys, params, res.dt, LanczosOptions{}).stable;
    if (!res.validated_stable)
      throw std::runtime_error("energy: dt = " + std::to_string(res.dt) + " is not spectrally stable");
  }
  const int stride = prm.stride > 0 ? prm.stride : (res.steps <= 10000 ? 1 : 10);

  const Vec u0 = interpolate(mesh, sys.partition, [](const Point& x) { return gaussian(x[0]); });
  std::vector<EnergySample> samples;
  RunOptions ro;
  ro.observers.push_back(energy_observer(sys, params, res.dt, stride, samples));
  run(sys, params, u0, Vec::Zero(u0.size()), res.dt, prm.T, ro);

  const double e0 = samples.empty() ? 0.0 : samples.front().value;
  for (const auto& s : samples) {
    EnergyTraceRow r;
    r.step = s.step;
    r.t = (s.step + 0.5) * res.dt;
    r.E = s.value;
    r.rel_dev = e0 == 0.0 ? 0.0 : std::abs(s.value / e0 - 1.0);
    res.max_rel_dev = std::max(res.max_rel_dev, r.rel_dev);
    res.rows.push_back(r);
  }
  return res;
}

// --------------------------------------------------------------- spectrum

void SpectrumParams::validate() const {
  if (!(h_c > 0.0 && h_c < 1.0)) throw std::invalid_argument("h_c must lie in (0, 1)");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  check_nu(nu);
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("spectrum range needs 0 < lo < hi");
  if (points < 2) throw std::invalid_argument("points must be >= 2");
  if (critical_points < 0) throw std::invalid_argument("critical_points must be >= 0");
}

SpectrumResult spectrum_study(const SpectrumParams& prm) {
  prm.validate();
  const Mesh mesh = build_interval_mesh(prm.h_c, prm.fine_lo, prm.fine_hi, prm.p);
  const LumpedSystem sys = assemble(mesh);
  SpectrumResult res;
  res.dt_opt = uniform_dt_opt(prm.h_c);
  std::vector<double> grid(prm.points);
  for (int i = 0; i < prm.points; ++i) grid[i] = prm.h_c * (prm.lo + (prm.hi - prm.lo) * i / (prm.points - 1));
  res.rows = spectrum_sweep(sys, prm.p, prm.nu, prm.h_c, grid);
  if (prm.critical_points >= 3) {
    CriticalScanOptions co;
    co.lo = prm.lo;
    co.hi = prm.hi;
    co.points = prm.critical_points;
    co.nu = prm.nu;
    res.critical = critical_dt_scan(sys, prm.p, prm.h_c, co);
  }
  return res;
}

// -------------------------------------------------------------- cfl table

void CflTableParams::validate() const {
  if (!(h_c > 0.0 && h_c < 1.0)) throw std::invalid_argument("h_c must lie in (0, 1)");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (nu_list.empty()) throw std::invalid_argument("nu list is empty");
  for (double nu : nu_list) check_nu(nu);
  if (scan_points < 0) throw std::invalid_argument("scan_points must be >= 0");
  if (!(rel_width > 0.0 && rel_width < 0.5)) throw std::invalid_argument("rel_width must lie in (0, 0.5)");
}

std::vector<CflTableRow> cfl_table(const CflTableParams& prm) {
  prm.validate();
  const Mesh mesh = build_interval_mesh(prm.h_c, prm.fine_lo, prm.fine_hi, prm.p);
  const LumpedSystem sys = assemble(mesh);
  StabilityOptions so;
  so.scan_points = prm.scan_points;
  so.rel_width = prm.rel_width;
  so.dt_opt = uniform_dt_opt(prm.h_c);
  std::vector<CflTableRow> rows;
  for (double nu : prm.nu_list) {
    CflTableRow r;
    r.report = max_stable_dt(sys, prm.p, nu, so);
    r.theorem_bound = 4.0 - nu / (nu + 1.0);
    r.all_positive = true;
    for (const auto& pr : r.report.probes) {
      if (!pr.stable) continue;
      r.max_scaled_max = std::max(r.max_scaled_max, pr.scaled_max);
      r.all_positive = r.all_positive && pr.positive;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ------------------------------------------------------------ instability

void InstabilityParams::validate() const {
  if (!(h_c > 0.0 && h_c < 1.0)) throw std::invalid_argument("h_c must lie in (0, 1)");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  check_nu(nu);
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!(perturb > 0.0 && perturb < 0.5)) throw std::invalid_argument("perturb must lie in (0, 0.5)");
  if (critical_points < 3) throw std::invalid_argument("critical_points must be >= 3");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (!(fit_from >= 0.0 && fit_from < T)) throw std::invalid_argument("fit_from must lie in [0, T)");
}

InstabilityResult instability_demo(const InstabilityParams& prm) {
  prm.validate();
  const Mesh mesh = build_interval_mesh(prm.h_c, prm.fine_lo, prm.fine_hi, prm.p);
  const LumpedSystem sys = assemble(mesh);
  CriticalScanOptions co;
  co.points = prm.critical_points;
  const auto crit = critical_dt_scan(sys, prm.p, prm.h_c, co);
  if (crit.empty()) throw std::runtime_error("instability: no critical time step in the scan range");

  InstabilityResult res;
  res.dt_crit = crit.front().dt;
  res.dt_crit_over_hc = res.dt_crit / prm.h_c;
  const Vec u0 = crit.front().eigenvector;
  const Vec v0 = Vec::Zero(u0.size());
  res.initial_sup = u0.cwiseAbs().maxCoeff();
  res.eigenvector_checksum = fnv1a_hex(u0);

  struct Job {
    double nu, dt;
    std::vector<NormSample>* out;
  };
  const std::array<Job, 4> jobs{{{0.0, res.dt_crit, &res.crit},
                                 {prm.nu, res.dt_crit, &res.stab},
                                 {0.0, res.dt_crit * (1.0 - prm.perturb), &res.smaller},
                                 {0.0, res.dt_crit * (1.0 + prm.perturb), &res.larger}}};
  parallel_for(4, [&](int j) {
    const auto& job = jobs[j];
    const cheb::StabParams params = cheb::make_stab_params(prm.p, job.nu);
    RunOptions ro;
    ro.start = prm.start;
    ro.observers.push_back(norm_observer(sys, prm.stride, *job.out));
    job.out->push_back({0, 0.0, res.initial_sup, t_norm(sys, u0)});
    run(sys, params, u0, v0, job.dt, prm.T, ro);
  });

  auto growth = [&](const std::vector<NormSample>& tr) {
    double m = 0.0;
    for (const auto& s : tr) m = std::max(m, s.sup);
    return m / res.initial_sup;
  };
  res.growth_crit = growth(res.crit);
  res.growth_stab = growth(res.stab);
  res.growth_smaller = growth(res.smaller);
  res.growth_larger = growth(res.larger);

  double stt = 0.0, sty = 0.0, sy = 0.0;
  int n = 0;
  for (const auto& s : res.crit)
    if (s.t >= prm.fit_from) {
      stt += s.t * s.t;
      sty += s.t * s.sup;
      sy += s.sup;
      ++n;
    }
  if (n >= 2) {
    res.fit_slope = sty / stt;
    const double mean = sy / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& s : res.crit)
      if (s.t >= prm.fit_from) {
        ss_res += std::pow(s.sup - res.fit_slope * s.t, 2);
        ss_tot += std::pow(s.sup - mean, 2);
      }
    res.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  }
  return res;
}

// ---------------------------------------------------------------- L-shape

void LshapeParams::validate() const {
  if (N_levels.size() < 2) throw std::invalid_argument("lshape needs at least two levels");
  for (int N : N_levels)
    if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (!(beta >= 1.0) || !(control_beta >= 1.0)) throw std::invalid_argument("beta must be >= 1");
  check_nu(nu);
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!(dt_factor > 0.0 && dt_factor <= 1.0)) throw std::invalid_argument("dt_factor must lie in (0, 1]");
}

namespace {

struct LshapeLevel {
  Mesh mesh;
  LumpedSystem sys;
  Vec u;
  LshapeRow row;
};

LshapeLevel lshape_level(const LshapeParams& prm, const std::string& series, int N, double beta,
                         bool lts) {
  LshapeLevel lv;
  lv.mesh = build_lshape_graded(N, beta, lts ? -1 : 0);
  lv.sys = assemble(lv.mesh);
  const MeshStats st = mesh_stats(lv.mesh);
  auto& r = lv.row;
  r.series = series;
  r.N = N;
  r.beta = beta;
  r.p = lts ? std::max(1, static_cast<int>(std::ceil(st.ratio_p_bound - 1e-9))) : 1;
  r.dofs = lv.sys.n_dofs();
  r.fine_dofs = lv.sys.partition.n_fine;
  r.h = st.h_max;
  const double nu = lts ? prm.nu : 0.0;
  StabilityOptions so;
  so.scan_points = 0;
  r.dt_max = max_stable_dt(lv.sys, r.p, nu, so).dt_max;
  r.steps = static_cast<long>(std::ceil(prm.T / (prm.dt_factor * r.dt_max)));
  r.dt = prm.T / static_cast<double>(r.steps);

  const Vec w = elliptic_solve(lv.sys, prm.rhs);
  const Vec u0 = Vec::Zero(w.size());
  lv.u = run(lv.sys, cheb::make_stab_params(r.p, nu), u0, -w, r.dt, prm.T).u_cur;
  return lv;
}

}  // namespace

std::vector<LshapeRow> lshape_study(const LshapeParams& prm) {
  prm.validate();
  std::vector<int> levels = prm.N_levels;
  std::sort(levels.begin(), levels.end());
  levels.push_back(2 * levels.back());

  std::vector<LshapeRow> out;
  auto series = [&](const std::string& name, double beta, bool lts) {
    std::vector<LshapeLevel> lv(levels.size());
    parallel_for(static_cast<int>(levels.size()),
                 [&](int i) { lv[i] = lshape_level(prm, name, levels[i], beta, lts); });
    for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
      const ErrorNorms e = error_norms(lv[i].mesh, lv[i].sys.partition, lv[i].u, lv[i + 1].mesh,
                                       lv[i + 1].sys.partition, lv[i + 1].u);
      lv[i].row.l2_error = e.l2;
      lv[i].row.h1_error = e.h1;
    }
    for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
      auto& r = lv[i].row;
      if (i == 0) {
        r.rate_l2 = r.rate_h1 = kNaN;
      } else {
        const auto& q = lv[i - 1].row;
        r.rate_l2 = observed_rate(q.h, q.l2_error, r.h, r.l2_error);
        r.rate_h1 = observed_rate(q.h, q.h1_error, r.h, r.h1_error);
      }
      out.push_back(r);
    }
  };
  series("graded", prm.beta, true);
  if (prm.control) series("uniform", prm.control_beta, false);
  return out;
}

}  // namespace ltswave::harness
