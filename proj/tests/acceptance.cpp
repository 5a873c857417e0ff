// Acceptance checks AC1..AC10. With no argument every check runs; otherwise
// only the named ones (e.g. `acceptance AC2 AC6`). Exit code 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ltswave/cheb.hpp"
#include "ltswave/harness.hpp"
#include "ltswave/lts.hpp"
#include "ltswave/spectral.hpp"
#include "support.hpp"

using namespace ltswave;
using namespace ltswave::harness;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::vector<CflTableRow>& table1() {
  static const std::vector<CflTableRow> rows = cfl_table(CflTableParams{});
  return rows;
}

Outcome ac1() {
  const double ratio_ref[] = {99.9, 99.7, 98.4, 87.6};
  const double margin_ref[] = {0.0005, 0.0049, 0.0239, 0.1758};
  Outcome o{true, ""};
  const auto& rows = table1();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].report;
    const bool ok_r = std::abs(r.ratio_pct - ratio_ref[i]) <= 0.3;
    const bool ok_m = std::abs(r.min_margin - margin_ref[i]) <= 0.1 * margin_ref[i];
    o.pass = o.pass && ok_r && ok_m;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%snu=%g ratio %.2f%% (ref %.1f%s) margin %.4g (ref %.4g%s)",
                  i ? "; " : "", r.nu, r.ratio_pct, ratio_ref[i], ok_r ? "" : " X", r.min_margin,
                  margin_ref[i], ok_m ? "" : " X");
    o.detail += buf;
  }
  return o;
}

Outcome ac2() {
  const double hc = 1.0 / 40;
  const auto c3 = critical_dt_scan(assemble(build_interval_mesh(hc, 0.9, 1.0, 3)), 3, hc);
  const auto c2 = critical_dt_scan(assemble(build_interval_mesh(hc, 0.9, 1.0, 2)), 2, hc);
  if (c3.empty() || c2.empty()) return {false, "no critical step found"};
  const double r3 = c3.front().dt / uniform_dt_opt(hc);
  const double r2 = c2.front().dt / hc;
  const bool ok3 = std::abs(r3 - 0.5011) < 5e-5, ok2 = std::abs(r2 - 0.7104) < 5e-5;
  char buf[160];
  std::snprintf(buf, sizeof buf, "p=3 dt_crit/dt_opt %.5f (ref 0.5011%s), p=2 dt_crit/h_c %.5f (ref 0.7104%s)", r3,
                ok3 ? "" : " X", r2, ok2 ? "" : " X");
  return {ok3 && ok2, buf};
}

Outcome ac3() {
  const auto rows = convergence_study(ConvergeParams{});
  bool rates_ok = true;
  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
  std::map<double, std::vector<double>> by_h;
  for (const auto& r : rows) {
    by_h[r.h].push_back(r.l2_error);
    if (std::isnan(r.observed_rate)) continue;
    rmin = std::min(rmin, r.observed_rate);
    rmax = std::max(rmax, r.observed_rate);
    rates_ok = rates_ok && r.observed_rate >= 1.9 && r.observed_rate <= 2.1;
  }
  double spread = 0.0;
  for (const auto& [h, errs] : by_h) {
    const auto [lo, hi] = std::minmax_element(errs.begin(), errs.end());
    spread = std::max(spread, *hi / *lo - 1.0);
  }
  const bool agree = spread <= 0.05;
  char buf[160];
  std::snprintf(buf, sizeof buf, "L2 rates in [%.3f, %.3f] (need [1.9, 2.1]); max p-spread of errors %.1f%% (need <= 5%%)",
                rmin, rmax, 100 * spread);
  return {rates_ok && agree, buf};
}

Outcome ac4() {
  const auto res = energy_trace(EnergyParams{});
  char buf[128];
  std::snprintf(buf, sizeof buf, "%ld steps, max |E/E0 - 1| = %.3e (need < 1e-10)", res.steps, res.max_rel_dev);
  return {res.steps >= 30000 && res.max_rel_dev < 1e-10, buf};
}

Outcome ac5() {
  const auto r = instability_demo(InstabilityParams{});
  const bool ok = r.growth_crit >= 50 && r.fit_r2 >= 0.99 && r.growth_stab <= 10;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "dt_crit/h_c %.5f; nu=0 growth %.1fx (need >= 50), R^2 %.5f (need >= 0.99); nu=0.01 growth %.2fx (need <= 10)",
                r.dt_crit_over_hc, r.growth_crit, r.fit_r2, r.growth_stab);
  return {ok, buf};
}

double as_limit(const LumpedSystem& sys) {
  return 2.0 / std::sqrt(dense_eigenvalues(dense_AS(sys), sys.mass).maxCoeff());
}

Outcome ac6() {
  std::mt19937 gen(2024);
  std::uniform_int_distribution<int> cells(3, 41), pd(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double nus[] = {0.0, 0.01, 0.05, 0.1, 0.25, 0.5};
  const int trials = 60;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const LumpedSystem sys = assemble(testsupport::random_interval(gen, cells(gen)));
    const auto prm = cheb::make_stab_params(pd(gen), nus[t % 6]);
    const double dt = (0.1 + 0.9 * u(gen)) * as_limit(sys);
    const int n = sys.n_dofs();
    const WaveState s{testsupport::random_vec(gen, n), testsupport::random_vec(gen, n), 0, dt};
    const Vec next = lts_step(sys, prm, s).u_cur;
    const Vec ref = 2 * s.u_cur - s.u_prev - dt * dt * testsupport::dense_oracle(sys, prm, dt) * s.u_cur;
    worst = std::max(worst, (next - ref).norm() / ref.norm());
  }
  return {worst <= 1e-11, std::to_string(trials) + " systems, worst relative difference " + fmt("%.2e", worst) +
                              " (need <= 1e-11)"};
}

Outcome ac7() {
  std::mt19937 gen(77);
  std::uniform_int_distribution<int> cells(3, 30), pd(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double nus[] = {0.05, 0.1, 0.2, 0.3, 0.5};
  int count = 0, bound_fail = 0;
  double worst_off = 0.0, worst_ratio = 0.0;
  for (int t = 0; t < 50; ++t) {
    const LumpedSystem sys = assemble(testsupport::random_interval(gen, cells(gen)));
    if (sys.partition.n_fine == 0) continue;
    const auto prm = cheb::make_stab_params(pd(gen), nus[t % 5]);
    const double dt = (0.1 + 0.8 * u(gen)) * as_limit(sys);
    const auto rep = block_identity_check(sys, prm, dt);
    ++count;
    worst_off = std::max(worst_off, rep.max_off_fine);
    worst_ratio = std::max(worst_ratio, rep.fine_block_tnorm / rep.fine_block_bound);
    if (rep.fine_block_tnorm > rep.fine_block_bound) ++bound_fail;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%d instances, max off-fine entry %.2e (need <= 1e-10), max norm/bound %.3f, %d bound violations",
                count, worst_off, worst_ratio, bound_fail);
  return {count > 0 && worst_off <= 1e-10 && bound_fail == 0, buf};
}

Outcome ac8() {
  int cases = 0, failing = 0, violations = 0;
  for (int p = 1; p <= 32; ++p)
    for (int k = 0; k <= 10; ++k) {
      const auto prm = cheb::make_stab_params(p, 0.05 * k);
      const auto rep = cheb::verify_bounds(prm, 1.0, 10000);
      ++cases;
      violations += rep.violations;
      if (!rep.all_pass) ++failing;
    }
  return {failing == 0, std::to_string(cases) + " (p, nu) pairs, " + std::to_string(failing) + " failing, " +
                            std::to_string(violations) + " violations"};
}

Outcome ac9() {
  Outcome o{true, ""};
  for (const auto& row : table1()) {
    const double slack = row.theorem_bound + 1e-9 - row.max_scaled_max;
    const bool ok = slack >= 0.0 && row.all_positive;
    o.pass = o.pass && ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%snu=%g max dt^2 lmax %.7f vs %.7f%s", o.detail.empty() ? "" : "; ",
                  row.report.nu, row.max_scaled_max, row.theorem_bound, ok ? "" : " X");
    o.detail += buf;
    if (!row.all_positive) o.detail += " (not positive)";
  }
  return o;
}

Outcome ac10() {
  const auto rows = lshape_study(LshapeParams{});
  bool ok = true;
  std::string d;
  double graded_last = std::numeric_limits<double>::quiet_NaN();
  double uniform_last = graded_last;
  for (const auto& r : rows) {
    if (std::isnan(r.rate_l2)) continue;
    char buf[120];
    std::snprintf(buf, sizeof buf, "%s%s N=%d L2 %.3f H1 %.3f", d.empty() ? "" : "; ", r.series.c_str(), r.N,
                  r.rate_l2, r.rate_h1);
    d += buf;
    if (r.series == "graded") {
      ok = ok && r.rate_h1 >= 0.85 && r.rate_h1 <= 1.15 && r.rate_l2 >= 1.8 && r.rate_l2 <= 2.2;
      graded_last = r.rate_l2;
    } else {
      uniform_last = r.rate_l2;
    }
  }
  const bool contrast = uniform_last <= graded_last - 0.2;
  d += fmt("; control gap %.3f (need >= 0.2)", graded_last - uniform_last);
  return {ok && contrast, d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all = true;
  for (const auto& [name, fn] : checks) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
