#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ltswave/operator.hpp"
#include "ltswave/spectral.hpp"
#include "support.hpp"

using namespace ltswave;
using testsupport::dense_oracle;
using testsupport::random_interval;
using testsupport::random_vec;

TEST_CASE("stabilized operator basics") {
  std::mt19937 gen(2);
  const LumpedSystem sys = assemble(random_interval(gen, 30));
  const int n = sys.n_dofs();
  const StabilizedOperator one(sys, cheb::make_stab_params(1, 0.3), 0.01);
  const Vec v = random_vec(gen, n);
  CHECK((one.apply(v) - apply_AS(sys, v)).norm() <= 1e-14 * apply_AS(sys, v).norm());
  CHECK(one.apply(Vec::Zero(n)).norm() == 0.0);
  CHECK((dense_stabilized(one) - dense_AS(sys)).norm() <= 1e-12 * dense_AS(sys).norm());
}

TEST_CASE("matrix-free operator against the dense oracle, T-self-adjoint") {
  std::mt19937 gen(4);
  std::uniform_int_distribution<int> cells(3, 60), pd(1, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const LumpedSystem sys = assemble(random_interval(gen, cells(gen)));
    const auto prm = cheb::make_stab_params(pd(gen), 0.5 * u(gen));
    const double lmax = dense_eigenvalues(dense_AS(sys), sys.mass).maxCoeff();
    const double dt = 2.0 * u(gen) / std::sqrt(lmax);
    const StabilizedOperator op(sys, prm, dt);
    const DenseMat ref = dense_oracle(sys, prm, dt);
    for (int k = 0; k < 4; ++k) {
      const Vec x = random_vec(gen, sys.n_dofs());
      const Vec y = ref * x;
      CHECK((op.apply(x) - y).norm() <= 1e-11 * y.norm());
    }
    for (int k = 0; k < 100; ++k) {
      const Vec a = random_vec(gen, sys.n_dofs()), b = random_vec(gen, sys.n_dofs());
      const Vec Aa = op.apply(a);
      const double diff = t_inner(sys, Aa, b) - t_inner(sys, a, op.apply(b));
      CHECK(std::abs(diff) <= 1e-11 * t_norm(sys, Aa) * t_norm(sys, b));
    }
  }
}

TEST_CASE("extreme eigenvalues of the uniform Laplacian") {
  for (int N : {40, 600}) {
    const double h = 1.0 / N;
    const LumpedSystem sys = assemble(build_interval_mesh(h, 0.5, 0.5, 1));
    const auto ex = extreme_eigs_AS(sys);
    CHECK(ex.lambda_max == doctest::Approx(4 / (h * h) * std::pow(std::sin((N - 1) * M_PI * h / 2), 2)).epsilon(1e-9));
    CHECK(ex.lambda_min == doctest::Approx(4 / (h * h) * std::pow(std::sin(M_PI * h / 2), 2)).epsilon(1e-9));
    CHECK(ex.dense == (N <= 400));
  }
}

TEST_CASE("Lanczos agrees with dense on a stabilized operator") {
  const LumpedSystem sys = assemble(build_interval_mesh(0.0025, 0.8, 1.0, 3));
  REQUIRE(sys.n_dofs() > 400);
  const auto prm = cheb::make_stab_params(3, 0.05);
  const StabilizedOperator op(sys, prm, 0.004);
  LanczosOptions lo;
  lo.require_min = false;
  const auto ex = extreme_eigs(op, lo);
  CHECK_FALSE(ex.dense);
  const Vec ev = dense_eigenvalues(dense_stabilized(op), sys.mass);
  CHECK(ex.lambda_max == doctest::Approx(ev.maxCoeff()).epsilon(1e-9));
  // a converged bottom Ritz value is within the residual bound
  if (ex.converged_min) CHECK(std::abs(ex.lambda_min - ev.minCoeff()) <= 1e-9 * ev.maxCoeff());
  CHECK(ex.lambda_min >= ev.minCoeff() - 1e-9 * ev.maxCoeff());

  // requiring lambda_min on this conditioning falls back to the dense solve
  lo.require_min = true;
  const auto full = extreme_eigs(op, lo);
  CHECK(full.lambda_min == doctest::Approx(ev.minCoeff()).epsilon(1e-9));
}

TEST_CASE("fine block positivity matches the dense smallest eigenvalue") {
  // even p: positivity is lost exactly when dt^2 mu_max(B_ff) reaches 2 delta omega
  const LumpedSystem sys = assemble(build_interval_mesh(0.02, 0.6, 1.0, 4));
  const auto prm = cheb::make_stab_params(4, 0.05);
  const double mu = fine_block_lambda_max(sys);
  const double dt_edge = std::sqrt(2 * prm.delta * prm.omega / mu);
  for (double f : {0.99, 1.01}) {
    const Vec ev = dense_eigenvalues(dense_stabilized(StabilizedOperator(sys, prm, f * dt_edge)), sys.mass);
    CHECK((ev.minCoeff() > 0) == (f < 1));
  }
}

TEST_CASE("stability search") {
  const LumpedSystem sys = assemble(build_interval_mesh(0.05, 0.5, 0.5, 1));
  const auto rep = max_stable_dt(sys, 1, 0.0);
  CHECK(rep.ratio_pct == doctest::Approx(100.0).epsilon(2e-6));
  CHECK(rep.dt_opt_literal);

  const LumpedSystem f = assemble(build_interval_mesh(0.05, 0.9, 1.0, 4));
  StabilityOptions so;
  so.scan_points = 40;
  for (double nu : {0.01, 0.05, 0.5}) {
    const auto r = max_stable_dt(f, 4, nu, so);
    CHECK(r.dt_max > 0.0);
    CHECK(r.ratio_pct <= 100.0 * 1.5);
    for (const auto& pr : r.probes)
      if (pr.stable) {
        CHECK(pr.scaled_max <= 4 - nu / (nu + 1) + 1e-9);
        CHECK(pr.scaled_min > 0.0);
      }
    CHECK(r.min_margin > 0.0);
  }
}

TEST_CASE("critical steps on the coarse test configuration") {
  const double hc = 1.0 / 40;
  const LumpedSystem s3 = assemble(build_interval_mesh(hc, 0.9, 1.0, 3));
  const auto c3 = critical_dt_scan(s3, 3, hc);
  REQUIRE_FALSE(c3.empty());
  for (std::size_t i = 1; i < c3.size(); ++i) CHECK(c3[i].dt > c3[i - 1].dt);
  for (const auto& c : c3) {
    CHECK(c.distance < 1e-6);
    CHECK(c.eigenvector.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  }

  // nu = 0.001 leaves crossings of 1 only, none below 0.75 h_c;
  // nu = 0.01 clears the range
  CriticalScanOptions co;
  co.nu = 0.001;
  co.hi = 0.95;
  co.points = 1000;
  const auto weak = critical_dt_scan(s3, 3, hc, co);
  for (const auto& c : weak) {
    CHECK(c.dt > 0.75 * hc);
    CHECK(c.at_one);
    CHECK_FALSE(c.tangent);
  }
  co.nu = 0.01;
  CHECK(critical_dt_scan(s3, 3, hc, co).empty());
}

TEST_CASE("block identity") {
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const LumpedSystem small = assemble(random_interval(gen, 9));
  REQUIRE(small.n_dofs() == 8);
  const auto rep = block_identity_check(small, cheb::make_stab_params(3, 0.1), 0.01);
  CHECK(rep.max_off_fine <= 1e-10);
  CHECK(rep.fine_block_tnorm <= rep.fine_block_bound);

  const auto one = block_identity_check(small, cheb::make_stab_params(1, 0.1), 0.01);
  CHECK(one.max_off_fine <= 1e-12);
  CHECK(one.fine_block_tnorm <= 1e-12);
}

TEST_CASE("spectrum sweep for p = 1 is quadratic in dt") {
  const double hc = 0.1;
  const LumpedSystem sys = assemble(build_interval_mesh(hc, 0.5, 0.5, 1));
  const auto rows = spectrum_sweep(sys, 1, 0.0, hc, {0.02, 0.04});
  const int n = sys.n_dofs();
  REQUIRE(rows.size() == std::size_t(2 * n));
  for (int j = 0; j < n; ++j) CHECK(rows[n + j].value == doctest::Approx(4 * rows[j].value).epsilon(1e-12));
}

TEST_CASE("CFL diagnostic") {
  const auto prm = cheb::make_stab_params(4, 0.1);
  const auto d = cfl_diagnostic(400.0, 0.1, prm, 0.001);
  CHECK(d.mode == "spectral-surrogate");
  CHECK(d.kappa == doctest::Approx(400.0 * 0.01 / 16 * 1e-4));
  CHECK(d.total_rhs == doctest::Approx(0.1 / 1.1));
  CHECK(d.total_ok);
  const auto e = cfl_diagnostic(400.0, 0.1, prm, 0.001, CflConstants{2.0, 1.0, 3.0});
  CHECK(e.mode == "user");
  CHECK(e.total_lhs == doctest::Approx(5 * 18 * 1e-4));
}
