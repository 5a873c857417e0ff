#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ltswave/lts.hpp"
#include "ltswave/operator.hpp"
#include "ltswave/spectral.hpp"
#include "support.hpp"

using namespace ltswave;
using testsupport::dense_oracle;
using testsupport::random_interval;
using testsupport::random_vec;

namespace {

double stable_dt(const LumpedSystem& sys, const cheb::StabParams& prm) {
  // 0.5 of the A^S limit keeps every configuration comfortably stable
  const double lmax = dense_eigenvalues(dense_AS(sys), sys.mass).maxCoeff();
  (void)prm;
  return 0.5 * 2.0 / std::sqrt(lmax);
}

}  // namespace

TEST_CASE("lts_step equals the dense two-step formula") {
  std::mt19937 gen(11);
  std::uniform_int_distribution<int> cells(4, 41), pd(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double nus[] = {0.0, 0.01, 0.05, 0.1, 0.5};
  for (int trial = 0; trial < 60; ++trial) {
    const LumpedSystem sys = assemble(random_interval(gen, cells(gen)));
    const auto prm = cheb::make_stab_params(pd(gen), nus[trial % 5]);
    const double dt = (0.2 + 1.5 * u(gen)) * stable_dt(sys, prm);
    const int n = sys.n_dofs();
    WaveState s{random_vec(gen, n), random_vec(gen, n), 3, dt};
    const WaveState next = lts_step(sys, prm, s);
    const Vec ref = 2 * s.u_cur - s.u_prev - dt * dt * dense_oracle(sys, prm, dt) * s.u_cur;
    CHECK((next.u_cur - ref).norm() <= 1e-11 * ref.norm());
    CHECK(next.u_prev == s.u_cur);
    CHECK(next.step == 4);
    // one-step form
    const Vec v_new = (next.u_cur - s.u_cur) / dt, v_old = (s.u_cur - s.u_prev) / dt;
    const Vec rhs = v_old - dt * dense_oracle(sys, prm, dt) * s.u_cur;
    CHECK((v_new - rhs).norm() <= 1e-11 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("p = 1 is leapfrog") {
  std::mt19937 gen(3);
  const LumpedSystem sys = assemble(random_interval(gen, 15));
  const auto prm = cheb::make_stab_params(1, 0.2);
  const double dt = 0.01;
  WaveState s{random_vec(gen, sys.n_dofs()), random_vec(gen, sys.n_dofs()), 1, dt};
  const WaveState next = lts_step(sys, prm, s);
  const Vec ref = 2 * s.u_cur - s.u_prev - dt * dt * apply_AS(sys, s.u_cur);
  CHECK((next.u_cur - ref).norm() <= 1e-13 * ref.norm());
}

TEST_CASE("scalar all-fine system follows the polynomial") {
  Mesh m = build_interval_mesh(0.5, 0.0, 1.0, 1);
  REQUIRE(m.n_cells() == 2);
  const LumpedSystem sys = assemble(m);
  REQUIRE(sys.n_dofs() == 1);
  const double lam = apply_AS(sys, Vec::Ones(1))[0];
  for (int p : {2, 3, 7})
    for (double nu : {0.0, 0.3}) {
      const auto prm = cheb::make_stab_params(p, nu);
      const double dt = 0.37;
      WaveState s{Vec::Constant(1, 0.4), Vec::Constant(1, 1.1), 1, dt};
      const double ref = -0.4 + 2 * 1.1 - cheb::stabilized_poly(prm, dt * dt * lam) * 1.1;
      CHECK(lts_step(sys, prm, s).u_cur[0] == doctest::Approx(ref).epsilon(1e-12));
      const StabilizedOperator op(sys, prm, dt);
      CHECK(op.apply(Vec::Ones(1))[0] == doctest::Approx(lam * cheb::reduced_poly(prm, dt, lam)).epsilon(1e-12));
    }
}

TEST_CASE("coarse nodes away from the fine region see plain leapfrog") {
  const LumpedSystem sys = assemble(build_interval_mesh(0.05, 0.7, 0.9, 4));
  const auto prm = cheb::make_stab_params(4, 0.05);
  const StabilizedOperator op(sys, prm, 0.02);
  // dof 3 sits at x = 0.2, far from any fine node
  Vec e = Vec::Zero(sys.n_dofs());
  e[3] = 1.0;
  const Vec ref = apply_AS(sys, e);
  CHECK((op.apply(e) - ref).norm() <= 1e-13 * ref.norm());
}

TEST_CASE("initial state") {
  std::mt19937 gen(5);
  const LumpedSystem sys = assemble(random_interval(gen, 12));
  const int n = sys.n_dofs();
  const double dt = 0.003;
  const WaveState z = initial_state(sys, Vec::Zero(n), Vec::Zero(n), dt);
  CHECK(z.u_cur.norm() == 0.0);
  CHECK(z.step == 1);

  const Vec w = random_vec(gen, n);
  CHECK((initial_state(sys, Vec::Zero(n), w, dt).u_cur - dt * w).norm() < 1e-15);

  const Vec s = sys.mass.cwiseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t_symmetrize(dense_AS(sys), sys.mass));
  const Vec eta = s.cwiseInverse().cwiseProduct(es.eigenvectors().col(n / 2));
  const double lam = es.eigenvalues()(n / 2);
  const WaveState st = initial_state(sys, eta, Vec::Zero(n), dt);
  CHECK((st.u_cur - (1 - dt * dt * lam / 2) * eta).norm() <= 1e-12 * eta.norm());

  const auto prm = cheb::make_stab_params(3, 0.1);
  const WaveState stab = initial_state(sys, prm, eta, Vec::Zero(n), dt, StartOperator::stabilized);
  const Vec ref = eta - dt * dt / 2 * dense_oracle(sys, prm, dt) * eta;
  CHECK((stab.u_cur - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("run bookkeeping and cost contract") {
  const LumpedSystem sys = assemble(build_interval_mesh(0.05, 0.8, 1.0, 5));
  const auto prm = cheb::make_stab_params(5, 0.01);
  const int n = sys.n_dofs();
  const Vec u0 = Vec::LinSpaced(n, 0.0, 1.0);
  const double dt = 0.01;

  const WaveState one = run(sys, prm, u0, Vec::Zero(n), dt, dt);
  const WaveState init = initial_state(sys, u0, Vec::Zero(n), dt);
  CHECK(one.u_cur == init.u_cur);
  CHECK(one.step == 1);

  int seen = 0;
  RunOptions opts;
  opts.observers.push_back({10, [&](const WaveState&) { ++seen; }});
  const WaveState end = run(sys, prm, u0, Vec::Zero(n), dt, 1.0, opts);
  CHECK(end.step == 100);
  CHECK(end.time() == doctest::Approx(1.0));
  CHECK(seen == 10);

  LtsStepper stepper(sys, prm, dt);
  WaveState s = init;
  for (int i = 0; i < 17; ++i) stepper.step(s);
  CHECK(stepper.coarse_applies() == 17);
  CHECK(stepper.fine_applies() == 17 * 5);
}

TEST_CASE("discrete energy") {
  std::mt19937 gen(21);
  const LumpedSystem sys = assemble(random_interval(gen, 20));
  const int n = sys.n_dofs();
  const auto prm1 = cheb::make_stab_params(1, 0.0);
  CHECK(discrete_energy(sys, prm1, Vec::Zero(n), Vec::Zero(n), 0.01).value == 0.0);

  // p = 1: classical leapfrog energy with a(u1, u0)
  const Vec a = random_vec(gen, n), b = random_vec(gen, n);
  const double dt = 0.001;
  const double classical = 0.5 * (std::pow(t_norm(sys, (b - a) / dt), 2) + b.dot(sys.K * a));
  CHECK(discrete_energy(sys, prm1, a, b, dt).value == doctest::Approx(classical).epsilon(1e-13));

  // conservation over 1e4 steps at a validated stable step, p in {1, 3}
  for (int p : {1, 3}) {
    const auto prm = cheb::make_stab_params(p, 0.05);
    const LumpedSystem fs = assemble(build_interval_mesh(0.05, 0.6, 0.8, p));
    LanczosOptions lo;
    const double dtv = 0.9 * max_stable_dt(fs, p, 0.05, {0, 1e-6, std::nullopt, lo}).dt_max;
    const auto pr = probe_stability(fs, prm, dtv, lo);
    REQUIRE(pr.stable);
    std::vector<EnergySample> es;
    RunOptions opts;
    opts.observers.push_back(energy_observer(fs, prm, dtv, 1, es));
    const Vec u0 = random_vec(gen, fs.n_dofs());
    run(fs, prm, u0, Vec::Zero(fs.n_dofs()), dtv, 10000 * dtv, opts);
    REQUIRE(es.size() == 10000);
    double dev = 0.0;
    for (const auto& e : es) dev = std::max(dev, std::abs(e.value / es.front().value - 1));
    CHECK(dev < 1e-10);
  }
}

TEST_CASE("p = 1 leapfrog is reversible") {
  std::mt19937 gen(8);
  const LumpedSystem sys = assemble(random_interval(gen, 25));
  const auto prm = cheb::make_stab_params(1, 0.0);
  const double dt = stable_dt(sys, prm);
  const Vec u0 = random_vec(gen, sys.n_dofs()), u1 = random_vec(gen, sys.n_dofs());
  WaveState s{u0, u1, 1, dt};
  for (int i = 0; i < 100; ++i) s = lts_step(sys, prm, s);
  std::swap(s.u_prev, s.u_cur);
  for (int i = 0; i < 100; ++i) s = lts_step(sys, prm, s);
  CHECK((s.u_cur - u0).norm() <= 1e-9 * u0.norm());
  CHECK((s.u_prev - u1).norm() <= 1e-9 * u1.norm());
}

TEST_CASE("observers") {
  const Mesh m = build_interval_mesh(0.25, 0.5, 0.5, 1);
  const auto part = partition_dofs(m);
  const LumpedSystem sys = assemble(m);
  const auto prm = cheb::make_stab_params(1, 0.0);
  std::vector<NormSample> norms;
  std::string snap;
  RunOptions opts;
  opts.observers.push_back(norm_observer(sys, 1, norms));
  opts.observers.push_back(snapshot_observer(m, part, 2, snap));
  run(sys, prm, Vec::Ones(3), Vec::Zero(3), 0.1, 0.4, opts);
  CHECK(norms.size() == 4);
  CHECK(norms.front().step == 1);
  CHECK(norms.front().t == doctest::Approx(0.1));
  int lines = 0;
  for (char c : snap) lines += c == '\n';
  CHECK(lines == 2 * 3);
}
