#include "ltswave/lts.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <utility>

namespace ltswave {

namespace {

void check_len(const LumpedSystem& sys, const Vec& v, const char* what) {
  if (v.size() != sys.n_dofs()) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

}  // namespace

WaveState initial_state(const LumpedSystem& sys, const Vec& u0, const Vec& v0, double dt) {
  check_len(sys, u0, "initial_state u0");
  check_len(sys, v0, "initial_state v0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  WaveState s;
  s.dt = dt;
  s.step = 1;
  s.u_prev = u0;
  s.u_cur = u0 + dt * v0 - (0.5 * dt * dt) * apply_AS(sys, u0);
  return s;
}

WaveState initial_state(const LumpedSystem& sys, const cheb::StabParams& params, const Vec& u0,
                        const Vec& v0, double dt, StartOperator start) {
  if (start == StartOperator::plain) return initial_state(sys, u0, v0, dt);
  check_len(sys, u0, "initial_state u0");
  check_len(sys, v0, "initial_state v0");
  StabilizedOperator op(sys, params, dt);
  WaveState s;
  s.dt = dt;
  s.step = 1;
  s.u_prev = u0;
  s.u_cur = u0 + dt * v0 - (0.5 * dt * dt) * op.apply(u0);
  return s;
}

LtsStepper::LtsStepper(const LumpedSystem& sys, cheb::StabParams params, double dt)
    : sys_(&sys), params_(std::move(params)), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const int n = sys.n_dofs();
  for (Vec* v : {&w_, &z_prev_, &z_cur_, &z_next_, &rhs_, &coarse_}) v->resize(n);
}

void LtsStepper::step(WaveState& s) {
  const auto& sys = *sys_;
  const auto& prm = params_;
  check_len(sys, s.u_cur, "lts step");
  check_len(sys, s.u_prev, "lts step");
  const double dt2 = dt_ * dt_;
  const auto& mask = sys.partition.fine_mask;

  // 1. w = A^S Pi_c u
  coarse_ = s.u_cur;
  for (int i = 0; i < coarse_.size(); ++i)
    if (mask[i]) coarse_[i] = 0.0;
  apply_AS(sys, coarse_, w_);
  ++coarse_applies_;

  // 2. first inner stage
  z_prev_ = s.u_cur;
  rhs_ = w_;
  add_AS_fine(sys, z_prev_, 1.0, rhs_);
  ++fine_applies_;
  z_cur_ = z_prev_ - (dt2 / (prm.omega * prm.delta)) * rhs_;

  // 3. remaining stages
  for (int k = 1; k < prm.p; ++k) {
    const double b = prm.beta[k - 1];
    const double bh = prm.beta_half[k - 1];
    rhs_ = w_;
    add_AS_fine(sys, z_cur_, 1.0, rhs_);
    ++fine_applies_;
    z_next_ = (1.0 + b) * z_cur_ - b * z_prev_ - (2.0 * dt2 / prm.omega * bh) * rhs_;
    std::swap(z_prev_, z_cur_);
    std::swap(z_cur_, z_next_);
  }

  // 4. u_next = -u_prev + 2 z_p
  s.u_prev = 2.0 * z_cur_ - s.u_prev;
  std::swap(s.u_prev, s.u_cur);
  ++s.step;
}

WaveState lts_step(const LumpedSystem& sys, const cheb::StabParams& params, const WaveState& state) {
  LtsStepper stepper(sys, params, state.dt);
  WaveState next = state;
  stepper.step(next);
  return next;
}

EnergySample discrete_energy(const StabilizedOperator& op, const Vec& u_cur, const Vec& u_next) {
  const auto& sys = op.system();
  const Vec v = (u_next - u_cur) / op.dt();
  EnergySample e;
  e.kinetic = 0.5 * t_inner(sys, v, v);
  e.potential_cross = 0.5 * t_inner(sys, op.apply(u_next), u_cur);
  e.value = e.kinetic + e.potential_cross;
  return e;
}

EnergySample discrete_energy(const LumpedSystem& sys, const cheb::StabParams& params,
                             const Vec& u_cur, const Vec& u_next, double dt) {
  return discrete_energy(StabilizedOperator(sys, params, dt), u_cur, u_next);
}

WaveState run(const LumpedSystem& sys, const cheb::StabParams& params, const Vec& u0,
              const Vec& v0, double dt, double T, const RunOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(T >= dt * (1.0 - 1e-12))) throw std::invalid_argument("T must be >= dt");
  const long n_steps = std::lround(T / dt);
  WaveState s = initial_state(sys, params, u0, v0, dt, opts.start);
  auto notify = [&]() {
    for (const auto& ob : opts.observers)
      if (ob.callback && ob.stride > 0 && (s.step - 1) % ob.stride == 0) ob.callback(s);
  };
  notify();
  LtsStepper stepper(sys, params, dt);
  for (long n = 1; n < n_steps; ++n) {
    stepper.step(s);
    notify();
  }
  return s;
}

Observer energy_observer(const LumpedSystem& sys, const cheb::StabParams& params, double dt,
                         int stride, std::vector<EnergySample>& out) {
  auto op = std::make_shared<StabilizedOperator>(sys, params, dt);
  Observer ob;
  ob.stride = stride;
  ob.callback = [op, &out](const WaveState& s) {
    EnergySample e = discrete_energy(*op, s.u_prev, s.u_cur);
    e.step = s.step - 1;
    out.push_back(e);
  };
  return ob;
}

Observer norm_observer(const LumpedSystem& sys, int stride, std::vector<NormSample>& out) {
  Observer ob;
  ob.stride = stride;
  ob.callback = [&sys, &out](const WaveState& s) {
    NormSample r;
    r.step = s.step;
    r.t = s.time();
    r.sup = s.u_cur.cwiseAbs().maxCoeff();
    r.l2_T = t_norm(sys, s.u_cur);
    out.push_back(r);
  };
  return ob;
}

Observer snapshot_observer(const Mesh& mesh, const DofPartition& part, int stride,
                           std::string& out) {
  Observer ob;
  ob.stride = stride;
  ob.callback = [&mesh, &part, &out](const WaveState& s) {
    char buf[128];
    for (int i = 0; i < part.n_dofs(); ++i) {
      const Point& x = mesh.vertices[part.free_nodes[i]];
      if (mesh.dim == 1)
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.time(), x[0], s.u_cur[i]);
      else
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.time(), x[0], x[1], s.u_cur[i]);
      out += buf;
    }
  };
  return ob;
}

}  // namespace ltswave
