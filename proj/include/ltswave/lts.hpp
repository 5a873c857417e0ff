#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ltswave/cheb.hpp"
#include "ltswave/fem.hpp"
#include "ltswave/operator.hpp"

namespace ltswave {

struct WaveState {
  Vec u_prev;  // u^{(n-1)}
  Vec u_cur;   // u^{(n)}
  int step = 1;
  double dt = 0.0;

  double time() const { return step * dt; }
};

/// Operator used in the starting step u1 = u0 + dt v0 - dt^2/2 A u0.
enum class StartOperator { plain, stabilized };

WaveState initial_state(const LumpedSystem& sys, const Vec& u0, const Vec& v0, double dt);
WaveState initial_state(const LumpedSystem& sys, const cheb::StabParams& params, const Vec& u0,
                        const Vec& v0, double dt, StartOperator start);

/// One global LF-LTS step with preallocated work vectors.
class LtsStepper {
 public:
  LtsStepper(const LumpedSystem& sys, cheb::StabParams params, double dt);

  void step(WaveState& state);

  const cheb::StabParams& params() const { return params_; }
  double dt() const { return dt_; }
  long coarse_applies() const { return coarse_applies_; }
  long fine_applies() const { return fine_applies_; }

 private:
  const LumpedSystem* sys_;
  cheb::StabParams params_;
  double dt_;
  Vec w_, z_prev_, z_cur_, z_next_, rhs_, coarse_;
  long coarse_applies_ = 0;
  long fine_applies_ = 0;
};

WaveState lts_step(const LumpedSystem& sys, const cheb::StabParams& params, const WaveState& state);

struct EnergySample {
  int step = 0;      // index n of E^{n+1/2}
  double value = 0.0;
  double kinetic = 0.0;
  double potential_cross = 0.0;
};

/// E^{n+1/2} from consecutive iterates (u_cur, u_next).
EnergySample discrete_energy(const StabilizedOperator& op, const Vec& u_cur, const Vec& u_next);
EnergySample discrete_energy(const LumpedSystem& sys, const cheb::StabParams& params,
                             const Vec& u_cur, const Vec& u_next, double dt);

struct Observer {
  int stride = 1;
  std::function<void(const WaveState&)> callback;
};

struct RunOptions {
  StartOperator start = StartOperator::plain;
  std::vector<Observer> observers;
};

/// initial_state followed by N - 1 steps, N = round(T / dt). Observers see
/// the state after the starting step and after every stride-th step.
WaveState run(const LumpedSystem& sys, const cheb::StabParams& params, const Vec& u0,
              const Vec& v0, double dt, double T, const RunOptions& opts = {});

/// Observer recording E^{n-1/2} from (u_prev, u_cur) of each visited state.
Observer energy_observer(const LumpedSystem& sys, const cheb::StabParams& params, double dt,
                         int stride, std::vector<EnergySample>& out);

struct NormSample {
  int step = 0;
  double t = 0.0;
  double sup = 0.0;
  double l2_T = 0.0;
};

Observer norm_observer(const LumpedSystem& sys, int stride, std::vector<NormSample>& out);

/// Appends CSV rows `t,x[,y],u` for every free node at the configured stride.
Observer snapshot_observer(const Mesh& mesh, const DofPartition& part, int stride,
                           std::string& out);

}  // namespace ltswave
