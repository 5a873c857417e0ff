#pragma once

#include "ltswave/cheb.hpp"
#include "ltswave/fem.hpp"

namespace ltswave {

/// Matrix-free A^{S,p,nu} = A^S P^{dt}_{p,nu}(Pi_f A^S).
/// Holds scratch vectors, so one instance must not be shared between threads.
class StabilizedOperator {
 public:
  StabilizedOperator(const LumpedSystem& sys, cheb::StabParams params, double dt);

  const LumpedSystem& system() const { return *sys_; }
  const cheb::StabParams& params() const { return params_; }
  double dt() const { return dt_; }
  int n() const { return sys_->n_dofs(); }

  /// out = P^{dt}_{p,nu}(Pi_f A^S) v through the stage recursion.
  void apply_poly(const Vec& v, Vec& out) const;

  void apply(const Vec& v, Vec& out) const;
  Vec apply(const Vec& v) const;

  /// Fine matvecs performed so far (one per recursion stage beyond the first).
  long fine_applies() const { return fine_applies_; }

 private:
  const LumpedSystem* sys_;
  cheb::StabParams params_;
  double dt_;
  mutable Vec y_prev_, y_cur_, y_next_, fine_buf_;
  mutable long fine_applies_ = 0;
};

}  // namespace ltswave
