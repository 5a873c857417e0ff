#include "ltswave/operator.hpp"

#include <stdexcept>
#include <utility>

namespace ltswave {

StabilizedOperator::StabilizedOperator(const LumpedSystem& sys, cheb::StabParams params, double dt)
    : sys_(&sys), params_(std::move(params)), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const int n = sys.n_dofs();
  y_prev_.resize(n);
  y_cur_.resize(n);
  y_next_.resize(n);
  fine_buf_.resize(static_cast<int>(sys.fine_dofs.size()));
}

void StabilizedOperator::apply_poly(const Vec& v, Vec& out) const {
  if (v.size() != n()) throw std::invalid_argument("apply_poly: length mismatch");
  const auto& prm = params_;
  const double dt2 = dt_ * dt_;
  const auto& fd = sys_->fine_dofs;

  // y_0 = 0, y_1 = 2/(omega delta) v,
  // y_{k+1} = 2 bh (delta - dt^2 X / omega) y_k - b y_{k-1} + (4/omega) bh v.
  y_prev_.setZero();
  y_cur_ = (2.0 / (prm.omega * prm.delta)) * v;
  for (int k = 1; k < prm.p; ++k) {
    const double bh = prm.beta_half[k - 1];
    const double b = prm.beta[k - 1];
    y_next_ = (2.0 * bh * prm.delta) * y_cur_ - b * y_prev_ + (4.0 / prm.omega * bh) * v;
    fine_buf_.noalias() = sys_->K_fine_rows * y_cur_;
    ++fine_applies_;
    const double scale = 2.0 * bh * dt2 / prm.omega;
    for (int i = 0; i < static_cast<int>(fd.size()); ++i)
      y_next_[fd[i]] -= scale * sys_->inv_mass[fd[i]] * fine_buf_[i];
    std::swap(y_prev_, y_cur_);
    std::swap(y_cur_, y_next_);
  }
  out = y_cur_;
}

void StabilizedOperator::apply(const Vec& v, Vec& out) const {
  apply_poly(v, out);
  y_next_ = out;
  apply_AS(*sys_, y_next_, out);
}

Vec StabilizedOperator::apply(const Vec& v) const {
  Vec out(v.size());
  apply(v, out);
  return out;
}

}  // namespace ltswave
