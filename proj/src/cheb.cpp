#include "ltswave/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ltswave::cheb {

namespace {

constexpr double kBoundSlack = 1e-10;
constexpr double kLimitThreshold = 1e-300;

}  // namespace

double chebyshev(int degree, double x) {
  if (degree <= 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < degree; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double chebyshev_derivative(int degree, double x, int order) {
  if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
  if (order == 0) return chebyshev(degree, x);
  if (order > degree) return 0.0;

  // d[m] holds T_k^{(m)} for the current k, dp[m] for k - 1.
  // Differentiating T_{k+1} = 2x T_k - T_{k-1} m times gives
  // T_{k+1}^{(m)} = 2x T_k^{(m)} + 2m T_k^{(m-1)} - T_{k-1}^{(m)}.
  std::vector<double> dp(order + 1, 0.0);
  std::vector<double> d(order + 1, 0.0);
  dp[0] = 1.0;
  d[0] = x;
  d[1] = 1.0;
  std::vector<double> next(order + 1);
  for (int k = 1; k < degree; ++k) {
    for (int m = 0; m <= order; ++m) {
      next[m] = 2.0 * x * d[m] - dp[m];
      if (m > 0) next[m] += 2.0 * m * d[m - 1];
    }
    std::swap(dp, d);
    std::swap(d, next);
  }
  return d[order];
}

StabParams make_stab_params(int p, double nu) {
  if (p < 1) throw std::invalid_argument("p must be >= 1, got " + std::to_string(p));
  if (!(nu >= 0.0 && nu <= 0.5))
    throw std::invalid_argument("nu must lie in [0, 1/2], got " + std::to_string(nu));

  StabParams s;
  s.p = p;
  s.nu = nu;
  s.delta = 1.0 + nu / (static_cast<double>(p) * p);
  const double tp = chebyshev(p, s.delta);
  s.omega = 2.0 * chebyshev_derivative(p, s.delta, 1) / tp;

  s.beta.resize(p - 1);
  s.beta_half.resize(p - 1);
  double t_km1 = 1.0;       // T_{k-1}
  double t_k = s.delta;     // T_k
  for (int k = 1; k < p; ++k) {
    const double t_kp1 = 2.0 * s.delta * t_k - t_km1;
    s.beta[k - 1] = t_km1 / t_kp1;
    s.beta_half[k - 1] = t_k / t_kp1;
    t_km1 = t_k;
    t_k = t_kp1;
  }
  return s;
}

double stabilized_poly(const StabParams& params, double y) {
  const double tp = chebyshev(params.p, params.delta);
  return 2.0 * (1.0 - chebyshev(params.p, params.delta - y / params.omega) / tp);
}

double reduced_poly(const StabParams& params, double dt, double x) {
  const double y = dt * dt * x;
  if (std::abs(y) < kLimitThreshold) return 1.0;
  return stabilized_poly(params, y) / y;
}

double reduced_poly_recursive(const StabParams& params, double dt, double x,
                              int stage) {
  const int last = stage < 0 ? params.p : stage;
  if (last == 0) return 0.0;
  const double shift = params.delta - dt * dt * x / params.omega;
  double prev = 0.0;
  double cur = 2.0 / (params.omega * params.delta);
  for (int k = 1; k < last; ++k) {
    const double bh = params.beta_half[k - 1];
    const double next = 2.0 * bh * shift * cur - params.beta[k - 1] * prev +
                        4.0 / params.omega * bh;
    prev = cur;
    cur = next;
  }
  return cur;
}

PolyBoundsReport verify_bounds(const StabParams& params, double dt,
                               int grid_size) {
  if (grid_size < 100) throw std::invalid_argument("grid_size must be >= 100");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

  const double p2 = static_cast<double>(params.p) * params.p;
  const double nu = params.nu;
  const double omega = params.omega;
  const double dt2 = dt * dt;
  auto quotient = [&](double y) { return reduced_poly(params, dt, y / dt2); };

  PolyBoundsReport r;
  r.grid_size = grid_size;
  int violations = 0;
  auto check = [&](bool ok) {
    if (!ok) ++violations;
  };

  // sup |P| <= 4 - 2 nu / (1 + nu)
  {
    const double hi = (2.0 + nu / p2) * omega;
    const double bound = 4.0 - 2.0 * nu / (1.0 + nu);
    for (int i = 0; i <= grid_size; ++i) {
      const double v = std::abs(stabilized_poly(params, hi * i / grid_size));
      r.sup_abs_P = std::max(r.sup_abs_P, v);
      check(v <= bound + kBoundSlack);
    }
  }
  // sup |P(x)/x| <= 1 on (0, 2 delta omega]
  {
    const double hi = 2.0 * params.delta * omega;
    for (int i = 1; i <= grid_size; ++i) {
      const double v = std::abs(quotient(hi * i / grid_size));
      r.sup_P_over_x = std::max(r.sup_P_over_x, v);
      check(v <= 1.0 + kBoundSlack);
    }
  }
  // inf P(x)/x >= 2 nu / ((2 + nu)^2 omega) on (0, (1 + delta) omega]
  {
    const double hi = (1.0 + params.delta) * omega;
    const double bound = 2.0 * nu / ((2.0 + nu) * (2.0 + nu) * omega);
    r.inf_P_over_x = quotient(hi / grid_size);
    for (int i = 1; i <= grid_size; ++i) {
      const double v = quotient(hi * i / grid_size);
      r.inf_P_over_x = std::min(r.inf_P_over_x, v);
      check(v >= bound - kBoundSlack);
    }
  }
  // sup |(1 - P(y)/y) / P(y)| <= (nu + 1) / (2 nu) on the open interval
  if (nu > 0.0) {
    const double hi = (2.0 + nu / p2) * omega;
    const double bound = (nu + 1.0) / (2.0 * nu);
    for (int i = 1; i < grid_size; ++i) {
      const double y = hi * i / grid_size;
      const double q = quotient(y);
      const double v = std::abs((1.0 - q) / (q * y));
      r.sup_diff_quot = std::max(r.sup_diff_quot, v);
      check(v <= bound + kBoundSlack);
    }
  }

  r.omega_lower = 2.0 * p2 * std::exp(-nu);
  r.omega_upper = 2.0 * p2;
  check(omega >= r.omega_lower - kBoundSlack * r.omega_upper);
  check(omega <= r.omega_upper + kBoundSlack * r.omega_upper);
  r.T_p_delta = chebyshev(params.p, params.delta);
  check(r.T_p_delta >= 1.0 + nu - kBoundSlack);

  r.violations = violations;
  r.all_pass = violations == 0;
  return r;
}

}  // namespace ltswave::cheb
