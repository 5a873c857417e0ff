#pragma once

#include <vector>

namespace ltswave::cheb {

/// Chebyshev polynomial of the first kind T_degree(x), three-term recurrence.
double chebyshev(int degree, double x);

/// order-th derivative of T_degree at x. Zero when order > degree.
double chebyshev_derivative(int degree, double x, int order);

/// Coefficient bundle of the stabilized Chebyshev polynomial for a
/// coarse-to-fine step ratio p and damping nu.
///
/// beta[k-1] and beta_half[k-1] hold the inner-loop coefficients for
/// k = 1..p-1:
///   beta_k      = T_{k-1}(delta) / T_{k+1}(delta)
///   beta_{k+1/2} = T_k(delta)     / T_{k+1}(delta)
struct StabParams {
  int p = 1;
  double nu = 0.0;
  double delta = 1.0;  // 1 + nu / p^2
  double omega = 2.0;  // 2 T_p'(delta) / T_p(delta)
  std::vector<double> beta;
  std::vector<double> beta_half;
};

/// Throws std::invalid_argument unless p >= 1 and 0 <= nu <= 1/2.
StabParams make_stab_params(int p, double nu);

/// P_{p,nu}(y) = 2 (1 - T_p(delta - y/omega) / T_p(delta)).
double stabilized_poly(const StabParams& params, double y);

/// Reduced polynomial P(dt^2 x) / (dt^2 x); returns the limit 1 at x = 0.
double reduced_poly(const StabParams& params, double dt, double x);

/// Same quantity as reduced_poly, through the three-term stage recursion.
/// `stage` selects the intermediate polynomial P_{p,nu,k}; the default -1
/// means k = p.
double reduced_poly_recursive(const StabParams& params, double dt, double x,
                              int stage = -1);

struct PolyBoundsReport {
  double sup_abs_P = 0.0;       // over [0, (2 + nu/p^2) omega]
  double inf_P_over_x = 0.0;    // over (0, (1 + delta) omega]
  double sup_P_over_x = 0.0;    // over (0, 2 delta omega]
  double sup_diff_quot = 0.0;   // sup |(1 - P(y)/y) / P(y)|, nu > 0 only
  double omega_lower = 0.0;     // 2 p^2 e^{-nu}
  double omega_upper = 0.0;     // 2 p^2
  double T_p_delta = 1.0;
  int grid_size = 0;
  int violations = 0;
  bool all_pass = false;
};

/// Samples every polynomial bound on uniform grids of the respective
/// intervals with 1e-10 absolute slack. P(y)/y is evaluated through the
/// reduced polynomial at step dt, so dt only enters as a scaling.
PolyBoundsReport verify_bounds(const StabParams& params, double dt,
                               int grid_size);

}  // namespace ltswave::cheb
