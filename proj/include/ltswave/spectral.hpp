#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ltswave/fem.hpp"
#include "ltswave/operator.hpp"

namespace ltswave {

using DenseMat = Eigen::MatrixXd;

constexpr int kDenseCap = 2000;

struct LanczosOptions {
  double tol = 1e-10;      // relative, on the Ritz residual or Ritz value drift
  int max_iter = 3000;
  int check_every = 10;
  unsigned seed = 20240611u;
  int dense_below = 400;   // use a dense solve for smaller operators
  int dense_cap = kDenseCap;
  bool require_min = true; // throw if lambda_min did not converge
  // Optional early exit: called on the current largest Ritz value.
  std::function<bool(double)> stop_on_max;
};

struct EigExtremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int iterations = 0;
  bool converged_min = false;
  bool converged_max = false;
  bool dense = false;
  bool stopped_early = false;
};

/// Symmetric operator y = B x on R^n.
using SymApply = std::function<void(const Vec&, Vec&)>;

/// Three-term Lanczos without reorthogonalization; Ritz values from the
/// tridiagonal matrix. Only the extreme eigenvalues are tracked.
EigExtremes lanczos_extremes(int n, const SymApply& apply, const LanczosOptions& opts);

/// Dense A^S = D^{-1} K.
DenseMat dense_AS(const LumpedSystem& sys);

/// Dense A^{S,p,nu}, built column by column from the matrix-free operator.
/// Throws std::invalid_argument when n exceeds `cap`.
DenseMat dense_stabilized(const StabilizedOperator& op, int cap = kDenseCap);

/// D^{1/2} A D^{-1/2}, symmetrized to remove rounding asymmetry.
DenseMat t_symmetrize(const DenseMat& A, const Vec& mass);

/// Ascending eigenvalues of a T-self-adjoint dense operator.
Vec dense_eigenvalues(const DenseMat& A, const Vec& mass);

/// Extreme eigenvalues of A^{S,p,nu} (T-symmetrized).
EigExtremes extreme_eigs(const StabilizedOperator& op, const LanczosOptions& opts = {});

/// Extreme eigenvalues of A^S.
EigExtremes extreme_eigs_AS(const LumpedSystem& sys, const LanczosOptions& opts = {});

/// Largest eigenvalue of the fine-fine block of the T-symmetrized A^S.
double fine_block_lambda_max(const LumpedSystem& sys, const LanczosOptions& opts = {});

/// Modal form of the T-symmetrized A^{S,p,nu} for systems whose fine block
/// B_ff is tridiagonal in dof order (every 1D mesh). With B_ff = Q M Q^T and
/// R the reduced polynomial,
///   S_ff = Q g(M) Q^T,  S_fc = Q R(M) Q^T B_fc,
///   S_cc = B_cc + B_cf Q h(M) Q^T B_fc,   g = P(dt^2 .) / dt^2, h = (R - 1) / .,
/// so lambda_max(S) is the root of lambda = lambda_max(W(lambda)) above
/// max g, with W an n_c x n_c matrix. Only the rows of Q at fine dofs that
/// couple to coarse dofs are stored.
class FineModalForm {
 public:
  /// Empty when the system has no fine or no coarse dofs, more than
  /// `max_coarse` coarse dofs, or a fine block that is not tridiagonal.
  static std::optional<FineModalForm> build(const LumpedSystem& sys, int max_coarse = kDenseCap);

  int n_fine() const { return static_cast<int>(mu_.size()); }
  int n_coupling() const { return static_cast<int>(Z_.cols()); }
  const Vec& fine_eigenvalues() const { return mu_; }

  /// Smallest P(dt^2 mu_i); A^{S,p,nu} is positive definite iff it is > 0.
  double min_fine_poly(const cheb::StabParams& params, double dt) const;
  double lambda_max(const cheb::StabParams& params, double dt) const;

 private:
  Vec mu_;        // eigenvalues of B_ff
  DenseMat Z_;    // n_f x m, eigenvector entries at the coupling fine dofs
  DenseMat Bcc_;  // n_c x n_c
  DenseMat Bcf_;  // m x n_c, coupling rows of B_fc
};

struct StabilityProbe {
  double dt = 0.0;
  double scaled_max = 0.0;  // dt^2 lambda_max(A^{S,p,nu})
  double scaled_min = 0.0;  // dt^2 lambda_min when computed densely, NaN otherwise
  bool positive = false;    // A^{S,p,nu} positive definite
  bool stable = false;
  bool from_scan = false;
};

struct StabilityOptions {
  int scan_points = 200;
  double rel_width = 1e-6;
  std::optional<double> dt_opt;  // default: 2 / sqrt(lambda_max(A^S)) of sys
  LanczosOptions lanczos;
  int modal_max_coarse = 400;    // FineModalForm above the dense threshold; 0 disables
};

struct StabilityReport {
  int p = 1;
  double nu = 0.0;
  double dt_opt = 0.0;
  bool dt_opt_literal = true;  // computed from sys itself
  double dt_max = 0.0;
  double ratio_pct = 0.0;
  double min_margin = 0.0;
  std::vector<StabilityProbe> probes;  // bisection probes then scan points
};

/// Stability of a single dt: dt^2 lambda_max <= 4(1 - 1e-12) and
/// positive definiteness. Above the dense threshold positivity is decided
/// from the fine block (see README), lambda_max by Lanczos.
StabilityProbe probe_stability(const LumpedSystem& sys, const cheb::StabParams& params, double dt,
                               const LanczosOptions& opts, double fine_mu_max = -1.0,
                               const FineModalForm* modal = nullptr);

StabilityReport max_stable_dt(const LumpedSystem& sys, int p, double nu,
                              const StabilityOptions& opts = {});

struct CriticalStep {
  double dt = 0.0;
  double distance = 0.0;  // min over eigenvalues of min(|mu|, |1 - mu|)
  bool at_one = true;     // touches 1 (else 0)
  bool tangent = false;   // spectrum stays in [0, 1] on both sides; else a crossing
  Vec eigenvector;        // D^{-1/2} v, sup-norm 1, largest entry positive
};

struct CriticalScanOptions {
  double lo = 0.05;  // in units of h_c
  double hi = 1.05;
  int points = 4000;
  double eps = 1e-6;
  double nu = 0.0;
};

/// Time steps where an eigenvalue curve of (dt^2/4) A^{S,p,nu} touches or
/// crosses 0 or 1, ascending in dt. Dense, so sys must be under the dense cap.
std::vector<CriticalStep> critical_dt_scan(const LumpedSystem& sys, int p, double h_c,
                                           const CriticalScanOptions& opts = {});

struct BlockIdentityReport {
  double max_off_fine = 0.0;     // largest entry outside the fine-fine block
  double fine_block_tnorm = 0.0; // T-operator norm of the fine-fine block
  double fine_block_bound = 0.0; // (nu + 1) / (2 nu) dt^2, inf for nu = 0
};

BlockIdentityReport block_identity_check(const LumpedSystem& sys, const cheb::StabParams& params,
                                         double dt);

struct SpectrumRow {
  double dt_over_hc = 0.0;
  int index = 0;
  double value = 0.0;
};

std::vector<SpectrumRow> spectrum_sweep(const LumpedSystem& sys, int p, double nu, double h_c,
                                        const std::vector<double>& dt_grid);

struct CflConstants {
  double c_cont = 1.0;
  double c_coer = 1.0;
  double c_inv = 1.0;
};

struct CflDiagnostic {
  std::string mode;       // "user" or "spectral-surrogate"
  double kappa = 0.0;     // C_cont C_inv^2 (dt / h_c)^2
  double total_lhs = 0.0; // (3 + C_cont / c_coer) kappa
  double total_rhs = 0.0; // nu / (nu + 1)
  double weak_rhs = 0.0;  // (2 + nu / p^2) omega / p^2
  double weakest_rhs = 0.0;  // 4 e^{-nu}
  bool total_ok = false;
  bool weak_ok = false;
  bool weakest_ok = false;
};

/// Theoretical CFL conditions. Without constants, C_cont C_inv^2 is replaced
/// by lambda_max(A^S) h_c^2 / p^2 and c_coer by C_cont.
CflDiagnostic cfl_diagnostic(double lambda_max_AS, double h_c, const cheb::StabParams& params,
                             double dt, const std::optional<CflConstants>& constants = {});

}  // namespace ltswave
