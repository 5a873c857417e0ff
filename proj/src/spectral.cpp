#include "ltswave/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "ltswave/parallel.hpp"

namespace ltswave {

namespace {

constexpr double kStableFactor = 1.0 - 1e-12;
constexpr double kMinScaled = 4e-12;

EigExtremes dense_extremes(const DenseMat& sym) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
  EigExtremes r;
  r.lambda_min = es.eigenvalues()(0);
  r.lambda_max = es.eigenvalues()(es.eigenvalues().size() - 1);
  r.converged_min = r.converged_max = true;
  r.dense = true;
  return r;
}

DenseMat dense_from_apply(int n, const SymApply& apply) {
  DenseMat M(n, n);
  Vec e = Vec::Zero(n), col(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    apply(e, col);
    M.col(j) = col;
    e[j] = 0.0;
  }
  return 0.5 * (M + M.transpose());
}

// Symmetric fine-fine block D_f^{-1/2} K_ff D_f^{-1/2} as an operator on R^{n_f}.
SymApply fine_block_apply(const LumpedSystem& sys) {
  return [&sys](const Vec& x, Vec& y) {
    const auto& fd = sys.fine_dofs;
    Vec full = Vec::Zero(sys.n_dofs());
    for (int i = 0; i < static_cast<int>(fd.size()); ++i) full[fd[i]] = x[i] / std::sqrt(sys.mass[fd[i]]);
    y.noalias() = sys.K_fine_rows * full;
    for (int i = 0; i < static_cast<int>(fd.size()); ++i) y[i] /= std::sqrt(sys.mass[fd[i]]);
  };
}

// Solves (T - shift I) x = b for the symmetric tridiagonal T = (d, e) by
// Gaussian elimination with partial pivoting; b is overwritten by x.
void tridiag_solve(const Vec& d, const Vec& e, double shift, Vec& b) {
  const int n = static_cast<int>(d.size());
  const double tiny = 1e-300 + std::numeric_limits<double>::epsilon() * (d.cwiseAbs().maxCoeff() + 2 * (e.size() ? e.cwiseAbs().maxCoeff() : 0.0));
  Vec dd = d.array() - shift;
  Vec du = Vec::Zero(n), du2 = Vec::Zero(n);
  for (int i = 0; i + 1 < n; ++i) du[i] = e[i];
  for (int i = 0; i + 1 < n; ++i) {
    const double sub = e[i];
    if (std::abs(dd[i]) >= std::abs(sub)) {
      if (dd[i] == 0.0) dd[i] = tiny;
      const double f = sub / dd[i];
      dd[i + 1] -= f * du[i];
      b[i + 1] -= f * b[i];
    } else {
      const double f = dd[i] / sub;
      dd[i] = sub;
      const double t = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = t - f * dd[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
      const double bi = b[i];
      b[i] = b[i + 1];
      b[i + 1] = bi - f * b[i];
    }
  }
  if (dd[n - 1] == 0.0) dd[n - 1] = tiny;
  b[n - 1] /= dd[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2];
  for (int i = n - 3; i >= 0; --i) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i];
}


// Last component of the unit eigenvector of T for the Ritz value theta.
double last_component(const Vec& d, const Vec& e, double theta) {
  Vec x = Vec::Ones(d.size());
  for (int it = 0; it < 2; ++it) {
    tridiag_solve(d, e, theta, x);
    x.normalize();
  }
  return x[x.size() - 1];
}

EigExtremes finish(EigExtremes r, const LanczosOptions& opts, const char* what) {
  if (r.stopped_early) return r;
  if (!r.converged_max || (opts.require_min && !r.converged_min))
    throw std::runtime_error(std::string(what) + ": Lanczos did not converge in " +
                             std::to_string(opts.max_iter) + " iterations");
  return r;
}

}  // namespace

EigExtremes lanczos_extremes(int n, const SymApply& apply, const LanczosOptions& opts) {
  if (n <= 0) throw std::invalid_argument("lanczos: empty operator");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("lanczos: tol must be positive");
  EigExtremes r;
  if (n == 1) {
    Vec x = Vec::Ones(1), y(1);
    apply(x, y);
    r.lambda_min = r.lambda_max = y[0];
    r.converged_min = r.converged_max = true;
    return r;
  }

  std::mt19937 gen(opts.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec q(n), q_prev = Vec::Zero(n), w(n);
  for (int i = 0; i < n; ++i) q[i] = dist(gen);
  q.normalize();

  std::vector<double> alpha, beta;
  double beta_prev = 0.0;
  double last_max = std::numeric_limits<double>::quiet_NaN();
  int still_max = 0;
  double alpha_scale = 0.0;
  const int max_iter = std::min(opts.max_iter, 100000);

  for (int j = 0; j < max_iter; ++j) {
    apply(q, w);
    const double a = q.dot(w);
    w -= a * q + beta_prev * q_prev;
    const double b = w.norm();
    alpha.push_back(a);
    r.iterations = j + 1;

    const int k = j + 1;
    alpha_scale = std::max(alpha_scale, std::abs(a) + b);
    // no reorthogonalization, so k = n is not an invariant subspace; only a
    // vanishing beta is
    const bool breakdown = b <= 1e-13 * alpha_scale || b <= 1e-300;
    if (k % opts.check_every == 0 || breakdown || j + 1 == max_iter) {
      Eigen::SelfAdjointEigenSolver<DenseMat> es;
      Vec d = Eigen::Map<Vec>(alpha.data(), k);
      Vec e = Eigen::Map<Vec>(beta.data(), k - 1);
      es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
      const double th_min = es.eigenvalues()(0);
      const double th_max = es.eigenvalues()(k - 1);
      const double scale = std::max(std::abs(th_min), std::abs(th_max));
      const double res_min = k > 1 ? std::abs(b * last_component(d, e, th_min)) : b;
      const double res_max = k > 1 ? std::abs(b * last_component(d, e, th_max)) : b;
      r.lambda_min = th_min;
      r.lambda_max = th_max;
      const double drift_tol = 0.1 * opts.tol * scale;
      still_max = std::abs(th_max - last_max) <= drift_tol ? still_max + 1 : 0;
      last_max = th_max;
      const bool exact = breakdown;
      r.converged_max = exact || res_max <= opts.tol * scale || still_max >= 2;
      // the bottom Ritz value can creep for many steps; trust only the residual
      r.converged_min = exact || res_min <= opts.tol * scale;
      if (opts.stop_on_max && opts.stop_on_max(th_max)) {
        r.stopped_early = true;
        return r;
      }
      if (r.converged_max && (r.converged_min || !opts.require_min)) return r;
      if (breakdown) return r;
    }
    beta.push_back(b);
    q_prev.swap(q);
    q = w / b;
    beta_prev = b;
  }
  return r;
}

DenseMat dense_AS(const LumpedSystem& sys) {
  DenseMat K = DenseMat(sys.K);
  return sys.inv_mass.asDiagonal() * K;
}

DenseMat dense_stabilized(const StabilizedOperator& op, int cap) {
  const int n = op.n();
  if (n > cap)
    throw std::invalid_argument("dense materialization needs n <= " + std::to_string(cap) +
                                ", got " + std::to_string(n));
  DenseMat A(n, n);
  Vec e = Vec::Zero(n), col(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    A.col(j) = col;
    e[j] = 0.0;
  }
  return A;
}

DenseMat t_symmetrize(const DenseMat& A, const Vec& mass) {
  const Vec s = mass.cwiseSqrt();
  const Vec si = s.cwiseInverse();
  DenseMat S = s.asDiagonal() * A * si.asDiagonal();
  return 0.5 * (S + S.transpose());
}

Vec dense_eigenvalues(const DenseMat& A, const Vec& mass) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(t_symmetrize(A, mass), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
  return es.eigenvalues();
}

EigExtremes extreme_eigs(const StabilizedOperator& op, const LanczosOptions& opts) {
  const auto& sys = op.system();
  const int n = op.n();
  if (n <= opts.dense_below) return dense_extremes(t_symmetrize(dense_stabilized(op, n), sys.mass));
  const Vec s = sys.mass.cwiseSqrt();
  const Vec si = s.cwiseInverse();
  Vec tmp(n);
  SymApply apply = [&](const Vec& x, Vec& y) {
    tmp = si.cwiseProduct(x);
    op.apply(tmp, y);
    y.array() *= s.array();
  };
  EigExtremes r = lanczos_extremes(n, apply, opts);
  if ((!r.converged_max || (opts.require_min && !r.converged_min)) && !r.stopped_early &&
      n <= opts.dense_cap)
    return dense_extremes(t_symmetrize(dense_stabilized(op, opts.dense_cap), sys.mass));
  return finish(r, opts, "extreme_eigs");
}

EigExtremes extreme_eigs_AS(const LumpedSystem& sys, const LanczosOptions& opts) {
  const int n = sys.n_dofs();
  const Vec si = sys.mass.cwiseSqrt().cwiseInverse();
  SymApply apply = [&](const Vec& x, Vec& y) {
    y.noalias() = sys.K * si.cwiseProduct(x);
    y.array() *= si.array();
  };
  if (n <= opts.dense_below) return dense_extremes(dense_from_apply(n, apply));
  EigExtremes r = lanczos_extremes(n, apply, opts);
  if ((!r.converged_max || (opts.require_min && !r.converged_min)) && !r.stopped_early &&
      n <= opts.dense_cap)
    return dense_extremes(dense_from_apply(n, apply));
  return finish(r, opts, "extreme_eigs_AS");
}

double fine_block_lambda_max(const LumpedSystem& sys, const LanczosOptions& opts) {
  const int nf = static_cast<int>(sys.fine_dofs.size());
  if (nf == 0) return 0.0;
  const SymApply apply = fine_block_apply(sys);
  if (nf <= opts.dense_below) return dense_extremes(dense_from_apply(nf, apply)).lambda_max;
  LanczosOptions o = opts;
  o.require_min = false;
  o.stop_on_max = nullptr;
  EigExtremes r = lanczos_extremes(nf, apply, o);
  if (!r.converged_max && nf <= opts.dense_cap)
    return dense_extremes(dense_from_apply(nf, apply)).lambda_max;
  return finish(r, o, "fine_block_lambda_max").lambda_max;
}

std::optional<FineModalForm> FineModalForm::build(const LumpedSystem& sys, int max_coarse) {
  const int n = sys.n_dofs();
  const auto& mask = sys.partition.fine_mask;
  std::vector<int> fine_index(n, -1), coarse_index(n, -1), coarse;
  const std::vector<int>& fine = sys.fine_dofs;
  for (int i = 0; i < static_cast<int>(fine.size()); ++i) fine_index[fine[i]] = i;
  for (int i = 0; i < n; ++i)
    if (!mask[i]) {
      coarse_index[i] = static_cast<int>(coarse.size());
      coarse.push_back(i);
    }
  const int nf = static_cast<int>(fine.size()), nc = static_cast<int>(coarse.size());
  if (nf == 0 || nc == 0 || nc > max_coarse) return std::nullopt;

  const Vec si = sys.mass.cwiseSqrt().cwiseInverse();
  Vec diag = Vec::Zero(nf), off = Vec::Zero(std::max(nf - 1, 0));
  std::vector<int> coupling;
  std::vector<std::vector<std::pair<int, double>>> coupling_rows;
  for (int a = 0; a < nf; ++a) {
    const int r = fine[a];
    std::vector<std::pair<int, double>> row;
    for (SpMat::InnerIterator it(sys.K, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      const double v = it.value() * si[r] * si[c];
      if (mask[c]) {
        const int b = fine_index[c];
        if (b == a)
          diag[a] = v;
        else if (b == a + 1)
          off[a] = v;
        else if (b != a - 1 && v != 0.0)
          return std::nullopt;
      } else if (v != 0.0) {
        row.push_back({coarse_index[c], v});
      }
    }
    if (!row.empty()) {
      coupling.push_back(a);
      coupling_rows.push_back(std::move(row));
    }
  }

  FineModalForm f;
  const int m = static_cast<int>(coupling.size());
  f.mu_.resize(nf);
  f.Z_ = DenseMat::Zero(nf, m);
  f.Bcf_ = DenseMat::Zero(m, nc);
  for (int k = 0; k < m; ++k)
    for (const auto& [c, v] : coupling_rows[k]) f.Bcf_(k, c) = v;
  f.Bcc_ = DenseMat::Zero(nc, nc);
  for (int i = 0; i < nc; ++i)
    for (SpMat::InnerIterator it(sys.K, coarse[i]); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (!mask[c]) f.Bcc_(i, coarse_index[c]) = it.value() * si[coarse[i]] * si[c];
    }

  // Irreducible tridiagonal blocks: eigenvalues by implicit QL, eigenvector
  // entries at the coupling rows by two steps of inverse iteration.
  int start = 0;
  while (start < nf) {
    int end = start + 1;
    while (end < nf && off[end - 1] != 0.0) ++end;
    const int len = end - start;
    const Vec d = diag.segment(start, len);
    const Vec e = len > 1 ? Vec(off.segment(start, len - 1)) : Vec();
    Vec ev;
    if (len == 1) {
      ev = d;
    } else {
      Eigen::SelfAdjointEigenSolver<DenseMat> es;
      es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw std::runtime_error("tridiagonal eigensolve failed");
      ev = es.eigenvalues();
    }
    std::vector<int> local;
    for (int k = 0; k < m; ++k)
      if (coupling[k] >= start && coupling[k] < end) local.push_back(k);
    for (int j = 0; j < len; ++j) {
      f.mu_[start + j] = ev[j];
      if (local.empty()) continue;
      Vec x = Vec::Ones(len);
      if (len > 1) {
        for (int it = 0; it < 2; ++it) {
          tridiag_solve(d, e, ev[j], x);
          x.normalize();
        }
      }
      for (int k : local) f.Z_(start + j, k) = x[coupling[k] - start];
    }
    start = end;
  }
  return f;
}

double FineModalForm::min_fine_poly(const cheb::StabParams& params, double dt) const {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mu_.size(); ++i) lo = std::min(lo, cheb::stabilized_poly(params, dt * dt * mu_[i]));
  return lo;
}

double FineModalForm::lambda_max(const cheb::StabParams& params, double dt) const {
  const int nf = n_fine();
  Vec g(nf), r2(nf), h(nf);
  double gmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < nf; ++i) {
    const double R = cheb::reduced_poly(params, dt, mu_[i]);
    g[i] = mu_[i] * R;
    r2[i] = R * R;
    h[i] = (R - 1.0) / mu_[i];
    gmax = std::max(gmax, g[i]);
  }
  auto top = [&](double lam) {
    const Vec w = h.array() + r2.array() / (lam - g.array());
    const DenseMat C = Z_.transpose() * w.asDiagonal() * Z_;
    const DenseMat W = Bcc_ + Bcf_.transpose() * C * Bcf_;
    Eigen::SelfAdjointEigenSolver<DenseMat> es(W, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(W.rows() - 1);
  };
  const double scale = std::max(std::abs(gmax), Bcc_.cwiseAbs().rowwise().sum().maxCoeff());
  double lo = gmax + 1e-14 * scale;
  if (top(lo) <= lo) return gmax;
  double gap = scale;
  while (top(gmax + gap) > gmax + gap) gap *= 2.0;
  double hi = gmax + gap;
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (top(mid) > mid ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

StabilityProbe probe_stability(const LumpedSystem& sys, const cheb::StabParams& params, double dt,
                               const LanczosOptions& opts, double fine_mu_max, const FineModalForm* modal) {
  StabilityProbe pr;
  pr.dt = dt;
  const double dt2 = dt * dt;
  if (modal) {
    pr.scaled_min = std::numeric_limits<double>::quiet_NaN();
    pr.positive = modal->min_fine_poly(params, dt) > kMinScaled;
    pr.scaled_max = dt2 * modal->lambda_max(params, dt);
    pr.stable = pr.positive && pr.scaled_max <= 4.0 * kStableFactor;
    return pr;
  }
  const StabilizedOperator op(sys, params, dt);
  if (sys.n_dofs() <= opts.dense_below) {
    const Vec ev = dense_eigenvalues(dense_stabilized(op, sys.n_dofs()), sys.mass);
    pr.scaled_min = dt2 * ev(0);
    pr.scaled_max = dt2 * ev(ev.size() - 1);
    pr.positive = pr.scaled_min >= kMinScaled;
    pr.stable = pr.positive && pr.scaled_max <= 4.0 * kStableFactor;
    return pr;
  }

  // A^{S,p,nu} is congruent to diag(P(dt^2 B_ff)/dt^2, Schur complement of
  // A^S), so it is positive definite iff P > 0 on the spectrum of B_ff.
  // P > 0 on (0, 2 delta omega), and for odd p on all of (0, inf).
  pr.scaled_min = std::numeric_limits<double>::quiet_NaN();
  if (params.p % 2 == 1 || sys.fine_dofs.empty()) {
    pr.positive = true;
  } else {
    if (fine_mu_max < 0.0) fine_mu_max = fine_block_lambda_max(sys, opts);
    pr.positive = dt2 * fine_mu_max < 2.0 * params.delta * params.omega * kStableFactor;
  }
  LanczosOptions o = opts;
  o.require_min = false;
  o.stop_on_max = [dt2](double th) { return dt2 * th > 4.0 * kStableFactor; };
  const EigExtremes ex = extreme_eigs(op, o);
  pr.scaled_max = dt2 * ex.lambda_max;
  pr.stable = pr.positive && !ex.stopped_early && pr.scaled_max <= 4.0 * kStableFactor;
  return pr;
}

StabilityReport max_stable_dt(const LumpedSystem& sys, int p, double nu, const StabilityOptions& opts) {
  if (opts.scan_points < 0) throw std::invalid_argument("scan_points must be >= 0");
  if (!(opts.rel_width > 0.0)) throw std::invalid_argument("rel_width must be positive");
  const cheb::StabParams params = cheb::make_stab_params(p, nu);
  StabilityReport rep;
  rep.p = p;
  rep.nu = nu;
  if (opts.dt_opt) {
    if (!(*opts.dt_opt > 0.0)) throw std::invalid_argument("dt_opt must be positive");
    rep.dt_opt = *opts.dt_opt;
    rep.dt_opt_literal = false;
  } else {
    LanczosOptions o = opts.lanczos;
    o.require_min = false;
    rep.dt_opt = 2.0 / std::sqrt(extreme_eigs_AS(sys, o).lambda_max);
  }

  std::optional<FineModalForm> modal;
  double mu_max = -1.0;
  if (sys.n_dofs() > opts.lanczos.dense_below) {
    modal = FineModalForm::build(sys, opts.modal_max_coarse);
    if (!modal && p % 2 == 0) mu_max = fine_block_lambda_max(sys, opts.lanczos);
  }
  const FineModalForm* mp = modal ? &*modal : nullptr;

  double lo = 0.0, hi = 1.5 * rep.dt_opt;
  while (hi - lo > opts.rel_width * hi) {
    const double mid = 0.5 * (lo + hi);
    StabilityProbe pr = probe_stability(sys, params, mid, opts.lanczos, mu_max, mp);
    (pr.stable ? lo : hi) = mid;
    rep.probes.push_back(pr);
  }
  rep.dt_max = lo;
  rep.ratio_pct = 100.0 * rep.dt_max / rep.dt_opt;

  std::vector<StabilityProbe> scan(opts.scan_points);
  parallel_for(opts.scan_points, [&](int i) {
    const double dt = rep.dt_max * (i + 1) / opts.scan_points;
    scan[i] = probe_stability(sys, params, dt, opts.lanczos, mu_max, mp);
    scan[i].from_scan = true;
  });
  rep.probes.insert(rep.probes.end(), scan.begin(), scan.end());

  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& pr : rep.probes)
    if (pr.stable) rep.min_margin = std::min(rep.min_margin, 1.0 - pr.scaled_max / 4.0);
  return rep;
}

namespace {

struct SweepPoint {
  Vec mu;  // eigenvalues of (dt^2/4) A, ascending
  DenseMat vecs;
};

SweepPoint sweep_point(const LumpedSystem& sys, const cheb::StabParams& params, double dt,
                       bool vectors) {
  const StabilizedOperator op(sys, params, dt);
  const DenseMat S = t_symmetrize(dense_stabilized(op), sys.mass);
  Eigen::SelfAdjointEigenSolver<DenseMat> es(S, vectors ? Eigen::ComputeEigenvectors
                                                        : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
  SweepPoint sp;
  sp.mu = (0.25 * dt * dt) * es.eigenvalues();
  if (vectors) sp.vecs = es.eigenvectors();
  return sp;
}

bool inside_unit(const Vec& mu) {
  return mu.minCoeff() >= -1e-12 && mu.maxCoeff() <= 1.0 + 1e-12;
}

}  // namespace

std::vector<CriticalStep> critical_dt_scan(const LumpedSystem& sys, int p, double h_c,
                                           const CriticalScanOptions& opts) {
  if (!(h_c > 0.0)) throw std::invalid_argument("h_c must be positive");
  if (opts.points < 3 || !(opts.hi > opts.lo) || !(opts.lo > 0.0))
    throw std::invalid_argument("critical scan needs lo > 0, hi > lo and >= 3 points");
  if (sys.n_dofs() > kDenseCap) throw std::invalid_argument("critical scan is dense; n too large");
  const cheb::StabParams params = cheb::make_stab_params(p, opts.nu);

  const int m = opts.points;
  std::vector<double> grid(m);
  std::vector<Vec> mus(m);
  for (int i = 0; i < m; ++i) grid[i] = h_c * (opts.lo + (opts.hi - opts.lo) * i / (m - 1));
  parallel_for(m, [&](int i) { mus[i] = sweep_point(sys, params, grid[i], false).mu; });

  // Each eigenvalue branch is followed by index; a tangency is a local
  // minimum of min(mu_j, 1 - mu_j) in dt.
  auto branch = [](const Vec& mu, int j) { return std::min(std::abs(mu[j]), std::abs(1.0 - mu[j])); };
  std::vector<std::pair<double, int>> candidates;
  const int n = sys.n_dofs();
  for (int j = 0; j < n; ++j)
    for (int i = 1; i + 1 < m; ++i) {
      const double d = branch(mus[i], j);
      if (d <= branch(mus[i - 1], j) && d <= branch(mus[i + 1], j) && d < 0.05) candidates.push_back({grid[i], j});
    }
  std::sort(candidates.begin(), candidates.end());

  std::vector<CriticalStep> out;
  const double step = grid[1] - grid[0];
  for (const auto& [g, j] : candidates) {
    auto mu_j = [&, j = j](double dt) { return sweep_point(sys, params, dt, false).mu[j]; };
    const double mg = mu_j(g);
    const double target = std::abs(1.0 - mg) < std::abs(mg) ? 1.0 : 0.0;
    auto h = [&](double dt) { return mu_j(dt) - target; };
    double dt = g, d = std::abs(mg - target);
    const double a = g - step, b = g + step, ha = h(a), hg = mg - target, hb = h(b);
    if (ha * hg < 0.0 || hg * hb < 0.0) {
      const bool left = ha * hg < 0.0;
      boost::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(h, left ? a : g, left ? g : b, left ? ha : hg,
                                                       left ? hg : hb, boost::math::tools::eps_tolerance<double>(52),
                                                       iters);
      dt = 0.5 * (r.first + r.second);
      d = std::abs(h(dt));
    } else {
      auto f = [&](double x) { return std::abs(h(x)); };
      boost::uintmax_t iters = 200;
      std::tie(dt, d) = boost::math::tools::brent_find_minima(f, a, b, 52, iters);
    }
    if (!(d < opts.eps)) continue;
    bool seen = false;
    for (const auto& c : out) seen = seen || std::abs(c.dt - dt) <= 1e-9 * dt;
    if (seen) continue;
    const SweepPoint sp = sweep_point(sys, params, dt, true);
    CriticalStep cs;
    cs.dt = dt;
    cs.distance = branch(sp.mu, j);
    cs.tangent = inside_unit(sweep_point(sys, params, dt * (1.0 - 1e-4), false).mu) &&
                 inside_unit(sweep_point(sys, params, dt * (1.0 + 1e-4), false).mu);
    cs.at_one = std::abs(1.0 - sp.mu[j]) <= std::abs(sp.mu[j]);
    Vec eta = sys.mass.cwiseSqrt().cwiseInverse().cwiseProduct(sp.vecs.col(j));
    Eigen::Index imax;
    eta.cwiseAbs().maxCoeff(&imax);
    eta /= eta[imax];
    cs.eigenvector = eta;
    out.push_back(std::move(cs));
  }
  std::sort(out.begin(), out.end(), [](const CriticalStep& a, const CriticalStep& b) { return a.dt < b.dt; });
  return out;
}

BlockIdentityReport block_identity_check(const LumpedSystem& sys, const cheb::StabParams& params,
                                         double dt) {
  const int n = sys.n_dofs();
  if (n > kDenseCap) throw std::invalid_argument("block identity check is dense; n too large");
  const DenseMat A = dense_AS(sys);
  const DenseMat Ap = dense_stabilized(StabilizedOperator(sys, params, dt));
  Eigen::FullPivLU<DenseMat> lu_a(A), lu_p(Ap);
  if (!lu_a.isInvertible() || !lu_p.isInvertible())
    throw std::runtime_error("block identity check: singular operator");
  const DenseMat diff = lu_p.inverse() - lu_a.inverse();

  const auto& mask = sys.partition.fine_mask;
  BlockIdentityReport rep;
  const auto& fd = sys.fine_dofs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(mask[i] && mask[j])) rep.max_off_fine = std::max(rep.max_off_fine, std::abs(diff(i, j)));

  const int nf = static_cast<int>(fd.size());
  if (nf > 0) {
    DenseMat F(nf, nf);
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b)
        F(a, b) = std::sqrt(sys.mass[fd[a]]) * diff(fd[a], fd[b]) / std::sqrt(sys.mass[fd[b]]);
    Eigen::JacobiSVD<DenseMat> svd(F);
    rep.fine_block_tnorm = svd.singularValues()(0);
  }
  rep.fine_block_bound = params.nu > 0.0 ? (params.nu + 1.0) / (2.0 * params.nu) * dt * dt
                                         : std::numeric_limits<double>::infinity();
  return rep;
}

std::vector<SpectrumRow> spectrum_sweep(const LumpedSystem& sys, int p, double nu, double h_c,
                                        const std::vector<double>& dt_grid) {
  if (sys.n_dofs() > kDenseCap) throw std::invalid_argument("spectrum sweep is dense; n too large");
  const cheb::StabParams params = cheb::make_stab_params(p, nu);
  std::vector<Vec> mus(dt_grid.size());
  parallel_for(static_cast<int>(dt_grid.size()),
               [&](int i) { mus[i] = sweep_point(sys, params, dt_grid[i], false).mu; });
  std::vector<SpectrumRow> rows;
  rows.reserve(dt_grid.size() * sys.n_dofs());
  for (std::size_t g = 0; g < dt_grid.size(); ++g)
    for (int j = 0; j < mus[g].size(); ++j) rows.push_back({dt_grid[g] / h_c, j, mus[g][j]});
  return rows;
}

CflDiagnostic cfl_diagnostic(double lambda_max_AS, double h_c, const cheb::StabParams& params,
                             double dt, const std::optional<CflConstants>& constants) {
  const double p2 = static_cast<double>(params.p) * params.p;
  const double nu = params.nu;
  CflDiagnostic d;
  double cc_inv2, ratio;
  if (constants) {
    d.mode = "user";
    cc_inv2 = constants->c_cont * constants->c_inv * constants->c_inv;
    ratio = constants->c_cont / constants->c_coer;
  } else {
    d.mode = "spectral-surrogate";
    cc_inv2 = lambda_max_AS * h_c * h_c / p2;
    ratio = 1.0;
  }
  d.kappa = cc_inv2 * (dt / h_c) * (dt / h_c);
  d.total_lhs = (3.0 + ratio) * d.kappa;
  d.total_rhs = nu / (nu + 1.0);
  d.weak_rhs = (2.0 + nu / p2) * params.omega / p2;
  d.weakest_rhs = 4.0 * std::exp(-nu);
  d.total_ok = d.total_lhs <= d.total_rhs;
  d.weak_ok = d.kappa <= d.weak_rhs;
  d.weakest_ok = d.kappa <= d.weakest_rhs;
  return d;
}

}  // namespace ltswave
