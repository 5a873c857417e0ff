#pragma once

#include <Eigen/Dense>
#include <random>

#include "ltswave/cheb.hpp"
#include "ltswave/fem.hpp"
#include "ltswave/mesh.hpp"

namespace testsupport {

using ltswave::Vec;

// Random interval mesh with n_cells cells, uneven spacing, random speeds
// and a random (possibly non-contiguous) fine set.
inline ltswave::Mesh random_interval(std::mt19937& gen, int n_cells) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> w(n_cells);
  double total = 0.0;
  for (auto& x : w) total += (x = u(gen));
  ltswave::Mesh m;
  m.dim = 1;
  double x = 0.0;
  m.vertices.push_back({0.0, 0.0});
  for (int i = 0; i < n_cells; ++i) {
    x += w[i] / total;
    m.vertices.push_back({i + 1 == n_cells ? 1.0 : x, 0.0});
    m.cells.push_back({i, i + 1, 0});
    m.fine.push_back(u(gen) < 0.5 ? 1 : 0);
    m.speed.push_back(0.5 + u(gen));
  }
  m.dirichlet = {0, n_cells};
  return m;
}

inline Vec random_vec(std::mt19937& gen, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

// Dense A^{S,p,nu} from the matrix form of the stage recursion, built
// independently of the matrix-free operator.
inline Eigen::MatrixXd dense_oracle(const ltswave::LumpedSystem& sys, const ltswave::cheb::StabParams& prm,
                                    double dt) {
  const int n = sys.n_dofs();
  const Eigen::MatrixXd A = sys.inv_mass.asDiagonal() * Eigen::MatrixXd(sys.K);
  Eigen::MatrixXd Pf = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) Pf(i, i) = sys.partition.fine_mask[i] ? 1.0 : 0.0;
  const Eigen::MatrixXd M = Pf * A;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd P0 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd P1 = 2.0 / (prm.omega * prm.delta) * I;
  for (int k = 1; k < prm.p; ++k) {
    const double bh = prm.beta_half[k - 1], b = prm.beta[k - 1];
    Eigen::MatrixXd P2 = 2 * bh * (prm.delta * I - dt * dt / prm.omega * M) * P1 - b * P0 + 4 / prm.omega * bh * I;
    P0 = P1;
    P1 = P2;
  }
  return A * P1;
}

}  // namespace testsupport
