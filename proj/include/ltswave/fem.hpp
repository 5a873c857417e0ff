#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

#include "ltswave/mesh.hpp"

namespace ltswave {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// P1 stiffness and vertex-lumped mass on the free (non-Dirichlet) nodes.
struct LumpedSystem {
  SpMat K;
  Vec mass;
  Vec inv_mass;
  DofPartition partition;

  // Rows of K that couple to at least one fine column, and K restricted to
  // those rows and the fine columns (stored with full column indexing).
  std::vector<int> fine_rows;
  SpMat K_fine;

  // Fine dofs and the rows of K belonging to them (all columns).
  std::vector<int> fine_dofs;
  SpMat K_fine_rows;

  int n_dofs() const { return static_cast<int>(mass.size()); }
};

LumpedSystem assemble(const Mesh& mesh);

/// A^S v = D^{-1} K v.
Vec apply_AS(const LumpedSystem& sys, const Vec& v);
void apply_AS(const LumpedSystem& sys, const Vec& v, Vec& out);

/// out += scale * A^S Pi_f v. Touches only sys.fine_rows.
void add_AS_fine(const LumpedSystem& sys, const Vec& v, double scale, Vec& out);

Vec project_fine(const LumpedSystem& sys, const Vec& v);
Vec project_coarse(const LumpedSystem& sys, const Vec& v);

/// (u, v)_T = sum_z d_z u_z v_z.
double t_inner(const LumpedSystem& sys, const Vec& u, const Vec& v);
double t_norm(const LumpedSystem& sys, const Vec& v);

using ScalarField = std::function<double(const Point&)>;
using GradField = std::function<Point(const Point&)>;

/// Nodal interpolant restricted to the free nodes.
Vec interpolate(const Mesh& mesh, const DofPartition& part, const ScalarField& f);

/// Free-node vector expanded to all vertices, zero on Dirichlet nodes.
Vec nodal_values(const Mesh& mesh, const DofPartition& part, const Vec& u);

struct ErrorNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;  // sqrt(l2^2 + h1_semi^2)
};

/// Errors against an analytic field: 3-point Gauss per interval, 3-point
/// mid-edge rule per triangle. Without `grad` the seminorm entries are NaN.
ErrorNorms error_norms(const Mesh& mesh, const DofPartition& part, const Vec& u_h,
                       const ScalarField& ref, const GradField& grad = {});

/// Errors against a P1 function on another mesh of the same domain,
/// integrated exactly on the common refinement of both meshes.
ErrorNorms error_norms(const Mesh& mesh, const DofPartition& part, const Vec& u_h,
                       const Mesh& ref_mesh, const DofPartition& ref_part, const Vec& u_ref);

}  // namespace ltswave
