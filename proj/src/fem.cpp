#include "ltswave/fem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ltswave/supermesh.hpp"

namespace ltswave {

namespace {

void check_size(const LumpedSystem& sys, const Vec& v, const char* what) {
  if (v.size() != sys.n_dofs())
    throw std::invalid_argument(std::string(what) + ": vector length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(sys.n_dofs()) + " dofs");
}

// Gradients of the barycentric coordinates of a triangle.
void barycentric_gradients(const Point& a, const Point& b, const Point& c, double g[3][2],
                           double& area) {
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  area = 0.5 * det;
  g[0][0] = (b[1] - c[1]) / det;
  g[0][1] = (c[0] - b[0]) / det;
  g[1][0] = (c[1] - a[1]) / det;
  g[1][1] = (a[0] - c[0]) / det;
  g[2][0] = (a[1] - b[1]) / det;
  g[2][1] = (b[0] - a[0]) / det;
}

}  // namespace

LumpedSystem assemble(const Mesh& mesh) {
  validate(mesh);
  LumpedSystem sys;
  sys.partition = partition_dofs(mesh);
  const auto& part = sys.partition;
  const int n = part.n_dofs();
  if (n == 0) throw std::invalid_argument("mesh has no free nodes");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * (mesh.dim == 1 ? 4 : 9));
  sys.mass = Vec::Zero(n);
  const int vpc = mesh.verts_per_cell();

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    const double c2 = mesh.speed[c] * mesh.speed[c];
    double ke[3][3];
    double lump;
    if (mesh.dim == 1) {
      const double h = cell_measure(mesh, c);
      ke[0][0] = ke[1][1] = c2 / h;
      ke[0][1] = ke[1][0] = -c2 / h;
      lump = 0.5 * h;
    } else {
      double g[3][2], area;
      barycentric_gradients(mesh.vertices[cell[0]], mesh.vertices[cell[1]],
                            mesh.vertices[cell[2]], g, area);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) ke[a][b] = c2 * area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
      lump = area / 3.0;
    }
    for (int a = 0; a < vpc; ++a) {
      const int ia = part.node_to_dof[cell[a]];
      if (ia < 0) continue;
      sys.mass[ia] += lump;
      for (int b = 0; b < vpc; ++b) {
        const int ib = part.node_to_dof[cell[b]];
        if (ib >= 0) trip.emplace_back(ia, ib, ke[a][b]);
      }
    }
  }
  sys.K.resize(n, n);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  sys.K.makeCompressed();
  sys.inv_mass = sys.mass.cwiseInverse();

  std::vector<Eigen::Triplet<double>> ftrip;
  for (int r = 0; r < n; ++r) {
    bool any = false;
    for (SpMat::InnerIterator it(sys.K, r); it; ++it) {
      if (!part.fine_mask[it.col()]) continue;
      if (!any) {
        any = true;
        sys.fine_rows.push_back(r);
      }
      ftrip.emplace_back(static_cast<int>(sys.fine_rows.size()) - 1, it.col(), it.value());
    }
  }
  sys.K_fine.resize(static_cast<int>(sys.fine_rows.size()), n);
  sys.K_fine.setFromTriplets(ftrip.begin(), ftrip.end());
  sys.K_fine.makeCompressed();

  std::vector<Eigen::Triplet<double>> rtrip;
  for (int r = 0; r < n; ++r) {
    if (!part.fine_mask[r]) continue;
    const int local = static_cast<int>(sys.fine_dofs.size());
    sys.fine_dofs.push_back(r);
    for (SpMat::InnerIterator it(sys.K, r); it; ++it) rtrip.emplace_back(local, it.col(), it.value());
  }
  sys.K_fine_rows.resize(static_cast<int>(sys.fine_dofs.size()), n);
  sys.K_fine_rows.setFromTriplets(rtrip.begin(), rtrip.end());
  sys.K_fine_rows.makeCompressed();
  return sys;
}

void apply_AS(const LumpedSystem& sys, const Vec& v, Vec& out) {
  check_size(sys, v, "apply_AS");
  out.noalias() = sys.K * v;
  out.array() *= sys.inv_mass.array();
}

Vec apply_AS(const LumpedSystem& sys, const Vec& v) {
  Vec out(v.size());
  apply_AS(sys, v, out);
  return out;
}

void add_AS_fine(const LumpedSystem& sys, const Vec& v, double scale, Vec& out) {
  const auto& rows = sys.fine_rows;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    double acc = 0.0;
    for (SpMat::InnerIterator it(sys.K_fine, i); it; ++it) acc += it.value() * v[it.col()];
    out[rows[i]] += scale * sys.inv_mass[rows[i]] * acc;
  }
}

Vec project_fine(const LumpedSystem& sys, const Vec& v) {
  check_size(sys, v, "project_fine");
  Vec out = v;
  for (int i = 0; i < v.size(); ++i)
    if (!sys.partition.fine_mask[i]) out[i] = 0.0;
  return out;
}

Vec project_coarse(const LumpedSystem& sys, const Vec& v) {
  check_size(sys, v, "project_coarse");
  Vec out = v;
  for (int i = 0; i < v.size(); ++i)
    if (sys.partition.fine_mask[i]) out[i] = 0.0;
  return out;
}

double t_inner(const LumpedSystem& sys, const Vec& u, const Vec& v) {
  check_size(sys, u, "t_inner");
  check_size(sys, v, "t_inner");
  return (sys.mass.array() * u.array() * v.array()).sum();
}

double t_norm(const LumpedSystem& sys, const Vec& v) { return std::sqrt(t_inner(sys, v, v)); }

Vec interpolate(const Mesh& mesh, const DofPartition& part, const ScalarField& f) {
  Vec out(part.n_dofs());
  for (int i = 0; i < part.n_dofs(); ++i) out[i] = f(mesh.vertices[part.free_nodes[i]]);
  return out;
}

Vec nodal_values(const Mesh& mesh, const DofPartition& part, const Vec& u) {
  if (u.size() != part.n_dofs()) throw std::invalid_argument("nodal_values: length mismatch");
  Vec out = Vec::Zero(mesh.n_vertices());
  for (int i = 0; i < part.n_dofs(); ++i) out[part.free_nodes[i]] = u[i];
  return out;
}

ErrorNorms error_norms(const Mesh& mesh, const DofPartition& part, const Vec& u_h,
                       const ScalarField& ref, const GradField& grad) {
  const Vec nodal = nodal_values(mesh, part, u_h);
  double l2 = 0.0, semi = 0.0;
  if (mesh.dim == 1) {
    const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const int a = mesh.cells[c][0], b = mesh.cells[c][1];
      const double xa = mesh.vertices[a][0], xb = mesh.vertices[b][0];
      const double h = xb - xa;
      const double slope = (nodal[b] - nodal[a]) / h;
      for (int q = 0; q < 3; ++q) {
        const double t = 0.5 * (1.0 + gx[q]);
        const Point x{xa + t * h, 0.0};
        const double e = (1.0 - t) * nodal[a] + t * nodal[b] - ref(x);
        l2 += 0.5 * h * gw[q] * e * e;
        if (grad) {
          const double ge = slope - grad(x)[0];
          semi += 0.5 * h * gw[q] * ge * ge;
        }
      }
    }
  } else {
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const auto& t = mesh.cells[c];
      const Point& p0 = mesh.vertices[t[0]];
      const Point& p1 = mesh.vertices[t[1]];
      const Point& p2 = mesh.vertices[t[2]];
      double g[3][2], area;
      barycentric_gradients(p0, p1, p2, g, area);
      const double gux = nodal[t[0]] * g[0][0] + nodal[t[1]] * g[1][0] + nodal[t[2]] * g[2][0];
      const double guy = nodal[t[0]] * g[0][1] + nodal[t[1]] * g[1][1] + nodal[t[2]] * g[2][1];
      for (int e = 0; e < 3; ++e) {
        const int i = e, j = (e + 1) % 3;
        const Point& pi = mesh.vertices[t[i]];
        const Point& pj = mesh.vertices[t[j]];
        const Point mid{0.5 * (pi[0] + pj[0]), 0.5 * (pi[1] + pj[1])};
        const double err = 0.5 * (nodal[t[i]] + nodal[t[j]]) - ref(mid);
        l2 += area / 3.0 * err * err;
        if (grad) {
          const Point gr = grad(mid);
          const double dx = gux - gr[0], dy = guy - gr[1];
          semi += area / 3.0 * (dx * dx + dy * dy);
        }
      }
    }
  }
  ErrorNorms out;
  out.l2 = std::sqrt(l2);
  if (grad) {
    out.h1_semi = std::sqrt(semi);
    out.h1 = std::sqrt(l2 + semi);
  } else {
    out.h1_semi = out.h1 = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

ErrorNorms error_norms(const Mesh& mesh, const DofPartition& part, const Vec& u_h,
                       const Mesh& ref_mesh, const DofPartition& ref_part, const Vec& u_ref) {
  if (mesh.dim != ref_mesh.dim) throw std::invalid_argument("reference mesh dimension differs");
  const OverlapIntegrals ov = integrate_difference(mesh, nodal_values(mesh, part, u_h), ref_mesh,
                                                   nodal_values(ref_mesh, ref_part, u_ref));
  ErrorNorms out;
  out.l2 = std::sqrt(ov.l2_sq);
  out.h1_semi = std::sqrt(ov.semi_sq);
  out.h1 = std::sqrt(ov.l2_sq + ov.semi_sq);
  return out;
}

}  // namespace ltswave
