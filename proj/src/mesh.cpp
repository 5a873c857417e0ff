#include "ltswave/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace ltswave {

namespace {

constexpr double kSpacingTol = 1e-9;

int count_steps(double length, double h, const char* what) {
  const double ratio = length / h;
  const long n = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > kSpacingTol * std::max(1.0, ratio))
    throw std::invalid_argument(std::string("spacing does not divide ") + what);
  return static_cast<int>(n);
}

double triangle_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double dist(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

Mesh build_interval_mesh(double h_c, double fine_lo, double fine_hi, int p,
                         double speed) {
  if (!(h_c > 0.0 && h_c <= 1.0)) throw std::invalid_argument("h_c must lie in (0, 1]");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (!(fine_lo >= 0.0 && fine_lo <= fine_hi && fine_hi <= 1.0))
    throw std::invalid_argument("fine region must satisfy 0 <= lo <= hi <= 1");
  if (!(speed > 0.0)) throw std::invalid_argument("wave speed must be positive");

  const double h_f = h_c / p;
  const int n_left = count_steps(fine_lo, h_c, "the left coarse part");
  const int n_fine = count_steps(fine_hi - fine_lo, h_f, "the fine part");
  const int n_right = count_steps(1.0 - fine_hi, h_c, "the right coarse part");
  if (n_left + n_fine + n_right < 2) throw std::invalid_argument("mesh needs at least two cells");

  Mesh m;
  m.dim = 1;
  m.vertices.reserve(n_left + n_fine + n_right + 1);
  auto push = [&](double x) { m.vertices.push_back({x, 0.0}); };
  for (int i = 0; i < n_left; ++i) push(i * h_c);
  for (int i = 0; i < n_fine; ++i) push(i == 0 ? fine_lo : fine_lo + i * h_f);
  for (int i = 0; i < n_right; ++i) push(i == 0 ? fine_hi : fine_hi + i * h_c);
  push(1.0);

  const int nc = m.n_vertices() - 1;
  m.cells.reserve(nc);
  for (int i = 0; i < nc; ++i) {
    m.cells.push_back({i, i + 1, -1});
    m.fine.push_back(i >= n_left && i < n_left + n_fine ? 1 : 0);
  }
  m.speed.assign(nc, speed);
  m.dirichlet = {0, nc};
  return m;
}

Mesh build_lshape_graded(int N, double beta, int fine_layers) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (!(beta >= 1.0)) throw std::invalid_argument("beta must be >= 1");
  if (fine_layers < 0) fine_layers = static_cast<int>(std::floor(std::sqrt(static_cast<double>(N))));

  const Point center{0.5, 0.5};
  const std::array<Point, 7> rays{{{1.0, 0.5}, {1.0, 0.0}, {0.5, 0.0}, {0.0, 0.0},
                                   {0.0, 0.5}, {0.0, 1.0}, {0.5, 1.0}}};

  // Structural numbering: center, then ray nodes (ray r, layer k), then
  // sector-interior nodes (sector s, layer k, j = 1..k-1).
  std::vector<Point> pts;
  std::vector<int> layer;
  std::vector<std::uint8_t> boundary;
  pts.push_back(center);
  layer.push_back(0);
  boundary.push_back(1);

  auto radius = [&](int k) { return std::pow(static_cast<double>(k) / N, beta); };
  std::vector<std::vector<int>> ray_id(7, std::vector<int>(N + 1, 0));
  for (int r = 0; r < 7; ++r) {
    for (int k = 1; k <= N; ++k) {
      const double s = radius(k);
      ray_id[r][k] = static_cast<int>(pts.size());
      pts.push_back({center[0] + s * (rays[r][0] - center[0]),
                     center[1] + s * (rays[r][1] - center[1])});
      layer.push_back(k);
      boundary.push_back(r == 0 || r == 6 || k == N ? 1 : 0);
    }
  }

  // node(s, k, j) for 0 <= j <= k in sector s.
  std::vector<std::vector<std::vector<int>>> inner(6);
  for (int s = 0; s < 6; ++s) {
    inner[s].resize(N + 1);
    const Point& v1 = rays[s];
    const Point& v2 = rays[s + 1];
    for (int k = 2; k <= N; ++k) {
      const double rad = radius(k);
      inner[s][k].resize(k + 1, -1);
      for (int j = 1; j < k; ++j) {
        const double t = static_cast<double>(j) / k;
        const double dx = (1.0 - t) * (v1[0] - center[0]) + t * (v2[0] - center[0]);
        const double dy = (1.0 - t) * (v1[1] - center[1]) + t * (v2[1] - center[1]);
        inner[s][k][j] = static_cast<int>(pts.size());
        pts.push_back({center[0] + rad * dx, center[1] + rad * dy});
        layer.push_back(k);
        boundary.push_back(k == N ? 1 : 0);
      }
    }
  }
  auto node = [&](int s, int k, int j) {
    if (k == 0) return 0;
    if (j == 0) return ray_id[s][k];
    if (j == k) return ray_id[s + 1][k];
    return inner[s][k][j];
  };

  std::vector<std::array<int, 3>> tris;
  std::vector<std::uint8_t> fine;
  auto add = [&](int a, int b, int c, int strip) {
    if (triangle_area(pts[a], pts[b], pts[c]) < 0.0) std::swap(b, c);
    tris.push_back({a, b, c});
    fine.push_back(strip <= fine_layers ? 1 : 0);
  };
  for (int s = 0; s < 6; ++s) {
    for (int k = 1; k <= N; ++k) {
      for (int j = 0; j < k; ++j) add(node(s, k, j), node(s, k, j + 1), node(s, k - 1, j), k);
      for (int j = 0; j + 1 < k; ++j)
        add(node(s, k - 1, j), node(s, k, j + 1), node(s, k - 1, j + 1), k);
    }
  }

  // Lexicographic renumbering by (x, y).
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pts[a] < pts[b]; });
  std::vector<int> relabel(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) relabel[order[i]] = static_cast<int>(i);

  Mesh m;
  m.dim = 2;
  m.vertices.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.vertices[relabel[i]] = pts[i];
  m.cells.reserve(tris.size());
  for (auto t : tris) m.cells.push_back({relabel[t[0]], relabel[t[1]], relabel[t[2]]});
  m.fine = std::move(fine);
  m.speed.assign(m.cells.size(), 1.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (boundary[i]) m.dirichlet.push_back(relabel[i]);
  std::sort(m.dirichlet.begin(), m.dirichlet.end());
  return m;
}

DofPartition partition_dofs(const Mesh& mesh) {
  const int nv = mesh.n_vertices();
  std::vector<std::uint8_t> is_dir(nv, 0);
  for (int d : mesh.dirichlet) is_dir.at(d) = 1;
  std::vector<std::uint8_t> touches_fine(nv, 0);
  const int vpc = mesh.verts_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c)
    if (mesh.fine[c])
      for (int a = 0; a < vpc; ++a) touches_fine[mesh.cells[c][a]] = 1;

  DofPartition part;
  part.node_to_dof.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (is_dir[v]) continue;
    part.node_to_dof[v] = static_cast<int>(part.free_nodes.size());
    part.free_nodes.push_back(v);
    part.fine_mask.push_back(touches_fine[v]);
    if (touches_fine[v])
      ++part.n_fine;
    else
      ++part.n_coarse;
  }
  return part;
}

double cell_measure(const Mesh& mesh, int cell) {
  const auto& c = mesh.cells[cell];
  if (mesh.dim == 1) return mesh.vertices[c[1]][0] - mesh.vertices[c[0]][0];
  return triangle_area(mesh.vertices[c[0]], mesh.vertices[c[1]], mesh.vertices[c[2]]);
}

double cell_diameter(const Mesh& mesh, int cell) {
  const auto& c = mesh.cells[cell];
  const auto& v = mesh.vertices;
  if (mesh.dim == 1) return std::abs(v[c[1]][0] - v[c[0]][0]);
  return std::max({dist(v[c[0]], v[c[1]]), dist(v[c[1]], v[c[2]]), dist(v[c[2]], v[c[0]])});
}

MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats st;
  double hc_min = INFINITY, hc_max = 0.0, hf_max = 0.0, h_min = INFINITY;
  double gamma = 1.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double h = cell_diameter(mesh, c);
    st.h_max = std::max(st.h_max, h);
    h_min = std::min(h_min, h);
    if (mesh.fine[c]) {
      hf_max = std::max(hf_max, h);
    } else {
      hc_min = std::min(hc_min, h);
      hc_max = std::max(hc_max, h);
    }
    if (mesh.dim == 2) {
      const auto& t = mesh.cells[c];
      const auto& v = mesh.vertices;
      const double perim = dist(v[t[0]], v[t[1]]) + dist(v[t[1]], v[t[2]]) + dist(v[t[2]], v[t[0]]);
      const double rho = 4.0 * std::abs(cell_measure(mesh, c)) / perim;  // inball diameter
      gamma = std::max(gamma, h / rho);
    }
  }
  st.h_min = h_min;
  if (hc_max == 0.0) {  // everything fine
    hc_max = st.h_max;
    hc_min = h_min;
  }
  st.h_c = hc_max;
  st.h_f = hf_max > 0.0 ? hf_max : h_min;
  st.quasi_uniformity_c = hc_max / hc_min;
  st.shape_regularity = gamma;
  st.ratio_p_bound = hc_min / h_min;
  return st;
}

void validate(const Mesh& mesh) {
  if (mesh.dim != 1 && mesh.dim != 2) throw std::invalid_argument("dim must be 1 or 2");
  const int nv = mesh.n_vertices();
  const int nc = mesh.n_cells();
  if (nc == 0) throw std::invalid_argument("mesh has no cells");
  if (static_cast<int>(mesh.fine.size()) != nc || static_cast<int>(mesh.speed.size()) != nc)
    throw std::invalid_argument("per-cell arrays do not match the cell count");
  const int vpc = mesh.verts_per_cell();
  std::map<std::pair<int, int>, int> facets;
  for (int c = 0; c < nc; ++c) {
    for (int a = 0; a < vpc; ++a) {
      const int v = mesh.cells[c][a];
      if (v < 0 || v >= nv) throw std::invalid_argument("cell references a missing vertex");
    }
    if (!(mesh.speed[c] > 0.0)) throw std::invalid_argument("wave speed must be positive");
    if (!(cell_measure(mesh, c) > 0.0))
      throw std::invalid_argument("cell " + std::to_string(c) + " has non-positive measure");
    if (mesh.dim == 1) {
      ++facets[{mesh.cells[c][0], -1}];
      ++facets[{mesh.cells[c][1], -1}];
    } else {
      for (int e = 0; e < 3; ++e) {
        int a = mesh.cells[c][e], b = mesh.cells[c][(e + 1) % 3];
        if (a > b) std::swap(a, b);
        ++facets[{a, b}];
      }
    }
  }
  for (const auto& [key, count] : facets)
    if (count > 2) throw std::invalid_argument("facet shared by more than two cells");
  for (int d : mesh.dirichlet)
    if (d < 0 || d >= nv) throw std::invalid_argument("Dirichlet index out of range");
}

}  // namespace ltswave
