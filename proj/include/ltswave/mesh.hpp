#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ltswave {

using Point = std::array<double, 2>;

/// Simplicial mesh of intervals (dim 1) or triangles (dim 2).
/// Intervals use the first two entries of each cell; the y coordinate is 0.
struct Mesh {
  int dim = 1;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::uint8_t> fine;  // per cell
  std::vector<double> speed;       // per cell
  std::vector<int> dirichlet;      // sorted vertex indices

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int verts_per_cell() const { return dim + 1; }
};

struct DofPartition {
  std::vector<int> free_nodes;          // dof -> vertex
  std::vector<int> node_to_dof;         // vertex -> dof, -1 for Dirichlet
  std::vector<std::uint8_t> fine_mask;  // per dof
  int n_coarse = 0;
  int n_fine = 0;

  int n_dofs() const { return static_cast<int>(free_nodes.size()); }
};

struct MeshStats {
  double h_max = 0.0;
  double h_c = 0.0;  // largest coarse element
  double h_f = 0.0;  // largest fine element (h_min when there is no fine part)
  double h_min = 0.0;
  double quasi_uniformity_c = 1.0;
  double shape_regularity = 1.0;
  double ratio_p_bound = 1.0;  // smallest coarse h over smallest h
};

/// Interval (0, 1) with spacing h_c outside [fine_lo, fine_hi] and h_c / p
/// inside. Both endpoints are Dirichlet. fine_lo == fine_hi gives a uniform
/// mesh with no fine cells.
Mesh build_interval_mesh(double h_c, double fine_lo, double fine_hi, int p,
                         double speed = 1.0);

/// L-shaped domain (0,1)^2 minus [0.5,1) x (0.5,1], split into six macro
/// triangles around (0.5, 0.5) with layer radii (k/N)^beta. Cells in the
/// innermost `fine_layers` strips are marked fine; the default -1 means
/// floor(sqrt(N)), 0 means none.
Mesh build_lshape_graded(int N, double beta, int fine_layers = -1);

DofPartition partition_dofs(const Mesh& mesh);

MeshStats mesh_stats(const Mesh& mesh);

/// Length or area of a cell (signed area is checked by validate).
double cell_measure(const Mesh& mesh, int cell);

/// Diameter of a cell.
double cell_diameter(const Mesh& mesh, int cell);

/// Throws std::invalid_argument on degenerate cells, bad indices,
/// non-conforming facets or inconsistent per-cell arrays.
void validate(const Mesh& mesh);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace ltswave
