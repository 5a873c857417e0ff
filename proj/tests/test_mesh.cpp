#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ltswave/mesh.hpp"

using namespace ltswave;

namespace {

double total_measure(const Mesh& m) {
  double s = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) s += cell_measure(m, c);
  return s;
}

std::map<std::pair<int, int>, int> edge_counts(const Mesh& m) {
  std::map<std::pair<int, int>, int> e;
  for (const auto& c : m.cells)
    for (int i = 0; i < 3; ++i) {
      int a = c[i], b = c[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      ++e[{a, b}];
    }
  return e;
}

}  // namespace

TEST_CASE("interval mesh") {
  const Mesh m = build_interval_mesh(0.25, 0.75, 1.0, 2);
  REQUIRE(m.n_vertices() == 6);
  const double xs[] = {0, 0.25, 0.5, 0.75, 0.875, 1.0};
  for (int i = 0; i < 6; ++i) CHECK(m.vertices[i][0] == doctest::Approx(xs[i]).epsilon(1e-15));
  int nf = 0;
  for (auto f : m.fine) nf += f;
  CHECK(nf == 2);
  CHECK(m.dirichlet == std::vector<int>{0, 5});

  const auto part = partition_dofs(m);
  std::set<double> fine_x;
  for (int d = 0; d < part.n_dofs(); ++d)
    if (part.fine_mask[d]) fine_x.insert(m.vertices[part.free_nodes[d]][0]);
  CHECK(fine_x == std::set<double>{0.75, 0.875});
  CHECK(part.n_fine == 2);
  CHECK(part.n_coarse == 2);
}

TEST_CASE("section 4 interval meshes") {
  const Mesh a = build_interval_mesh(1.0 / 40, 0.9, 1.0, 3);
  int nf = 0;
  for (auto f : a.fine) nf += f;
  CHECK(a.n_cells() - nf == 36);
  CHECK(nf == 12);

  const Mesh b = build_interval_mesh(0.01, 0.9, 1.0, 1000);
  nf = 0;
  for (auto f : b.fine) nf += f;
  CHECK(b.n_cells() - nf == 90);
  CHECK(nf == 10000);
  const auto st = mesh_stats(b);
  CHECK(st.h_c / st.h_f == doctest::Approx(1000.0).epsilon(1e-9));
  CHECK(total_measure(b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform interval without fine part") {
  const Mesh m = build_interval_mesh(0.1, 0.5, 0.5, 4);
  for (auto f : m.fine) CHECK(f == 0);
  const auto part = partition_dofs(m);
  CHECK(part.n_fine == 0);
  const auto st = mesh_stats(m);
  CHECK(st.quasi_uniformity_c == doctest::Approx(1.0));
  CHECK(st.shape_regularity == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_interval_mesh(0.1, 0.7, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_interval_mesh(0.0, 0.5, 0.7, 2), std::invalid_argument);
}

TEST_CASE("equilateral triangle shape regularity") {
  Mesh m;
  m.dim = 2;
  m.vertices = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
  m.cells = {{0, 1, 2}};
  m.fine = {0};
  m.speed = {1.0};
  m.dirichlet = {};
  CHECK(mesh_stats(m).shape_regularity == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("graded L-shape") {
  for (auto [N, beta] : {std::pair{2, 1.0}, std::pair{10, 1.5}, std::pair{12, 1.6}}) {
    const Mesh m = build_lshape_graded(N, beta);
    CHECK_NOTHROW(validate(m));
    CHECK(total_measure(m) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(m.n_cells() == 6 * N * N);
    // conformity: interior edges twice, boundary edges once
    int boundary = 0;
    for (const auto& [e, c] : edge_counts(m)) {
      CHECK((c == 1 || c == 2));
      boundary += c == 1;
    }
    CHECK(boundary == 8 * N);
    for (int c = 0; c < m.n_cells(); ++c) CHECK(cell_measure(m, c) > 0.0);
  }

  // beta = 1: layers have equal radial extent along each macro edge (ray 0 is y = 0.5, x >= 0.5)
  const Mesh u = build_lshape_graded(5, 1.0);
  std::vector<double> xs;
  for (const auto& v : u.vertices)
    if (std::abs(v[1] - 0.5) < 1e-14 && v[0] >= 0.5 - 1e-14) xs.push_back(v[0]);
  std::sort(xs.begin(), xs.end());
  REQUIRE(xs.size() == 6);
  for (std::size_t i = 1; i < xs.size(); ++i) CHECK(xs[i] - xs[i - 1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("L-shape fine region grows with the layer count") {
  const Mesh m = build_lshape_graded(16, 1.6);
  const auto part = partition_dofs(m);
  CHECK(part.n_fine > 0);
  std::vector<int> counts;
  for (int layers = 1; layers <= 4; ++layers) counts.push_back(partition_dofs(build_lshape_graded(16, 1.6, layers)).n_fine);
  // fine node count is (quadratic in layers for a full disc) monotone and
  // equal to the default for floor(sqrt(16)) = 4 layers
  for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] > counts[i - 1]);
  CHECK(counts[3] == part.n_fine);
  CHECK(partition_dofs(build_lshape_graded(16, 1.6, 0)).n_fine == 0);
}

TEST_CASE("partition is deterministic") {
  const auto a = partition_dofs(build_lshape_graded(8, 1.6));
  const auto b = partition_dofs(build_lshape_graded(8, 1.6));
  CHECK(a.free_nodes == b.free_nodes);
  CHECK(a.fine_mask == b.fine_mask);
  CHECK(a.node_to_dof == b.node_to_dof);
}

TEST_CASE("mesh text round trip") {
  for (const Mesh& m : {build_interval_mesh(0.1, 0.3, 0.6, 3, 1.7), build_lshape_graded(4, 1.6)}) {
    std::ostringstream os;
    write_mesh(os, m);
    std::istringstream is(os.str());
    const Mesh r = read_mesh(is);
    std::ostringstream os2;
    write_mesh(os2, r);
    CHECK(os.str() == os2.str());
    CHECK(r.vertices == m.vertices);
    CHECK(r.dirichlet == m.dirichlet);
  }
  std::istringstream bad("1 2 1\n0 0\n1 0\n0 5 0 1\n0\n");
  CHECK_THROWS_AS(read_mesh(bad), std::invalid_argument);
}

TEST_CASE("validate rejects broken meshes") {
  Mesh m = build_interval_mesh(0.25, 0.5, 0.5, 1);
  m.speed[0] = 0.0;
  CHECK_THROWS_AS(validate(m), std::invalid_argument);
  Mesh t;
  t.dim = 2;
  t.vertices = {{0, 0}, {1, 0}, {2, 0}};
  t.cells = {{0, 1, 2}};
  t.fine = {0};
  t.speed = {1.0};
  CHECK_THROWS_AS(validate(t), std::invalid_argument);
}
