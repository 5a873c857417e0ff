#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ltswave/mesh.hpp"

namespace ltswave {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_cells() << '\n';
  for (const auto& v : mesh.vertices) {
    os << fmt17(v[0]);
    if (mesh.dim == 2) os << ' ' << fmt17(v[1]);
    os << '\n';
  }
  const int vpc = mesh.verts_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int a = 0; a < vpc; ++a) os << mesh.cells[c][a] << ' ';
    os << static_cast<int>(mesh.fine[c]) << ' ' << fmt17(mesh.speed[c]) << '\n';
  }
  for (std::size_t i = 0; i < mesh.dirichlet.size(); ++i)
    os << (i ? " " : "") << mesh.dirichlet[i];
  os << '\n';
}

Mesh read_mesh(std::istream& is) {
  Mesh m;
  int nv = 0, nc = 0;
  if (!(is >> m.dim >> nv >> nc)) throw std::invalid_argument("bad mesh header");
  if ((m.dim != 1 && m.dim != 2) || nv < 0 || nc < 0)
    throw std::invalid_argument("bad mesh header values");
  m.vertices.resize(nv, {0.0, 0.0});
  for (auto& v : m.vertices) {
    if (!(is >> v[0])) throw std::invalid_argument("bad vertex line");
    if (m.dim == 2 && !(is >> v[1])) throw std::invalid_argument("bad vertex line");
  }
  const int vpc = m.verts_per_cell();
  m.cells.resize(nc, {-1, -1, -1});
  m.fine.resize(nc);
  m.speed.resize(nc);
  for (int c = 0; c < nc; ++c) {
    for (int a = 0; a < vpc; ++a)
      if (!(is >> m.cells[c][a])) throw std::invalid_argument("bad cell line");
    int flag = 0;
    if (!(is >> flag >> m.speed[c])) throw std::invalid_argument("bad cell line");
    m.fine[c] = flag ? 1 : 0;
  }
  std::string line;
  std::getline(is, line);  // rest of last cell line
  if (std::getline(is, line)) {
    std::istringstream ss(line);
    int d;
    while (ss >> d) m.dirichlet.push_back(d);
  }
  validate(m);
  return m;
}

}  // namespace ltswave
