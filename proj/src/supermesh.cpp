#include "ltswave/supermesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ltswave {

namespace {

struct LinearCell {
  Point origin;
  double value;  // value at origin
  double gx, gy;

  double at(const Point& x) const { return value + gx * (x[0] - origin[0]) + gy * (x[1] - origin[1]); }
};

LinearCell linear_triangle(const Mesh& m, const Vec& nodal, int c) {
  const auto& t = m.cells[c];
  const Point& a = m.vertices[t[0]];
  const Point& b = m.vertices[t[1]];
  const Point& d = m.vertices[t[2]];
  const double det = (b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]);
  const double fb = nodal[t[1]] - nodal[t[0]];
  const double fd = nodal[t[2]] - nodal[t[0]];
  LinearCell lc;
  lc.origin = a;
  lc.value = nodal[t[0]];
  lc.gx = (fb * (d[1] - a[1]) - fd * (b[1] - a[1])) / det;
  lc.gy = (fd * (b[0] - a[0]) - fb * (d[0] - a[0])) / det;
  return lc;
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Sutherland-Hodgman clipping of `poly` by the counter-clockwise triangle `clip`.
std::vector<Point> clip_polygon(std::vector<Point> poly, const std::array<Point, 3>& clip) {
  std::vector<Point> out;
  for (int e = 0; e < 3 && !poly.empty(); ++e) {
    const Point& p = clip[e];
    const Point& q = clip[(e + 1) % 3];
    out.clear();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& cur = poly[i];
      const Point& nxt = poly[(i + 1) % n];
      const double sc = cross(p, q, cur);
      const double sn = cross(p, q, nxt);
      if (sc >= 0.0) out.push_back(cur);
      if ((sc >= 0.0) != (sn >= 0.0)) {
        const double t = sc / (sc - sn);
        out.push_back({cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
      }
    }
    poly.swap(out);
  }
  return poly;
}

OverlapIntegrals integrate_1d(const Mesh& a, const Vec& fa, const Mesh& b, const Vec& fb) {
  auto sorted_cells = [](const Mesh& m) {
    std::vector<int> idx(m.n_cells());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) {
      return m.vertices[m.cells[i][0]][0] < m.vertices[m.cells[j][0]][0];
    });
    return idx;
  };
  const std::vector<int> ca = sorted_cells(a), cb = sorted_cells(b);
  const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

  auto eval = [](const Mesh& m, const Vec& f, int c, double x, double& slope) {
    const int i = m.cells[c][0], j = m.cells[c][1];
    const double x0 = m.vertices[i][0], x1 = m.vertices[j][0];
    slope = (f[j] - f[i]) / (x1 - x0);
    return f[i] + slope * (x - x0);
  };

  OverlapIntegrals r;
  std::size_t ia = 0, ib = 0;
  while (ia < ca.size() && ib < cb.size()) {
    const int c1 = ca[ia], c2 = cb[ib];
    const double lo = std::max(a.vertices[a.cells[c1][0]][0], b.vertices[b.cells[c2][0]][0]);
    const double hi1 = a.vertices[a.cells[c1][1]][0];
    const double hi2 = b.vertices[b.cells[c2][1]][0];
    const double hi = std::min(hi1, hi2);
    if (hi > lo) {
      const double len = hi - lo;
      for (int q = 0; q < 3; ++q) {
        const double x = lo + 0.5 * (1.0 + gx[q]) * len;
        double s1, s2;
        const double d = eval(a, fa, c1, x, s1) - eval(b, fb, c2, x, s2);
        r.l2_sq += 0.5 * len * gw[q] * d * d;
        r.semi_sq += 0.5 * len * gw[q] * (s1 - s2) * (s1 - s2);
      }
      r.measure += len;
    }
    if (hi1 <= hi2) ++ia;
    if (hi2 <= hi1) ++ib;
  }
  return r;
}

OverlapIntegrals integrate_2d(const Mesh& a, const Vec& fa, const Mesh& b, const Vec& fb) {
  // Bucket grid over the cells of b.
  double xmin = INFINITY, ymin = INFINITY, xmax = -INFINITY, ymax = -INFINITY;
  for (const auto& v : b.vertices) {
    xmin = std::min(xmin, v[0]);
    xmax = std::max(xmax, v[0]);
    ymin = std::min(ymin, v[1]);
    ymax = std::max(ymax, v[1]);
  }
  const int nb = b.n_cells();
  const int g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nb)) / 2.0));
  const double sx = (xmax - xmin) / g, sy = (ymax - ymin) / g;
  auto bucket = [&](double x, double y, int& i, int& j) {
    i = std::clamp(static_cast<int>((x - xmin) / sx), 0, g - 1);
    j = std::clamp(static_cast<int>((y - ymin) / sy), 0, g - 1);
  };
  auto bbox = [](const Mesh& m, int c, double& x0, double& y0, double& x1, double& y1) {
    x0 = y0 = INFINITY;
    x1 = y1 = -INFINITY;
    for (int k = 0; k < 3; ++k) {
      const Point& p = m.vertices[m.cells[c][k]];
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  };
  std::vector<std::vector<int>> grid(static_cast<std::size_t>(g) * g);
  for (int c = 0; c < nb; ++c) {
    double x0, y0, x1, y1;
    bbox(b, c, x0, y0, x1, y1);
    int i0, j0, i1, j1;
    bucket(x0, y0, i0, j0);
    bucket(x1, y1, i1, j1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) grid[static_cast<std::size_t>(i) * g + j].push_back(c);
  }

  std::vector<LinearCell> lb(nb);
  for (int c = 0; c < nb; ++c) lb[c] = linear_triangle(b, fb, c);

  OverlapIntegrals r;
  std::vector<int> stamp(nb, -1);
  for (int ca = 0; ca < a.n_cells(); ++ca) {
    const LinearCell la = linear_triangle(a, fa, ca);
    const auto& ta = a.cells[ca];
    const std::array<Point, 3> clip{a.vertices[ta[0]], a.vertices[ta[1]], a.vertices[ta[2]]};
    const double area_a = std::abs(cell_measure(a, ca));
    double x0, y0, x1, y1;
    bbox(a, ca, x0, y0, x1, y1);
    int i0, j0, i1, j1;
    bucket(x0, y0, i0, j0);
    bucket(x1, y1, i1, j1);
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        for (int cb : grid[static_cast<std::size_t>(i) * g + j]) {
          if (stamp[cb] == ca) continue;
          stamp[cb] = ca;
          const auto& tb = b.cells[cb];
          std::vector<Point> poly{b.vertices[tb[0]], b.vertices[tb[1]], b.vertices[tb[2]]};
          poly = clip_polygon(std::move(poly), clip);
          if (poly.size() < 3) continue;
          const double dgx = la.gx - lb[cb].gx, dgy = la.gy - lb[cb].gy;
          for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
            const Point& p0 = poly[0];
            const Point& p1 = poly[k];
            const Point& p2 = poly[k + 1];
            const double area = 0.5 * cross(p0, p1, p2);
            if (!(area > 1e-16 * area_a)) continue;
            const std::array<Point, 3> mids{{{0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])},
                                             {0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])},
                                             {0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1])}}};
            for (const Point& m : mids) {
              const double d = la.at(m) - lb[cb].at(m);
              r.l2_sq += area / 3.0 * d * d;
            }
            r.semi_sq += area * (dgx * dgx + dgy * dgy);
            r.measure += area;
          }
        }
      }
    }
  }
  return r;
}

}  // namespace

OverlapIntegrals integrate_difference(const Mesh& a, const Vec& nodal_a, const Mesh& b,
                                      const Vec& nodal_b) {
  if (a.dim != b.dim) throw std::invalid_argument("meshes differ in dimension");
  if (nodal_a.size() != a.n_vertices() || nodal_b.size() != b.n_vertices())
    throw std::invalid_argument("nodal vectors must cover all vertices");
  return a.dim == 1 ? integrate_1d(a, nodal_a, b, nodal_b) : integrate_2d(a, nodal_a, b, nodal_b);
}

}  // namespace ltswave
