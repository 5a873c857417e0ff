#pragma once

#include "ltswave/fem.hpp"

namespace ltswave {

struct OverlapIntegrals {
  double l2_sq = 0.0;    // integral of (f_a - f_b)^2
  double semi_sq = 0.0;  // integral of |grad f_a - grad f_b|^2
  double measure = 0.0;  // total measure of the common refinement
};

/// Integrates the difference of two P1 fields given by vertex values on two
/// meshes of the same domain. Cells are intersected pairwise (interval
/// overlap in 1D, convex polygon clipping in 2D), so the integrals are exact
/// up to rounding.
OverlapIntegrals integrate_difference(const Mesh& a, const Vec& nodal_a, const Mesh& b,
                                      const Vec& nodal_b);

}  // namespace ltswave
