#pragma once

#include <cmath>
#include <numbers>

#include "qlab/linop.hpp"
#include "qlab/model.hpp"
#include "qlab/spectral.hpp"

namespace qlab::test {

inline constexpr double pi = std::numbers::pi;

// Short plateau on a coarse box: cheap enough for unit tests, with the same
// qualitative spectrum as the production setup.
inline Linearization small_problem(int n_x = 256, double K = 10.0 * pi, double M = 30.0 * pi) {
  ModelSpec m;
  m.K_halfwidth = K;
  return Linearization::trivial(make_grid(M, n_x, 8, m.k), m);
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace qlab::test
