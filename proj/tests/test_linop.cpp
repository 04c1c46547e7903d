#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qlab/dispersion.hpp"
#include "qlab/eigensolve.hpp"
#include "qlab/error.hpp"
#include "qlab/linop.hpp"
#include "support.hpp"

using namespace qlab;
using qlab::test::pi;

namespace {

// Linearization with f_u = -1 everywhere: plateau h = 1 covering the box,
// linearized about the constant state u^2 = 0.4 where 3 gamma u^2 - 5 u^4 = -2.
Linearization constant_far_field(int n_x, double M) {
  ModelSpec m;
  m.K_halfwidth = 1000.0;
  auto lin = Linearization::trivial(make_grid(M, n_x, 8, m.k), m);
  lin.front.values.assign(n_x, std::sqrt(0.4));
  return lin;
}

}  // namespace

TEST_CASE("matrix-free application matches the assembled block") {
  const auto lin = test::small_problem(128);
  for (int ell : {0, 1, 2}) {
    const auto op = assemble_modal(ell, 1.3, 0.2, lin);
    const ModalApplier ap(lin, ell, 1.3, 0.2);
    auto v = ModalProfile::zeros(lin.grid, ell);
    for (int i = 0; i < lin.grid->n_x; ++i) v.values[i] = std::exp(-std::pow(lin.grid->x_nodes[i] / 8.0, 2)) * cplx(1.0, 0.1 * i);
    const auto w = ap.apply(v);
    Eigen::VectorXcd x(lin.grid->n_x);
    for (int i = 0; i < lin.grid->n_x; ++i) x[i] = v.values[i];
    const Eigen::VectorXcd y = op.matrix.cast<cplx>() * x;
    double e = 0, s = 0;
    for (int i = 0; i < lin.grid->n_x; ++i) e = std::max(e, std::abs(y[i] - w.values[i])), s = std::max(s, std::abs(y[i]));
    CHECK(e < 1e-10 * s);
  }
}

TEST_CASE("serial and parallel assembly agree") {
  const auto lin = test::small_problem(64);
  const auto a = assemble_modal(1, 1.3, 0.2, lin, Exec::serial);
  const auto b = assemble_modal(1, 1.3, 0.2, lin, Exec::parallel);
  CHECK(a.matrix == b.matrix);
}

TEST_CASE("opposite transverse indices give the same block") {
  const auto lin = test::small_problem(128);
  const auto p = assemble_modal(1, 1.33, 0.2, lin), m = assemble_modal(-1, 1.33, 0.2, lin);
  CHECK((p.matrix - m.matrix).norm() == 0.0);
}

TEST_CASE("weighting round-trips") {
  const auto lin = test::small_problem(128);
  auto v = ModalProfile::zeros(lin.grid, 1);
  for (int i = 0; i < lin.grid->n_x; ++i) v.values[i] = {std::cos(0.1 * i), std::sin(0.3 * i)};
  const auto back = unweight(weight_by(v, 0.2), 0.2);
  CHECK(test::max_abs_diff(v.values, back.values) < 1e-12);
  const WeightSpec w{0.2, 0.28, 10.0 * pi, 1.0};
  const auto back2 = unweight(weight_by(v, w), w);
  CHECK(test::max_abs_diff(v.values, back2.values) < 1e-12);
}

TEST_CASE("constant-coefficient block reproduces the dispersion relation") {
  const auto lin = constant_far_field(64, 2.0 * pi);
  const dispersion::DispersionParams p{lin.model.k, 1, 1.35, -1};
  const auto op = assemble_modal(1, 1.35, 0.0, lin);
  const auto eig = dense_eigs(op.matrix, 0.0, 64);
  const double unit = pi / lin.grid->half_width_M;
  for (int j = -15; j <= 15; ++j) {
    const cplx expected = dispersion::lambda_of_nu(cplx(0.0, j * unit), p);
    double best = 1e300;
    for (const auto& e : eig) best = std::min(best, std::abs(e.lambda - expected));
    CHECK(best < 1e-8 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("shift-invert Arnoldi agrees with the dense solver") {
  const auto lin = test::small_problem(256);
  const auto op = assemble_modal(1, 1.3, 0.2, lin);
  const cplx target = rightmost_shift(1, lin.model.k, 1.3);
  EigsOptions dense;
  dense.method = EigsOptions::Method::dense;
  EigsOptions krylov;
  krylov.method = EigsOptions::Method::shift_invert;
  const auto a = eigs_near(op, target, 4, dense);
  const auto b = eigs_near(op, target, 4, krylov);
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(a[i].lambda - b[i].lambda) < 1e-7);
    CHECK(b[i].residual < 1e-6);
  }
}

TEST_CASE("transverse instability switches off as the quench speeds up") {
  const auto lin = test::small_problem(256);
  const WeightSpec w{0.2, plateau_tilt(1, 1.33, lin), lin.model.K_halfwidth, 1.0};
  CHECK(leading_eigenvalue(1, 1.25, w, lin).real() > 0.0);
  CHECK(leading_eigenvalue(1, 1.42, w, lin).real() < 0.0);
}

TEST_CASE("Hopf point on a coarse grid: bracket, residuals, crossing identity") {
  const auto lin = test::small_problem(256);
  const auto h = hopf_locate(1, {1.25, 1.345}, lin);
  CHECK(h.c_star > 1.30);
  CHECK(h.c_star < 1.40);
  CHECK(h.omega_star > 0.5);
  CHECK(std::abs(h.lambda_star.real()) < 1e-8);
  CHECK(h.residual_right < 1e-8);
  CHECK(h.residual_left < 1e-8);
  CHECK(l2_norm(h.p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inner_product(h.p, h.psi_plus) - 1.0) < 1e-10);
  const auto cc = crossing_speed_check(h);
  CHECK(cc.relative_gap < 1e-6);
  // The crossing goes from unstable below c* to stable above.
  CHECK(h.mu_prime < 0.0);
  CHECK_FALSE(h.transversal);
}

TEST_CASE("Hopf bracket without a sign change is reported") {
  const auto lin = test::small_problem(128);
  CHECK_THROWS_AS(hopf_locate(1, {1.40, 1.45}, lin), NumericalError);
}

TEST_CASE("zero-mean bordering removes the mass mode") {
  const auto lin = test::small_problem(128);
  CHECK(zero_mode_margin(1.33, 0.2, lin) > 1e-6);
}

TEST_CASE("spectrum aggregation returns the requested count nearest the origin") {
  const auto lin = test::small_problem(128);
  const auto s = aggregate_spectrum({0, 1, 2}, 1.35, 0.2, 30, lin);
  CHECK(s.pairs.size() == 30);
  for (const auto& p : s.pairs) CHECK(p.residual < 1e-6);
}
