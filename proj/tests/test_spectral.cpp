#include <doctest.h>

#include <cmath>
#include <random>

#include "qlab/error.hpp"
#include "qlab/fft.hpp"
#include "qlab/spectral.hpp"
#include "support.hpp"

using namespace qlab;
using qlab::test::pi;

namespace {

ModalProfile wave(GridPtr g, int ell, int j, cplx amp = 1.0) {
  auto u = ModalProfile::zeros(g, ell);
  const double xi = j * pi / g->half_width_M;
  for (int i = 0; i < g->n_x; ++i) u.values[i] = amp * std::exp(cplx(0.0, xi * g->x_nodes[i]));
  return u;
}

}  // namespace

TEST_CASE("grid rejects non power-of-two sizes") {
  CHECK_THROWS_AS(make_grid(10.0, 1000, 8, 0.5), InvalidArgument);
  CHECK_THROWS_AS(make_grid(10.0, 64, 6, 0.5), InvalidArgument);
  CHECK_THROWS_AS(make_grid(-1.0, 64, 8, 0.5), InvalidArgument);
  const auto g = make_grid(10.0, 64, 8, 0.5);
  CHECK(g->x_nodes.front() == doctest::Approx(-10.0));
  CHECK(g->dx() == doctest::Approx(20.0 / 64));
}

TEST_CASE("spectral derivative is exact on resolved waves") {
  const auto g = make_grid(4.0 * pi, 64, 8, 0.5);
  for (int j : {1, 5, -7, 20}) {
    const auto u = wave(g, 0, j);
    const double xi = j * pi / g->half_width_M;
    const auto d1 = deriv_x(u, 1), d2 = deriv_x(u, 2);
    double e1 = 0, e2 = 0;
    for (int i = 0; i < g->n_x; ++i) {
      e1 = std::max(e1, std::abs(d1.values[i] - cplx(0, xi) * u.values[i]));
      e2 = std::max(e2, std::abs(d2.values[i] + xi * xi * u.values[i]));
    }
    CHECK(e1 < 1e-11);
    CHECK(e2 < 1e-10);
  }
}

TEST_CASE("D_ell adds the transverse penalty") {
  const auto g = make_grid(4.0 * pi, 64, 8, 0.5);
  const auto u = wave(g, 2, 3);
  const auto d = apply_Dell(u);
  const double xi = 3 * pi / g->half_width_M, q = 0.25 * 4;
  for (int i = 0; i < g->n_x; ++i) CHECK(std::abs(d.values[i] + (xi * xi + q) * u.values[i]) < 1e-11);
}

TEST_CASE("Fourier coefficients round-trip and normalization") {
  const auto g = make_grid(3.0, 32, 8, 0.5);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  auto u = ModalProfile::zeros(g, 1);
  for (auto& v : u.values) v = {n(rng), n(rng)};
  const auto c = fourier_coefficients(u);
  const auto back = from_fourier_coefficients(g, 1, c);
  CHECK(test::max_abs_diff(u.values, back.values) < 1e-13);
  const auto w = wave(g, 0, 3, 2.0);
  const auto cw = fourier_coefficients(w);
  CHECK(std::abs(std::abs(cw[3]) - 2.0) < 1e-13);
}

TEST_CASE("inner product is sesquilinear and normalized") {
  const auto g = make_grid(5.0, 64, 8, 0.5);
  const auto one = wave(g, 0, 0);
  CHECK(l2_norm(one) == doctest::Approx(1.0));
  const auto a = wave(g, 0, 2), b = wave(g, 0, 5);
  CHECK(std::abs(inner_product(a, b)) < 1e-14);
  const cplx s{0.3, -1.2};
  CHECK(std::abs(inner_product(scaled(a, s), a) - s) < 1e-13);
  CHECK(std::abs(inner_product(a, scaled(a, s)) - std::conj(s)) < 1e-13);
}

TEST_CASE("dealiased product reproduces resolved products exactly") {
  const auto g = make_grid(2.0 * pi, 64, 8, 0.5);
  const auto a = wave(g, 1, 3), b = wave(g, -1, 4), c = wave(g, 0, -2);
  const std::vector<ModalProfile> f{a, b, c};
  const auto p = dealias_product(f);
  CHECK(p.ell == 0);
  const auto expect = wave(g, 0, 5);
  CHECK(test::max_abs_diff(p.values, expect.values) < 1e-12);
}

TEST_CASE("dealiased product drops modes beyond the grid band") {
  // Two waves whose product lands past Nyquist: the pointwise product aliases
  // onto a low mode, the padded product removes it.
  const auto g = make_grid(2.0 * pi, 32, 8, 0.5);
  const auto a = wave(g, 0, 12), b = wave(g, 0, 12);
  const std::vector<ModalProfile> f{a, b};
  const auto p = dealias_product(f);
  CHECK(l2_norm(p) < 1e-12);
}

TEST_CASE("field product matches pointwise for smooth fields") {
  const auto g = make_grid(2.0 * pi, 32, 8, 0.5);
  auto u = Field::zeros(g);
  for (int i = 0; i < g->n_x; ++i)
    for (int j = 0; j < g->n_y; ++j) u.at(i, j) = std::cos(g->x_nodes[i]) * std::sin(g->y_node(j));
  const std::vector<Field> f{u, u, u};
  const auto p = dealias_product(f);
  double e = 0;
  for (std::size_t i = 0; i < u.values.size(); ++i) e = std::max(e, std::abs(p.values[i] - std::pow(u.values[i], 3)));
  CHECK(e < 1e-13);
}

TEST_CASE("weights: profile, slope and tilt ramp") {
  WeightSpec w{0.2, 0.3, 10.0, 1.0};
  const double h = 1e-5;
  for (double x : {-20.0, -3.0, 0.0, 4.0, 25.0}) {
    const double fd = (w.exponent(x + h) - w.exponent(x - h)) / (2 * h);
    CHECK(w.slope(x) == doctest::Approx(fd).epsilon(1e-7));
  }
  // Far from the ramp only eta <x> remains, up to a constant.
  CHECK(w.slope(40.0) == doctest::Approx(0.2 * 40.0 / std::sqrt(1 + 1600.0)).epsilon(1e-9));
  const auto g = make_grid(30.0, 64, 8, 0.5);
  const auto prof = weight_profile(*g, 0.2);
  CHECK(prof.values[g->n_x / 2] == doctest::Approx(std::exp(0.2)));
}

TEST_CASE("FFT plans are cached per length and invert") {
  const auto& p = fft::Plan1d::get(16);
  CHECK(&p == &fft::Plan1d::get(16));
  std::vector<cplx> x(16), y(16), z(16);
  for (int i = 0; i < 16; ++i) x[i] = {std::sin(i * 1.0), std::cos(i * 0.3)};
  p.forward(x, y);
  p.backward(y, z);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(z[i] / 16.0 - x[i]) < 1e-14);
}
