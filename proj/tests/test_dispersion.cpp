#include <doctest.h>

#include <cmath>

#include "qlab/dispersion.hpp"
#include "qlab/error.hpp"

using namespace qlab;
using namespace qlab::dispersion;

namespace {
// Closed forms for the plateau's spreading speeds.
const double kSpeedOne = 7.0 / (3.0 * std::sqrt(3.0));
const double kSpeedZero = 2.0 / (3.0 * std::sqrt(6.0)) * (2.0 + std::sqrt(7.0)) * std::sqrt(std::sqrt(7.0) - 1.0);
}  // namespace

TEST_CASE("spreading speeds match their closed forms") {
  CHECK(std::abs(spreading_speed(1, 0.5).c_star - kSpeedOne) < 1e-10);
  CHECK(std::abs(spreading_speed(0, 0.5).c_star - kSpeedZero) < 1e-10);
  const auto s = spreading_speed(1, 0.5);
  CHECK(s.root.pinched);
  CHECK(std::abs(s.root.lambda.real()) < 1e-10);
  CHECK(std::abs(d_eval(s.root.lambda, s.root.nu, s.root.params)) < 1e-10);
  CHECK(std::abs(d_nu(s.root.nu, s.root.params)) < 1e-10);
}

TEST_CASE("spreading speed depends on k only through k ell") {
  // The dispersion relation sees q = k^2 ell^2.
  CHECK(spreading_speed(2, 0.25).c_star == doctest::Approx(spreading_speed(1, 0.5).c_star).epsilon(1e-12));
}

TEST_CASE("double roots: residuals vanish and roots are sorted by pinching") {
  DispersionParams p{0.5, 1, 1.2, +1};
  const auto roots = double_roots(p);
  REQUIRE(!roots.empty());
  for (const auto& r : roots) {
    CHECK(std::abs(d_eval(r.lambda, r.nu, p)) < 1e-9);
    CHECK(std::abs(d_nu(r.nu, p)) < 1e-9);
  }
  const auto lead = leading_branch_point(p);
  REQUIRE(lead.has_value());
  CHECK(lead->pinched);
  // Below c*_1 the branch point is unstable, above it is stable.
  CHECK(lead->lambda.real() > 0.0);
  const auto above = leading_branch_point({0.5, 1, 1.45, +1});
  REQUIRE(above.has_value());
  CHECK(above->lambda.real() < 0.0);
}

TEST_CASE("nu roots solve the dispersion relation") {
  DispersionParams p{0.5, 1, 1.3, -1};
  const cplx lambda{0.2, 0.4};
  for (const auto& nu : nu_roots(lambda, p)) CHECK(std::abs(d_eval(lambda, nu, p)) < 1e-10);
}

TEST_CASE("essential spectrum touches the origin only at ell = m = 0, quadratically") {
  std::vector<double> ms;
  for (int i = -400; i <= 400; ++i) ms.push_back(i * 0.01);
  for (int ell = 0; ell <= 3; ++ell) {
    const auto curve = essential_curve({0.5, ell, 1.35, -1}, ms);
    for (const auto& s : curve.samples) {
      CHECK(s.lambda.real() <= 1e-15);
      if (ell > 0 || s.param != 0.0) CHECK(s.lambda.real() < 0.0);
    }
  }
  const double m = 1e-4;
  const auto c = essential_curve({0.5, 0, 1.35, -1}, {m});
  CHECK(c.samples[0].lambda.real() / (m * m) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK_THROWS_AS(essential_curve({0.5, 0, 1.35, +1}, ms), InvalidArgument);
}

TEST_CASE("weighting shifts the essential spectrum to the left") {
  const std::vector<double> ms{-1.0, 0.0, 0.5, 2.0};
  const auto w = weighted_essential_curve({0.5, 0, 1.35, -1}, 0.2, ms);
  for (const auto& s : w.samples) CHECK(s.lambda.real() < 0.0);
}

TEST_CASE("absolute curve is anchored at the pinched branch point") {
  DispersionParams p{0.5, 1, 1.2, +1};
  const auto bp = leading_branch_point(p);
  REQUIRE(bp.has_value());
  const auto curve = absolute_curve(p, {0.0, 0.05, -0.05});
  REQUIRE(curve.samples.size() == 3);
  // Samples come back sorted by offset; the middle one is the branch point.
  CHECK(curve.samples[1].param == 0.0);
  CHECK(std::abs(curve.samples[1].lambda - bp->lambda) < 1e-8);
}

TEST_CASE("branch point track crosses at the spreading speed") {
  std::vector<double> cs;
  for (int i = 0; i <= 20; ++i) cs.push_back(1.25 + 0.01 * i);
  const auto t = branch_point_track(1, 0.5, cs);
  CHECK(t.neutral_c == doctest::Approx(kSpeedOne).epsilon(1e-6));
}

TEST_CASE("steady cubic roots: counts by half-plane") {
  const auto r = steady_cubic_roots(1.0, -1.0);
  CHECK(r.positive_real + r.negative_real + r.zero_real == 3);
  for (const auto& z : r.roots) CHECK(std::abs(z * z * z - z - 1.0) < 1e-12);
  CHECK(r.positive_real == 1);
}

TEST_CASE("invalid dispersion parameters are rejected") {
  CHECK_THROWS_AS(spreading_speed(1, -0.5), InvalidArgument);
  CHECK_THROWS_AS(double_roots({0.5, 1, 1.2, 3}), InvalidArgument);
}
