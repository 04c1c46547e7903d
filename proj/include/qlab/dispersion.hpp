#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace qlab::dispersion {

using cplx = std::complex<double>;

// Constant-coefficient state h == h_inf, transverse mode ell.
// d(lambda, nu) = -s (s + h_inf) + c nu - lambda,  s = nu^2 - k^2 ell^2.
struct DispersionParams {
  double k = 0.5;
  int ell = 0;
  double c = 0.0;
  int h_inf = -1;

  void validate() const;
};

struct DoubleRoot {
  cplx lambda;
  cplx nu;
  bool pinched = false;
  DispersionParams params;
};

struct BranchSample {
  double param = 0.0;
  cplx lambda;
  cplx nu;
  bool pinched = false;
};

struct BranchCurve {
  enum class Label { essential, absolute, branch_point_track };
  Label label = Label::essential;
  std::vector<BranchSample> samples;
};

std::string to_string(BranchCurve::Label label);

cplx d_eval(cplx lambda, cplx nu, const DispersionParams& p);
cplx d_nu(cplx nu, const DispersionParams& p);    // first nu-derivative (lambda-free)
cplx d_nunu(cplx nu, const DispersionParams& p);  // second nu-derivative
// lambda for which nu is a root: -s(s + h_inf) + c nu.
cplx lambda_of_nu(cplx nu, const DispersionParams& p);

// Roots of a polynomial given by descending coefficients, via companion
// matrix eigenvalues and one Newton polish each.
std::vector<cplx> polynomial_roots(const std::vector<cplx>& descending);

// The four spatial roots of d(lambda, .) = 0 sorted by real part, descending.
std::array<cplx, 4> nu_roots(cplx lambda, const DispersionParams& p);

BranchCurve essential_curve(const DispersionParams& p, const std::vector<double>& m_values);
BranchCurve weighted_essential_curve(const DispersionParams& p, double eta,
                                     const std::vector<double>& m_values);

// Newton refinement of a double root from a seed in nu; lambda follows
// explicitly. Pinching is evaluated for the converged root.
DoubleRoot double_root(const DispersionParams& p, cplx nu_seed);
// All double roots: one per critical point of the quartic.
std::vector<DoubleRoot> double_roots(const DispersionParams& p);

// True when the two coalescing roots separate into opposite half-planes
// under lambda -> lambda + rho, rho -> +infinity.
bool pinching_check(const DoubleRoot& root);

struct SpreadingSpeed {
  double c_star = 0.0;
  DoubleRoot root;
};

// Largest c for which a pinched double root sits on the imaginary axis.
SpreadingSpeed spreading_speed(int ell, double k, int h_inf = +1);

// Pinched double root with largest real part (the branch point governing
// onset on a large plateau); nullopt if none is pinched.
std::optional<DoubleRoot> leading_branch_point(const DispersionParams& p);

BranchCurve absolute_curve(const DispersionParams& p, const std::vector<double>& gamma_offsets);

struct BranchPointTrack {
  BranchCurve curve;
  double neutral_c = 0.0;
};
BranchPointTrack branch_point_track(int ell, double k, const std::vector<double>& c_values,
                                    int h_inf = +1);

struct CubicRoots {
  std::array<cplx, 3> roots;
  int positive_real = 0;
  int negative_real = 0;
  int zero_real = 0;
};
// Roots of nu^3 + f' nu - c = 0.
CubicRoots steady_cubic_roots(double c, double f_prime);

}  // namespace qlab::dispersion
