#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace qlab {

using cplx = std::complex<double>;

// Periodic box x in [-M, M) times the transverse circle y in [0, 2*pi),
// with y already rescaled by the transverse wavenumber k.
struct ChannelGrid {
  double half_width_M = 0.0;
  int n_x = 0;
  int n_y = 0;
  double k = 0.0;
  std::vector<double> x_nodes;          // -M + j*dx
  std::vector<double> xi_wavenumbers;   // FFT ordering: 0, 1, ..., n/2-1, -n/2, ..., -1 times pi/M
  std::vector<int> ell_indices;         // FFT ordering of transverse indices

  double dx() const { return 2.0 * half_width_M / n_x; }
  double y_node(int j) const;
  bool same_as(const ChannelGrid& other) const;
};

using GridPtr = std::shared_ptr<const ChannelGrid>;

GridPtr make_grid(double M, int n_x, int n_y, double k);
bool is_power_of_two(long n);

// Real field on the channel, row-major with y fastest.
struct Field {
  GridPtr grid;
  std::vector<double> values;
  double time = 0.0;

  static Field zeros(GridPtr grid);
  double& at(int ix, int iy) { return values[static_cast<std::size_t>(ix) * grid->n_y + iy]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(ix) * grid->n_y + iy]; }
};

// Complex x-profile carried by one transverse mode e^{i ell y}.
struct ModalProfile {
  GridPtr grid;
  int ell = 0;
  std::vector<cplx> values;

  static ModalProfile zeros(GridPtr grid, int ell);
  std::size_t size() const { return values.size(); }
};

// Weight exp(W(x)) with W = eta <x> + tilt * s(x). The ramp s has unit slope
// on [-span, span] and is flat outside, so a tilt rescales a finite region
// without touching the far field.
struct WeightSpec {
  double eta = 0.0;
  double tilt = 0.0;
  double span = 0.0;
  double edge = 1.0;  // steepness of the ramp's corners

  double exponent(double x) const;
  double slope(double x) const;      // W'
  double curvature(double x) const;  // W''
  void validate() const;
};

// Pointwise samples of a weight.
struct WeightProfile {
  double eta = 0.0;
  std::vector<double> values;
};

double japanese_bracket(double x);

// Spectral derivative of the trigonometric interpolant. The Nyquist mode is
// dropped for odd orders.
ModalProfile deriv_x(const ModalProfile& u, int order);
Field deriv_x(const Field& u, int order);

// (d^2/dx^2 - k^2 ell^2) applied to a modal profile.
ModalProfile apply_Dell(const ModalProfile& u);
// Same operator with an explicit transverse index (for profiles used in other modes).
ModalProfile apply_Dell(const ModalProfile& u, int ell);

WeightProfile weight_profile(const ChannelGrid& grid, double eta);
WeightProfile weight_profile(const ChannelGrid& grid, const WeightSpec& spec);

// (1/2M) * sum_j u_j conj(v_j) w_j^2 dx, i.e. the normalized Riemann sum.
cplx inner_product(const ModalProfile& u, const ModalProfile& v,
                   const WeightProfile* weight = nullptr);
double l2_norm(const ModalProfile& u);

// Pointwise product on a grid zero-padded by a factor of three, truncated
// back. The transverse index of the result is the sum of the factors' indices.
ModalProfile dealias_product(std::span<const ModalProfile> factors);
Field dealias_product(std::span<const Field> factors);
inline constexpr int kPaddingFactor = 3;
inline constexpr int kMaxProductFactors = 5;

ModalProfile conj(const ModalProfile& u);
ModalProfile scaled(const ModalProfile& u, cplx s);

// Normalized Fourier coefficients (forward FFT divided by n) in FFT ordering.
std::vector<cplx> fourier_coefficients(const ModalProfile& u);
ModalProfile from_fourier_coefficients(GridPtr grid, int ell, std::span<const cplx> coeffs);
// Full 2D normalized coefficients of a real field, shape (n_x, n_y).
std::vector<cplx> fourier_coefficients(const Field& u);

// Spectral interpolation/truncation onto a grid with the same M.
ModalProfile resample(const ModalProfile& u, GridPtr target);

// Multiplier (i xi)^order on the x-wavenumbers, Nyquist zeroed for odd orders.
std::vector<cplx> derivative_symbol(const ChannelGrid& grid, int order);

}  // namespace qlab
