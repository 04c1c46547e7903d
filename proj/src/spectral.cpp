#include "qlab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qlab/error.hpp"
#include "qlab/fft.hpp"

namespace qlab {

namespace {

void require_finite(std::span<const cplx> v, const char* what) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw InvalidArgument(std::string(what) + ": non-finite input");
}

void require_finite(std::span<const double> v, const char* what) {
  for (double z : v)
    if (!std::isfinite(z)) throw InvalidArgument(std::string(what) + ": non-finite input");
}

// Position of FFT-ordered index j of an n-point spectrum inside an N-point one.
// Returns -1 for the Nyquist slot, which the caller handles.
long padded_index(long j, long n, long N) {
  if (j < n / 2) return j;
  if (j == n / 2) return -1;
  return N - (n - j);
}

enum class Dir { forward, backward };

// In-place complex 2D transform of an (n0, n1) array, unnormalized.
void fft2(std::vector<cplx>& a, std::size_t n0, std::size_t n1, Dir dir) {
  const auto& p1 = fft::Plan1d::get(n1);
  const auto& p0 = fft::Plan1d::get(n0);
  std::vector<cplx> tmp(std::max(n0, n1)), out(std::max(n0, n1));
  for (std::size_t i = 0; i < n0; ++i) {
    std::span<cplx> row(a.data() + i * n1, n1);
    std::copy(row.begin(), row.end(), tmp.begin());
    if (dir == Dir::forward)
      p1.forward({tmp.data(), n1}, row);
    else
      p1.backward({tmp.data(), n1}, row);
  }
  for (std::size_t j = 0; j < n1; ++j) {
    for (std::size_t i = 0; i < n0; ++i) tmp[i] = a[i * n1 + j];
    if (dir == Dir::forward)
      p0.forward({tmp.data(), n0}, {out.data(), n0});
    else
      p0.backward({tmp.data(), n0}, {out.data(), n0});
    for (std::size_t i = 0; i < n0; ++i) a[i * n1 + j] = out[i];
  }
}

}  // namespace

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }

double ChannelGrid::y_node(int j) const { return 2.0 * std::numbers::pi * j / n_y; }

bool ChannelGrid::same_as(const ChannelGrid& o) const {
  return half_width_M == o.half_width_M && n_x == o.n_x && n_y == o.n_y && k == o.k;
}

GridPtr make_grid(double M, int n_x, int n_y, double k) {
  if (!(M > 0.0) || !std::isfinite(M)) throw InvalidArgument("make_grid: M must be positive");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("make_grid: k must be positive");
  if (!is_power_of_two(n_x) || n_x < 8)
    throw InvalidArgument("make_grid: n_x must be a power of two >= 8, got " + std::to_string(n_x));
  if (!is_power_of_two(n_y) || n_y < 8)
    throw InvalidArgument("make_grid: n_y must be a power of two >= 8, got " + std::to_string(n_y));
  auto g = std::make_shared<ChannelGrid>();
  g->half_width_M = M;
  g->n_x = n_x;
  g->n_y = n_y;
  g->k = k;
  const double dx = 2.0 * M / n_x;
  g->x_nodes.resize(n_x);
  g->xi_wavenumbers.resize(n_x);
  for (int j = 0; j < n_x; ++j) {
    g->x_nodes[j] = -M + j * dx;
    const int m = j < n_x / 2 ? j : j - n_x;
    g->xi_wavenumbers[j] = std::numbers::pi * m / M;
  }
  g->ell_indices.resize(n_y);
  for (int j = 0; j < n_y; ++j) g->ell_indices[j] = j < n_y / 2 ? j : j - n_y;
  return g;
}

Field Field::zeros(GridPtr grid) {
  Field f;
  f.values.assign(static_cast<std::size_t>(grid->n_x) * grid->n_y, 0.0);
  f.grid = std::move(grid);
  return f;
}

ModalProfile ModalProfile::zeros(GridPtr grid, int ell) {
  ModalProfile p;
  p.values.assign(grid->n_x, cplx{});
  p.grid = std::move(grid);
  p.ell = ell;
  return p;
}

std::vector<cplx> derivative_symbol(const ChannelGrid& grid, int order) {
  std::vector<cplx> s(grid.n_x);
  const cplx i{0.0, 1.0};
  for (int j = 0; j < grid.n_x; ++j) {
    if (order % 2 == 1 && j == grid.n_x / 2) {
      s[j] = 0.0;
      continue;
    }
    s[j] = std::pow(i * grid.xi_wavenumbers[j], order);
  }
  return s;
}

std::vector<cplx> fourier_coefficients(const ModalProfile& u) {
  const std::size_t n = u.values.size();
  std::vector<cplx> c(n);
  fft::Plan1d::get(n).forward(u.values, c);
  for (auto& z : c) z /= static_cast<double>(n);
  return c;
}

ModalProfile from_fourier_coefficients(GridPtr grid, int ell, std::span<const cplx> coeffs) {
  ModalProfile p = ModalProfile::zeros(grid, ell);
  fft::Plan1d::get(coeffs.size()).backward(coeffs, p.values);
  return p;
}

std::vector<cplx> fourier_coefficients(const Field& u) {
  const std::size_t n0 = u.grid->n_x, n1 = u.grid->n_y;
  std::vector<cplx> a(u.values.begin(), u.values.end());
  fft2(a, n0, n1, Dir::forward);
  const double scale = 1.0 / static_cast<double>(n0 * n1);
  for (auto& z : a) z *= scale;
  return a;
}

ModalProfile deriv_x(const ModalProfile& u, int order) {
  if (order < 1) throw InvalidArgument("deriv_x: order must be positive");
  require_finite(u.values, "deriv_x");
  auto c = fourier_coefficients(u);
  const auto s = derivative_symbol(*u.grid, order);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= s[j];
  return from_fourier_coefficients(u.grid, u.ell, c);
}

Field deriv_x(const Field& u, int order) {
  if (order < 1) throw InvalidArgument("deriv_x: order must be positive");
  require_finite(u.values, "deriv_x");
  const int nx = u.grid->n_x, ny = u.grid->n_y;
  Field out = Field::zeros(u.grid);
  out.time = u.time;
  ModalProfile line = ModalProfile::zeros(u.grid, 0);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) line.values[ix] = u.at(ix, iy);
    const auto d = deriv_x(line, order);
    for (int ix = 0; ix < nx; ++ix) out.at(ix, iy) = d.values[ix].real();
  }
  return out;
}

ModalProfile apply_Dell(const ModalProfile& u) { return apply_Dell(u, u.ell); }

ModalProfile apply_Dell(const ModalProfile& u, int ell) {
  auto out = deriv_x(u, 2);
  const double shift = u.grid->k * u.grid->k * ell * ell;
  for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] -= shift * u.values[j];
  out.ell = ell;
  return out;
}

namespace {

double log_cosh(double z) {
  const double a = std::abs(z);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double sech2(double z) {
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

}  // namespace

double WeightSpec::exponent(double x) const {
  double W = eta * japanese_bracket(x);
  if (tilt != 0.0)
    W += tilt * (log_cosh(edge * (x + span)) - log_cosh(edge * (x - span))) / (2.0 * edge);
  return W;
}

double WeightSpec::slope(double x) const {
  double g = eta * x / japanese_bracket(x);
  if (tilt != 0.0) g += 0.5 * tilt * (std::tanh(edge * (x + span)) - std::tanh(edge * (x - span)));
  return g;
}

double WeightSpec::curvature(double x) const {
  const double b = japanese_bracket(x);
  double gp = eta / (b * b * b);
  if (tilt != 0.0)
    gp += 0.5 * tilt * edge * (sech2(edge * (x + span)) - sech2(edge * (x - span)));
  return gp;
}

void WeightSpec::validate() const {
  if (!(eta >= 0.0)) throw InvalidArgument("weight: eta must be non-negative");
  if (!std::isfinite(tilt)) throw InvalidArgument("weight: tilt must be finite");
  if (!(span >= 0.0)) throw InvalidArgument("weight: span must be non-negative");
  if (!(edge > 0.0)) throw InvalidArgument("weight: edge steepness must be positive");
}

WeightProfile weight_profile(const ChannelGrid& grid, double eta) {
  return weight_profile(grid, WeightSpec{eta});
}

WeightProfile weight_profile(const ChannelGrid& grid, const WeightSpec& spec) {
  spec.validate();
  WeightProfile w;
  w.eta = spec.eta;
  w.values.resize(grid.n_x);
  for (int j = 0; j < grid.n_x; ++j) w.values[j] = std::exp(spec.exponent(grid.x_nodes[j]));
  return w;
}

cplx inner_product(const ModalProfile& u, const ModalProfile& v, const WeightProfile* weight) {
  if (!u.grid->same_as(*v.grid) || u.values.size() != v.values.size())
    throw InvalidArgument("inner_product: grid mismatch");
  if (weight && weight->values.size() != u.values.size())
    throw InvalidArgument("inner_product: weight/grid mismatch");
  cplx acc{};
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    cplx term = u.values[j] * std::conj(v.values[j]);
    if (weight) term *= weight->values[j] * weight->values[j];
    acc += term;
  }
  return acc / static_cast<double>(u.values.size());
}

double l2_norm(const ModalProfile& u) { return std::sqrt(inner_product(u, u).real()); }

ModalProfile conj(const ModalProfile& u) {
  ModalProfile out = u;
  out.ell = -u.ell;
  for (auto& z : out.values) z = std::conj(z);
  return out;
}

ModalProfile scaled(const ModalProfile& u, cplx s) {
  ModalProfile out = u;
  for (auto& z : out.values) z *= s;
  return out;
}

ModalProfile dealias_product(std::span<const ModalProfile> factors) {
  if (factors.empty()) throw InvalidArgument("dealias_product: no factors");
  if (factors.size() > static_cast<std::size_t>(kMaxProductFactors))
    throw InvalidArgument("dealias_product: at most five factors supported");
  const auto& grid = factors.front().grid;
  const long n = grid->n_x;
  const long N = kPaddingFactor * n;
  std::vector<cplx> fine(N, cplx{1.0, 0.0});
  std::vector<cplx> padded(N), phys(N);
  int ell = 0;
  for (const auto& f : factors) {
    if (!f.grid->same_as(*grid)) throw InvalidArgument("dealias_product: grid mismatch");
    require_finite(f.values, "dealias_product");
    ell += f.ell;
    const auto c = fourier_coefficients(f);
    std::fill(padded.begin(), padded.end(), cplx{});
    for (long j = 0; j < n; ++j) {
      const long p = padded_index(j, n, N);
      if (p >= 0) {
        padded[p] = c[j];
      } else {
        padded[n / 2] += 0.5 * c[j];
        padded[N - n / 2] += 0.5 * c[j];
      }
    }
    fft::Plan1d::get(N).backward(padded, phys);
    for (long j = 0; j < N; ++j) fine[j] *= phys[j];
  }
  fft::Plan1d::get(N).forward(fine, padded);
  std::vector<cplx> c(n);
  for (long j = 0; j < n; ++j) {
    const long p = padded_index(j, n, N);
    c[j] = p >= 0 ? padded[p] / static_cast<double>(N) : cplx{};
  }
  return from_fourier_coefficients(grid, ell, c);
}

Field dealias_product(std::span<const Field> factors) {
  if (factors.empty()) throw InvalidArgument("dealias_product: no factors");
  if (factors.size() > static_cast<std::size_t>(kMaxProductFactors))
    throw InvalidArgument("dealias_product: at most five factors supported");
  const auto& grid = factors.front().grid;
  const long n0 = grid->n_x, n1 = grid->n_y;
  const long N0 = kPaddingFactor * n0, N1 = kPaddingFactor * n1;
  std::vector<cplx> fine(N0 * N1, cplx{1.0, 0.0});
  std::vector<cplx> padded(N0 * N1);
  for (const auto& f : factors) {
    if (!f.grid->same_as(*grid)) throw InvalidArgument("dealias_product: grid mismatch");
    require_finite(f.values, "dealias_product");
    const auto c = fourier_coefficients(f);
    std::fill(padded.begin(), padded.end(), cplx{});
    for (long i = 0; i < n0; ++i) {
      const long pi = padded_index(i, n0, N0);
      for (long j = 0; j < n1; ++j) {
        const long pj = padded_index(j, n1, N1);
        // Split Nyquist coefficients symmetrically so real inputs stay real.
        const long is[2] = {pi >= 0 ? pi : n0 / 2, pi >= 0 ? -1 : N0 - n0 / 2};
        const long js[2] = {pj >= 0 ? pj : n1 / 2, pj >= 0 ? -1 : N1 - n1 / 2};
        const double wi = pi >= 0 ? 1.0 : 0.5, wj = pj >= 0 ? 1.0 : 0.5;
        for (long a : is) {
          if (a < 0) continue;
          for (long b : js) {
            if (b < 0) continue;
            padded[a * N1 + b] += wi * wj * c[i * n1 + j];
          }
        }
      }
    }
    fft2(padded, N0, N1, Dir::backward);
    for (std::size_t q = 0; q < fine.size(); ++q) fine[q] *= padded[q].real();
  }
  fft2(fine, N0, N1, Dir::forward);
  std::vector<cplx> c(n0 * n1);
  const double scale = 1.0 / static_cast<double>(N0 * N1);
  for (long i = 0; i < n0; ++i) {
    const long pi = padded_index(i, n0, N0);
    for (long j = 0; j < n1; ++j) {
      const long pj = padded_index(j, n1, N1);
      c[i * n1 + j] = (pi >= 0 && pj >= 0) ? fine[pi * N1 + pj] * scale : cplx{};
    }
  }
  fft2(c, n0, n1, Dir::backward);
  Field out = Field::zeros(grid);
  out.time = factors.front().time;
  for (std::size_t q = 0; q < c.size(); ++q) out.values[q] = c[q].real();
  return out;
}

ModalProfile resample(const ModalProfile& u, GridPtr target) {
  if (target->half_width_M != u.grid->half_width_M)
    throw InvalidArgument("resample: domain half-widths differ");
  const long n = u.grid->n_x, N = target->n_x;
  if (n == N) {
    ModalProfile out = u;
    out.grid = target;
    return out;
  }
  const auto c = fourier_coefficients(u);
  std::vector<cplx> d(N);
  const long m = std::min(n, N);
  for (long j = -m / 2 + 1; j < m / 2; ++j) d[(j + N) % N] = c[(j + n) % n];
  return from_fourier_coefficients(target, u.ell, d);
}

}  // namespace qlab
