#include "qlab/model.hpp"

#include <cmath>
#include <string>

#include "qlab/error.hpp"

namespace qlab {

double SourceSpec::operator()(double x) const {
  if (amplitude == 0.0) return 0.0;
  const double s = (x - center) / width;
  return amplitude * std::exp(-s * s);
}

void ModelSpec::validate() const {
  if (!(delta_steep > 0.0)) throw InvalidArgument("model: delta_steep must be positive");
  if (!(K_halfwidth > 0.0)) throw InvalidArgument("model: K_halfwidth must be positive");
  if (!(k > 0.0)) throw InvalidArgument("model: k must be positive");
  if (!std::isfinite(c) || !std::isfinite(gamma)) throw InvalidArgument("model: c and gamma must be finite");
  if (chi.active() && !(chi.width > 0.0)) throw InvalidArgument("model: source width must be positive");
}

double quench_h(double x, const ModelSpec& spec) {
  const double d = spec.delta_steep, K = spec.K_halfwidth;
  return std::tanh(d * (x - K)) * std::tanh(-d * (x + K));
}

double f_eval(double x, double u, const ModelSpec& spec) {
  const double u2 = u * u;
  return quench_h(x, spec) * u + spec.gamma * u2 * u - u2 * u2 * u;
}

double f_derivs(double x, double u, const ModelSpec& spec, int order) {
  const double u2 = u * u;
  switch (order) {
    case 1:
      return quench_h(x, spec) + 3.0 * spec.gamma * u2 - 5.0 * u2 * u2;
    case 2:
      return 6.0 * spec.gamma * u - 20.0 * u2 * u;
    case 3:
      return 6.0 * spec.gamma - 60.0 * u2;
    default:
      throw InvalidArgument("f_derivs: unsupported order " + std::to_string(order));
  }
}

std::vector<double> sample_h(const ChannelGrid& grid, const ModelSpec& spec) {
  std::vector<double> h(grid.n_x);
  for (int j = 0; j < grid.n_x; ++j) h[j] = quench_h(grid.x_nodes[j], spec);
  return h;
}

std::vector<double> sample_source(const ChannelGrid& grid, const ModelSpec& spec) {
  std::vector<double> s(grid.n_x);
  for (int j = 0; j < grid.n_x; ++j) s[j] = spec.chi(grid.x_nodes[j]);
  return s;
}

std::vector<double> sample_f_derivative(const ChannelGrid& grid, const FrontProfile& front,
                                        const ModelSpec& spec, int order) {
  if (front.values.size() != static_cast<std::size_t>(grid.n_x))
    throw InvalidArgument("front profile does not match grid");
  std::vector<double> out(grid.n_x);
  for (int j = 0; j < grid.n_x; ++j) out[j] = f_derivs(grid.x_nodes[j], front.values[j], spec, order);
  return out;
}

FrontProfile trivial_front(const ChannelGrid& grid) {
  FrontProfile f;
  f.values.assign(grid.n_x, 0.0);
  f.asymptotic_states = {0.0, 0.0};
  return f;
}

double front_residual(const FrontProfile& front, const ChannelGrid& grid, const ModelSpec& spec) {
  if (front.values.size() != static_cast<std::size_t>(grid.n_x))
    throw InvalidArgument("front profile does not match grid");
  auto gp = std::make_shared<ChannelGrid>(grid);
  ModalProfile u = ModalProfile::zeros(gp, 0);
  ModalProfile fu = ModalProfile::zeros(gp, 0);
  for (int j = 0; j < grid.n_x; ++j) {
    u.values[j] = front.values[j];
    fu.values[j] = f_eval(grid.x_nodes[j], front.values[j], spec);
  }
  auto inner = apply_Dell(u);
  for (int j = 0; j < grid.n_x; ++j) inner.values[j] += fu.values[j];
  const auto outer = apply_Dell(inner);
  const auto ux = deriv_x(u, 1);
  double worst = 0.0;
  for (int j = 0; j < grid.n_x; ++j) {
    const double r = -outer.values[j].real() + spec.c * ux.values[j].real() +
                     spec.c * spec.chi(grid.x_nodes[j]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace qlab
