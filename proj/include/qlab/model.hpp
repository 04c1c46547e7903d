#pragma once

#include <numbers>
#include <utility>
#include <vector>

#include "qlab/spectral.hpp"

namespace qlab {

// Gaussian source profile amplitude * exp(-((x - center)/width)^2).
// The default amplitude of zero switches the source off.
struct SourceSpec {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;

  bool active() const { return amplitude != 0.0; }
  double operator()(double x) const;
};

// Quenched cubic-quintic nonlinearity f(x, u) = h(x) u + gamma u^3 - u^5 with
// top-hat heterogeneity h(x) = tanh(s (x - K)) tanh(-s (x + K)).
struct ModelSpec {
  double gamma = -1.0;
  double delta_steep = 5.0;
  double K_halfwidth = 10.0 * std::numbers::pi;
  double k = 0.5;
  double c = 1.35;
  double omega = 0.0;
  SourceSpec chi{};

  void validate() const;
};

struct FrontProfile {
  std::vector<double> values;
  std::pair<double, double> asymptotic_states{0.0, 0.0};
};

double quench_h(double x, const ModelSpec& spec);
double f_eval(double x, double u, const ModelSpec& spec);
double f_derivs(double x, double u, const ModelSpec& spec, int order);

// Pointwise samples on the grid.
std::vector<double> sample_h(const ChannelGrid& grid, const ModelSpec& spec);
std::vector<double> sample_source(const ChannelGrid& grid, const ModelSpec& spec);
std::vector<double> sample_f_derivative(const ChannelGrid& grid, const FrontProfile& front,
                                        const ModelSpec& spec, int order);

FrontProfile trivial_front(const ChannelGrid& grid);

// Max-norm of the steady y-independent residual
// -D0(D0 u + f(x,u)) + c u' + c chi.
double front_residual(const FrontProfile& front, const ChannelGrid& grid, const ModelSpec& spec);

}  // namespace qlab
