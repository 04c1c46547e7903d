#include "qlab/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "qlab/error.hpp"
#include "qlab/lyapunov_schmidt.hpp"

namespace qlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int signed_index(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace

double default_stabilizer(const ModelSpec& model) {
  const double g = model.gamma;
  const double plateau_sq = 0.5 * (g + std::sqrt(g * g + 4.0));
  const double u_max = 1.1 * std::sqrt(plateau_sq);
  double worst = 1.0;
  constexpr int kScan = 400;
  for (int i = 0; i <= kScan; ++i) {
    const double u = u_max * i / kScan, u2 = u * u;
    for (double h : {-1.0, 1.0}) worst = std::max(worst, -(h + 3.0 * g * u2 - 5.0 * u2 * u2));
  }
  return worst;
}

Simulator::Simulator(GridPtr grid, ModelSpec model, FrontProfile front, SimOptions opts)
    : grid_(std::move(grid)),
      model_(model),
      front_(std::move(front)),
      opts_(opts),
      nx_(grid_->n_x),
      ny_(grid_->n_y),
      nyc_(grid_->n_y / 2 + 1),
      px_(kPaddingFactor * grid_->n_x),
      py_(kPaddingFactor * grid_->n_y),
      pyc_(kPaddingFactor * grid_->n_y / 2 + 1),
      plan_(grid_->n_x, grid_->n_y),
      pad_plan_(static_cast<std::size_t>(kPaddingFactor) * grid_->n_x,
                static_cast<std::size_t>(kPaddingFactor) * grid_->n_y) {
  model_.validate();
  if (!(opts_.dt > 0.0)) throw InvalidArgument("Simulator: dt must be positive");
  if (front_.values.empty()) front_ = trivial_front(*grid_);
  if (static_cast<int>(front_.values.size()) != nx_)
    throw InvalidArgument("Simulator: front profile does not match the grid");
  stab_ = opts_.stabilizer.value_or(default_stabilizer(model_));

  const std::size_t ns = static_cast<std::size_t>(nx_) * nyc_;
  sigma_.resize(ns);
  implicit_.resize(ns);
  const double k2 = grid_->k * grid_->k;
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < nyc_; ++j) {
      const double xi = grid_->xi_wavenumbers[i];
      sigma_[i * nyc_ + j] = xi * xi + k2 * j * j;
    }

  const auto h = sample_h(*grid_, model_);
  h_shift_.resize(nx_ * static_cast<std::size_t>(ny_));
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < ny_; ++j) h_shift_[i * ny_ + j] = h[i] + stab_;

  real_work_.resize(nx_ * static_cast<std::size_t>(ny_));
  pad_real_.resize(static_cast<std::size_t>(px_) * py_);
  pad_out_.resize(pad_real_.size());
  pad_zero_.assign(pad_real_.size(), 0.0);
  coeffs_.resize(ns);
  nonlinear_.resize(ns);
  pad_coeffs_.resize(static_cast<std::size_t>(px_) * pyc_);

  source_hat_.assign(ns, cplx{});
  if (model_.chi.active()) {
    const auto chi = sample_source(*grid_, model_);
    Field s = Field::zeros(grid_);
    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < ny_; ++j) s.at(i, j) = chi[i];
    to_spectral(s, source_hat_);
  }
  SimState dummy;
  set_speed(model_.c, dummy);
}

void Simulator::set_speed(double c, SimState& state) {
  model_.c = c;
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < nyc_; ++j) {
      const std::size_t id = static_cast<std::size_t>(i) * nyc_ + j;
      const double s = sigma_[id];
      implicit_[id] = {-s * s - stab_ * s, c * grid_->xi_wavenumbers[i]};
    }
  state.prev_nonlinear.clear();
}

SimState Simulator::make_state(Field field) const {
  if (!field.grid || !field.grid->same_as(*grid_))
    throw InvalidArgument("Simulator: field grid does not match");
  SimState s;
  s.t = field.time;
  s.field = std::move(field);
  return s;
}

void Simulator::to_spectral(const Field& u, std::vector<cplx>& coeffs) {
  std::copy(u.values.begin(), u.values.end(), real_work_.begin());
  coeffs.resize(static_cast<std::size_t>(nx_) * nyc_);
  plan_.forward(real_work_, coeffs);
  const double norm = 1.0 / (static_cast<double>(nx_) * ny_);
  for (auto& v : coeffs) v *= norm;
}

void Simulator::to_physical(std::vector<cplx> coeffs, Field& u) {
  u.values.resize(static_cast<std::size_t>(nx_) * ny_);
  plan_.backward(coeffs, u.values);
}

std::vector<cplx> Simulator::transverse_one(const Field& u) {
  to_spectral(u, coeffs_);
  std::vector<cplx> out(nx_);
  for (int i = 0; i < nx_; ++i) out[i] = coeffs_[static_cast<std::size_t>(i) * nyc_ + 1];
  return out;
}

double Simulator::deviation_norm(const Field& u) const {
  double acc = 0.0;
  for (int i = 0; i < nx_; ++i) {
    const double base = front_.values[i];
    for (int j = 0; j < ny_; ++j) {
      const double d = u.values[static_cast<std::size_t>(i) * ny_ + j] - base;
      acc += d * d;
    }
  }
  return std::sqrt(acc / (static_cast<double>(nx_) * ny_));
}

std::pair<double, double> Simulator::deviation_energy_split(const Field& u) {
  Field d = u;
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < ny_; ++j) d.at(i, j) -= front_.values[i];
  to_spectral(d, coeffs_);
  // Parseval on the half-complex layout: interior columns count twice.
  double e0 = 0.0, rest = 0.0;
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < nyc_; ++j) {
      const double e = std::norm(coeffs_[static_cast<std::size_t>(i) * nyc_ + j]);
      if (j == 0)
        e0 += e;
      else
        rest += (j == ny_ / 2 ? 1.0 : 2.0) * e;
    }
  return {e0, rest};
}

void Simulator::explicit_term(const Field& u, const std::vector<cplx>& uh, std::vector<cplx>& out) {
  // (h + s) u on the collocation grid, the same discretization the linear
  // operator uses for the heterogeneous term.
  const std::size_t n = real_work_.size();
  for (std::size_t i = 0; i < n; ++i) real_work_[i] = h_shift_[i] * u.values[i];
  plan_.forward(real_work_, out);
  const double norm = 1.0 / (static_cast<double>(nx_) * ny_);
  for (auto& v : out) v *= norm;

  // gamma u^3 - u^5 on the padded grid, which is exact for quintic products.
  std::fill(pad_coeffs_.begin(), pad_coeffs_.end(), cplx{});
  for (int i = 0; i < nx_; ++i) {
    if (i == nx_ / 2) continue;
    const int m = signed_index(i, nx_);
    const int row = m >= 0 ? m : m + px_;
    for (int j = 0; j < ny_ / 2; ++j)
      pad_coeffs_[static_cast<std::size_t>(row) * pyc_ + j] = uh[static_cast<std::size_t>(i) * nyc_ + j];
  }
  pad_plan_.backward(pad_coeffs_, pad_real_);
  quintic_response(pad_zero_, pad_real_, model_.gamma, pad_out_, opts_.exec);
  pad_plan_.forward(pad_out_, pad_coeffs_);
  const double pnorm = 1.0 / (static_cast<double>(px_) * py_);
  for (int i = 0; i < nx_; ++i) {
    if (i == nx_ / 2) continue;
    const int m = signed_index(i, nx_);
    const int row = m >= 0 ? m : m + px_;
    for (int j = 0; j < ny_ / 2; ++j)
      out[static_cast<std::size_t>(i) * nyc_ + j] +=
          pnorm * pad_coeffs_[static_cast<std::size_t>(row) * pyc_ + j];
  }

  // -Delta_k acts as multiplication by sigma.
  const double c = model_.c;
  for (std::size_t id = 0; id < out.size(); ++id) out[id] = sigma_[id] * out[id] + c * source_hat_[id];
}

void Simulator::project(std::vector<cplx>& uh) const {
  for (int j = 0; j < nyc_; ++j) uh[static_cast<std::size_t>(nx_ / 2) * nyc_ + j] = 0.0;
  for (int i = 0; i < nx_; ++i) uh[static_cast<std::size_t>(i) * nyc_ + ny_ / 2] = 0.0;
  if (opts_.symmetry != SymmetryMode::reflection) return;
  // u(x, -y) has coefficients conj(c(-m, ell)); average with them.
  for (int i = 0; i <= nx_ / 2; ++i) {
    const int ir = (nx_ - i) % nx_;
    for (int j = 0; j < nyc_; ++j) {
      cplx& a = uh[static_cast<std::size_t>(i) * nyc_ + j];
      cplx& b = uh[static_cast<std::size_t>(ir) * nyc_ + j];
      const cplx ea = 0.5 * (a + std::conj(b));
      const cplx eb = 0.5 * (b + std::conj(a));
      a = ea;
      b = eb;
    }
  }
}

void Simulator::step(SimState& state) {
  const double dt = opts_.dt;
  to_spectral(state.field, coeffs_);
  explicit_term(state.field, coeffs_, nonlinear_);
  const bool first = state.prev_nonlinear.size() != nonlinear_.size();
  for (std::size_t id = 0; id < coeffs_.size(); ++id) {
    const cplx L = implicit_[id];
    const cplx ex = first ? nonlinear_[id] : 1.5 * nonlinear_[id] - 0.5 * state.prev_nonlinear[id];
    coeffs_[id] = ((1.0 + 0.5 * dt * L) * coeffs_[id] + dt * ex) / (1.0 - 0.5 * dt * L);
  }
  project(coeffs_);
  state.prev_nonlinear = nonlinear_;
  to_physical(coeffs_, state.field);
  ++state.step_count;
  state.t += dt;
  state.field.time = state.t;
  for (double v : state.field.values)
    if (!std::isfinite(v))
      throw BlowUp("simulation produced non-finite values at step " +
                       std::to_string(state.step_count) + ", t = " + std::to_string(state.t),
                   state.step_count, state.t);
}

void Simulator::advance(SimState& state, long steps) {
  for (long s = 0; s < steps; ++s) step(state);
}

// ---------------------------------------------------------------------------

std::string to_string(SeedKind k) {
  switch (k) {
    case SeedKind::oblique_plus: return "oblique+";
    case SeedKind::oblique_minus: return "oblique-";
    case SeedKind::checkerboard: return "checkerboard";
    case SeedKind::stripes: return "stripes";
    case SeedKind::random: return "random";
  }
  return "?";
}

SeedKind parse_seed_kind(const std::string& s) {
  for (auto k : {SeedKind::oblique_plus, SeedKind::oblique_minus, SeedKind::checkerboard,
                 SeedKind::stripes, SeedKind::random})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown seed kind '" + s + "'");
}

namespace {

Field front_field(const FrontProfile& front, const GridPtr& grid) {
  if (front.values.size() != static_cast<std::size_t>(grid->n_x))
    throw InvalidArgument("seed: front profile does not match the grid");
  auto u = Field::zeros(grid);
  for (int i = 0; i < grid->n_x; ++i)
    for (int j = 0; j < grid->n_y; ++j) u.at(i, j) = front.values[i];
  return u;
}

}  // namespace

Field seed_field(SeedKind kind, double amplitude, const HopfData& hopf, const FrontProfile& front,
                 GridPtr grid, std::uint64_t rng_seed) {
  if (amplitude < 0.0) throw InvalidArgument("seed: amplitude must be non-negative");
  if (kind != SeedKind::random && !hopf.p.grid) throw InvalidArgument("seed: kernel profile missing");
  switch (kind) {
    case SeedKind::oblique_plus: return oblique_field(amplitude, 0.0, hopf, front, grid, +1);
    case SeedKind::oblique_minus: return oblique_field(amplitude, 0.0, hopf, front, grid, -1);
    case SeedKind::checkerboard: return checkerboard_field(amplitude, 0.0, hopf, front, grid);
    case SeedKind::stripes: {
      if (hopf.ell != 0) throw InvalidArgument("seed: stripes need the ell = 0 eigenfunction");
      Field u = front_field(front, grid);
      const auto p = resample(hopf.p, grid);
      for (int i = 0; i < grid->n_x; ++i)
        for (int j = 0; j < grid->n_y; ++j) u.at(i, j) += 2.0 * amplitude * p.values[i].real();
      return u;
    }
    case SeedKind::random: {
      Field u = front_field(front, grid);
      std::mt19937_64 rng(rng_seed);
      std::uniform_real_distribution<double> dist(-amplitude, amplitude);
      for (auto& v : u.values) v += dist(rng);
      return u;
    }
  }
  throw InvalidArgument("seed: unknown kind");
}

// ---------------------------------------------------------------------------

std::string to_string(PatternClass p) {
  switch (p) {
    case PatternClass::oblique_plus: return "oblique+";
    case PatternClass::oblique_minus: return "oblique-";
    case PatternClass::checkerboard: return "checkerboard";
    case PatternClass::stripes: return "stripes";
    case PatternClass::trivial: return "trivial";
    case PatternClass::mixed: return "mixed";
  }
  return "?";
}

double PatternDiagnostics::period() const {
  return omega > 0.0 ? kTwoPi / omega : std::numeric_limits<double>::quiet_NaN();
}

PatternClass classify_pattern(const PatternDiagnostics& d, const ClassifyThresholds& th) {
  if (!(d.amplitude >= th.trivial)) return PatternClass::trivial;
  if (d.energy_ell0 > d.energy_rest) return PatternClass::stripes;
  const double plus = d.z_plus, minus = d.z_minus;
  if (plus > th.rotating_ratio * minus) return PatternClass::oblique_plus;
  if (minus > th.rotating_ratio * plus) return PatternClass::oblique_minus;
  if (plus <= th.standing_ratio * minus && minus <= th.standing_ratio * plus)
    return PatternClass::checkerboard;
  return PatternClass::mixed;
}

namespace {

// 4-term Blackman-Harris taper on n points.
std::vector<double> taper(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = kTwoPi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    w[i] = a0 - a1 * std::cos(x) + a2 * std::cos(2 * x) - a3 * std::cos(3 * x);
  }
  return w;
}

struct Sample {
  double amp_sq = 0.0;
  double e0 = 0.0, rest = 0.0;
  std::vector<cplx> ell_one;
};

class Recorder {
 public:
  Recorder(Simulator& sim, double sample_interval) : sim_(sim) {
    steps_ = std::max(1L, std::lround(sample_interval / sim.options().dt));
    spacing_ = steps_ * sim.options().dt;
  }
  long steps_per_sample() const { return steps_; }
  double spacing() const { return spacing_; }

  Sample take(const SimState& s) {
    Sample out;
    const double a = sim_.deviation_norm(s.field);
    out.amp_sq = a * a;
    std::tie(out.e0, out.rest) = sim_.deviation_energy_split(s.field);
    out.ell_one = sim_.transverse_one(s.field);
    // The front is y-independent, so it never enters the ell = 1 column.
    return out;
  }

 private:
  Simulator& sim_;
  long steps_ = 1;
  double spacing_ = 0.0;
};

double tapered_rms(const std::deque<Sample>& s, std::size_t first) {
  const auto w = taper(s.size() - first);
  double num = 0.0, den = 0.0;
  for (std::size_t i = first; i < s.size(); ++i) {
    num += w[i - first] * s[i].amp_sq;
    den += w[i - first];
  }
  return std::sqrt(num / den);
}

// Periodogram energy of the ell = 1 coefficients at angular frequency Omega.
double periodogram(const std::deque<Sample>& s, const std::vector<double>& w, double spacing,
                   double Omega) {
  const std::size_t nk = s.front().ell_one.size();
  std::vector<cplx> acc(nk, cplx{});
  for (std::size_t n = 0; n < s.size(); ++n) {
    const cplx e = w[n] * std::polar(1.0, -Omega * spacing * static_cast<double>(n));
    const auto& v = s[n].ell_one;
    for (std::size_t k = 0; k < nk; ++k) acc[k] += e * v[k];
  }
  double p = 0.0;
  for (const auto& a : acc) p += std::norm(a);
  return p;
}

PatternDiagnostics summarize(const std::deque<Sample>& s, double spacing) {
  PatternDiagnostics d;
  if (s.empty()) return d;
  d.amplitude = tapered_rms(s, 0);
  const auto w = taper(s.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    d.energy_ell0 += w[i] * s[i].e0;
    d.energy_rest += w[i] * s[i].rest;
    wsum += w[i];
  }
  d.energy_ell0 /= wsum;
  d.energy_rest /= wsum;
  if (s.size() < 8) return d;

  // Coarse search on a zero-padded FFT per wavenumber, then golden-section
  // refinement of |Omega| on the exact periodogram.
  const std::size_t n = s.size(), nfft = 4 * n, nk = s.front().ell_one.size();
  const auto& plan = fft::Plan1d::get(nfft);
  std::vector<double> power(nfft, 0.0);
  std::vector<cplx> in(nfft), out(nfft);
  for (std::size_t k = 0; k < nk; ++k) {
    std::fill(in.begin(), in.end(), cplx{});
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      in[i] = w[i] * s[i].ell_one[k];
      any = any || in[i] != cplx{};
    }
    if (!any) continue;
    plan.forward(in, out);
    for (std::size_t b = 0; b < nfft; ++b) power[b] += std::norm(out[b]);
  }
  const std::size_t best = static_cast<std::size_t>(
      std::distance(power.begin(), std::max_element(power.begin(), power.end())));
  const double bin = kTwoPi / (static_cast<double>(nfft) * spacing);
  const long sb = best < nfft / 2 ? static_cast<long>(best) : static_cast<long>(best) - static_cast<long>(nfft);
  double lo = (sb - 1) * bin, hi = (sb + 1) * bin;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = periodogram(s, w, spacing, x1), f2 = periodogram(s, w, spacing, x2);
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    if (f1 > f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - g * (hi - lo); f1 = periodogram(s, w, spacing, x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + g * (hi - lo); f2 = periodogram(s, w, spacing, x2);
    }
  }
  d.omega = std::abs(0.5 * (lo + hi));
  const double norm = 1.0 / wsum;
  d.z_plus = norm * std::sqrt(periodogram(s, w, spacing, d.omega));
  d.z_minus = norm * std::sqrt(periodogram(s, w, spacing, -d.omega));
  return d;
}

}  // namespace

// Windows discarded after a parameter step before fitting decay rates.
constexpr std::size_t kSettleWindows = 2;

RelaxResult relax(Simulator& sim, SimState state, const RelaxOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("relax: tol must be positive");
  if (opts.decay_windows < 2) throw InvalidArgument("relax: decay_windows must be at least 2");
  if (opts.converge_windows < 2) throw InvalidArgument("relax: converge_windows must be at least 2");
  if (!(opts.decay_spread > 0.0 && opts.decay_spread < 1.0))
    throw InvalidArgument("relax: decay_spread must lie in (0, 1)");
  Recorder rec(sim, opts.sample_interval);
  const std::size_t per_window = std::max<std::size_t>(
      8, static_cast<std::size_t>(std::lround(opts.window / rec.spacing())));
  const std::size_t keep = per_window * static_cast<std::size_t>(std::max(1, opts.spectral_windows));
  const double t0 = state.t;

  RelaxResult res;
  std::deque<Sample> buf;
  bool finished = false;
  while (!finished && state.t - t0 < opts.t_max) {
    for (std::size_t i = 0; i < per_window; ++i) {
      sim.advance(state, rec.steps_per_sample());
      buf.push_back(rec.take(state));
      if (buf.size() > keep) buf.pop_front();
    }
    const double A = tapered_rms(buf, buf.size() - per_window);
    auto& hist = res.window_amplitudes;
    hist.push_back(A);
    const std::size_t m = hist.size();
    if (A < opts.trivial_threshold) {
      res.converged = true;
      res.decaying = true;
      finished = true;
    } else if (const auto cw = static_cast<std::size_t>(opts.converge_windows);
               m >= cw && [&] {
                 const auto [lo, hi] = std::minmax_element(hist.end() - static_cast<long>(cw), hist.end());
                 return *hi - *lo <= opts.tol * A;
               }()) {
      res.converged = true;
      finished = true;
    } else if (m >= kSettleWindows + static_cast<std::size_t>(opts.decay_windows) + 2) {
      // Near onset the amplitude obeys g = dlnA/dt = sigma - kappa A^2. Fit
      // the window log-decrements against A^2 over every window past the
      // settling transient; a negative intercept sigma means no nonzero state
      // is being approached. Required on two consecutive fits.
      auto intercept = [&](std::size_t end) -> std::optional<double> {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, lo = hist[end] * hist[end], hi = lo;
        const std::size_t n = end - kSettleWindows;
        for (std::size_t i = kSettleWindows + 1; i <= end; ++i) {
          const double x = 0.5 * (hist[i] * hist[i] + hist[i - 1] * hist[i - 1]);
          const double y = std::log(hist[i] / hist[i - 1]) / opts.window;
          sx += x, sy += y, sxx += x * x, sxy += x * y;
          lo = std::min(lo, x), hi = std::max(hi, x);
        }
        if (hi - lo < opts.decay_spread * hi) return std::nullopt;
        const double nn = static_cast<double>(n), den = nn * sxx - sx * sx;
        const double slope = den > 0.0 ? (nn * sxy - sx * sy) / den : 0.0;
        // A rising decrement (slope >= 0) carries no saturation; use the mean.
        return slope < 0.0 ? (sy - slope * sx) / nn : sy / nn;
      };
      bool falling = true;
      for (std::size_t i = m - static_cast<std::size_t>(opts.decay_windows); i < m; ++i)
        falling = falling && hist[i] < hist[i - 1];
      const auto now = intercept(m - 1), before = intercept(m - 2);
      if (falling && now && before && *now < 0.0 && *before < 0.0) {
        res.converged = true;
        res.decaying = true;
        finished = true;
      }
    }
  }
  std::deque<Sample> tail(buf.end() - static_cast<long>(std::min(buf.size(), keep)), buf.end());
  res.diag = summarize(tail, rec.spacing());
  res.diag.amplitude = res.window_amplitudes.empty() ? 0.0 : res.window_amplitudes.back();
  res.amplitude = res.diag.amplitude;
  res.period_estimate = res.diag.period();
  res.state = std::move(state);
  return res;
}

PatternDiagnostics observe(Simulator& sim, SimState state, double duration, double sample_interval) {
  Recorder rec(sim, sample_interval);
  std::deque<Sample> buf;
  const long samples = std::max(8L, std::lround(duration / rec.spacing()));
  for (long i = 0; i < samples; ++i) {
    sim.advance(state, rec.steps_per_sample());
    buf.push_back(rec.take(state));
  }
  return summarize(buf, rec.spacing());
}

PatternClass classify_pattern(Simulator& sim, const SimState& state, double duration,
                              const ClassifyThresholds& th) {
  if (sim.deviation_norm(state.field) < th.trivial) return PatternClass::trivial;
  return classify_pattern(observe(sim, state, duration), th);
}

// ---------------------------------------------------------------------------

std::string to_string(ContinuationStop s) {
  switch (s) {
    case ContinuationStop::completed: return "completed";
    case ContinuationStop::branch_death: return "branch_death";
    case ContinuationStop::class_change: return "class_change";
  }
  return "?";
}

ContinuationBranch adiabatic_continuation(Simulator& sim, SimState start, double c_from,
                                          double c_to, double dc, const RelaxOptions& relax_opts,
                                          const ClassifyThresholds& th) {
  if (dc == 0.0 || (c_to - c_from) * dc < 0.0)
    throw InvalidArgument("adiabatic_continuation: dc must point from c_from to c_to");
  ContinuationBranch br;
  br.increasing = dc > 0.0;
  const long count = static_cast<long>(std::floor((c_to - c_from) / dc + 1e-9)) + 1;
  SimState state = std::move(start);
  for (long n = 0; n < count; ++n) {
    const double c = c_from + static_cast<double>(n) * dc;
    sim.set_speed(c, state);
    auto r = relax(sim, std::move(state), relax_opts);
    state = std::move(r.state);
    ContinuationSample smp;
    smp.c = c;
    smp.amplitude = r.amplitude;
    smp.pattern = r.decaying ? PatternClass::trivial : classify_pattern(r.diag, th);
    smp.period = r.period_estimate;
    smp.converged = r.converged;
    smp.decaying = r.decaying;
    const bool changed = !br.samples.empty() && br.samples.back().pattern != smp.pattern;
    br.samples.push_back(smp);
    if (r.decaying || r.amplitude < th.trivial) {
      br.stop = ContinuationStop::branch_death;
      break;
    }
    if (changed) {
      br.stop = ContinuationStop::class_change;
      break;
    }
  }
  br.end_state = std::move(state);
  return br;
}

std::string branch_csv(const ContinuationBranch& branch) {
  std::ostringstream os;
  os.precision(12);
  os << "c,amplitude,class,period,converged\n";
  for (const auto& s : branch.samples)
    os << s.c << ',' << s.amplitude << ',' << to_string(s.pattern) << ',' << s.period << ','
       << (s.converged ? 1 : 0) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

void put_bytes(std::string& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) { put_bytes(out, v, 4); }
void put_f64(std::string& out, double v) { put_bytes(out, std::bit_cast<std::uint64_t>(v), 8); }

class Reader {
 public:
  explicit Reader(const std::string& data) : d_(data) {}
  bool has(std::size_t n) const { return pos_ + n <= d_.size(); }
  bool at_end() const { return pos_ == d_.size(); }
  std::uint64_t bytes(int n) {
    if (!has(static_cast<std::size_t>(n))) throw FormatError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(d_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  std::string tag() {
    if (!has(4)) throw FormatError("checkpoint: truncated file");
    std::string t = d_.substr(pos_, 4);
    pos_ += 4;
    return t;
  }

 private:
  const std::string& d_;
  std::size_t pos_ = 0;
};

}  // namespace

void checkpoint_save(const SimState& state, double c, const std::filesystem::path& path) {
  const auto& g = *state.field.grid;
  std::string out;
  out.reserve(48 + state.field.values.size() * 8 + state.prev_nonlinear.size() * 16);
  out += "QCH1";
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(g.n_x));
  put_u32(out, static_cast<std::uint32_t>(g.n_y));
  put_f64(out, g.half_width_M);
  put_f64(out, g.k);
  put_f64(out, c);
  put_f64(out, state.t);
  for (double v : state.field.values) put_f64(out, v);
  out += "HIST";
  put_bytes(out, static_cast<std::uint64_t>(state.step_count), 8);
  put_bytes(out, state.prev_nonlinear.size(), 8);
  for (const auto& z : state.prev_nonlinear) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("checkpoint: cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint checkpoint_load(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("checkpoint: cannot open '" + path.string() + "'");
  const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(data);
  if (r.tag() != "QCH1") throw FormatError("checkpoint: bad magic in '" + path.string() + "'");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto nx = r.u32(), ny = r.u32();
  Checkpoint cp;
  cp.M = r.f64();
  cp.k = r.f64();
  cp.c = r.f64();
  const double t = r.f64();
  if (static_cast<int>(nx) != grid->n_x || static_cast<int>(ny) != grid->n_y)
    throw FormatError("checkpoint: grid " + std::to_string(nx) + "x" + std::to_string(ny) +
                      " does not match " + std::to_string(grid->n_x) + "x" +
                      std::to_string(grid->n_y));
  if (cp.M != grid->half_width_M || cp.k != grid->k)
    throw FormatError("checkpoint: box half-width or wavenumber differs from the grid");
  cp.state.field = Field::zeros(grid);
  for (auto& v : cp.state.field.values) v = r.f64();
  cp.state.t = t;
  cp.state.field.time = t;
  if (!r.at_end()) {
    if (r.tag() != "HIST") throw FormatError("checkpoint: unknown trailing block");
    cp.state.step_count = static_cast<long>(r.bytes(8));
    const auto count = r.bytes(8);
    if (!r.has(count * 16)) throw FormatError("checkpoint: truncated history block");
    cp.state.prev_nonlinear.resize(count);
    for (auto& z : cp.state.prev_nonlinear) {
      const double re = r.f64();
      z = {re, r.f64()};
    }
    if (!r.at_end()) throw FormatError("checkpoint: trailing bytes after history block");
  }
  return cp;
}

}  // namespace qlab
