// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; the exit status is non-zero if any fails.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qlab/dispersion.hpp"
#include "qlab/eigensolve.hpp"
#include "qlab/error.hpp"
#include "qlab/kernels.hpp"
#include "qlab/linop.hpp"
#include "qlab/lyapunov_schmidt.hpp"
#include "qlab/simulator.hpp"

using namespace qlab;

namespace {

constexpr double pi = std::numbers::pi;
const double kSpeedOne = 7.0 / (3.0 * std::sqrt(3.0));
const double kSpeedZero = 2.0 / (3.0 * std::sqrt(6.0)) * (2.0 + std::sqrt(7.0)) * std::sqrt(std::sqrt(7.0) - 1.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Reference setup: K = 10 pi plateau in a 30 pi box, 1024 points.
struct Reference {
  Linearization lin;
  HopfData hopf;
  PhiSet phis;
  ThetaPair theta;
};

Linearization make_lin(double K, double M, int n_x, int n_y = 8) {
  ModelSpec m;
  m.K_halfwidth = K;
  return Linearization::trivial(make_grid(M, n_x, n_y, m.k), m);
}

const Reference& reference() {
  static const Reference r = [] {
    Reference out{make_lin(10.0 * pi, 30.0 * pi, 1024), {}, {}, {}};
    out.hopf = hopf_locate(1, {1.25, 1.345}, out.lin);
    ReductionInput in{&out.hopf, &out.lin, std::nullopt, Exec::parallel};
    out.phis = solve_phi_set(in);
    out.theta = theta_coeffs(out.hopf, out.phis, out.lin);
    return out;
  }();
  return r;
}

// Simulation setup shared by the DNS criteria.
constexpr int kSimNx = 512;
constexpr int kSimNy = 8;
constexpr double kSimDt = 0.01;
constexpr double kRelaxTol = 1e-4;

struct SimSetup {
  Linearization lin;
  HopfData hopf;
};

const SimSetup& sim_setup() {
  static const SimSetup s = [] {
    SimSetup out{make_lin(10.0 * pi, 30.0 * pi, kSimNx, kSimNy), {}};
    out.hopf = hopf_locate(1, {1.25, 1.345}, out.lin);
    return out;
  }();
  return s;
}

Simulator make_sim(double c, SymmetryMode sym) {
  const auto& s = sim_setup();
  auto model = s.lin.model;
  model.c = c;
  SimOptions o;
  o.dt = kSimDt;
  o.symmetry = sym;
  return Simulator(s.lin.grid, model, s.lin.front, o);
}

// Checkerboard continuation, computed once for criteria 8 and 9.
const ContinuationBranch& checkerboard_branch() {
  static const ContinuationBranch b = [] {
    const auto& s = sim_setup();
    auto sim = make_sim(1.26, SymmetryMode::reflection);
    auto st = sim.make_state(seed_field(SeedKind::checkerboard, 0.03, s.hopf, s.lin.front, s.lin.grid));
    RelaxOptions ro;
    ro.tol = kRelaxTol;
    ro.t_max = 5000;
    return adiabatic_continuation(sim, st, 1.26, 1.45, 0.01, ro);
  }();
  return b;
}

// ---------------------------------------------------------------------------

Outcome spreading_speeds() {
  const auto t0 = std::chrono::steady_clock::now();
  const double c1 = dispersion::spreading_speed(1, 0.5).c_star;
  const double c0 = dispersion::spreading_speed(0, 0.5).c_star;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double e1 = std::abs(c1 - kSpeedOne), e0 = std::abs(c0 - kSpeedZero);
  return {e1 < 1e-8 && e0 < 1e-8 && secs < 1.0,
          fmt("c1=%.12f (err %.1e), c0=%.12f (err %.1e), %.3f s", c1, e1, c0, e0, secs)};
}

Outcome hopf_location() {
  const auto& r = reference();
  const auto h0 = hopf_locate(0, {1.5, 1.7}, r.lin);
  const bool ok1 = r.hopf.c_star >= 1.30 && r.hopf.c_star <= 1.40;
  const bool ok0 = h0.c_star >= 1.55 && h0.c_star <= 1.65;
  return {ok1 && ok0, fmt("ell=1: c*=%.7f omega=%.5f; ell=0: c=%.7f", r.hopf.c_star, r.hopf.omega_star, h0.c_star)};
}

Outcome plateau_limit() {
  // Fixed resolution and box-to-plateau ratio; only K changes.
  std::vector<double> Ks{5.0 * pi, 10.0 * pi, 20.0 * pi}, gaps;
  std::string detail;
  for (double K : Ks) {
    const int n = static_cast<int>(std::lround(1024 * K / (10.0 * pi)));
    const auto lin = make_lin(K, 3.0 * K, n);
    const auto h = hopf_locate(1, {1.15, 1.345}, lin);
    gaps.push_back(std::abs(h.c_star - kSpeedOne));
    detail += fmt("K=%gpi c*=%.7f gap=%.3e; ", K / pi, h.c_star, h.c_star - kSpeedOne);
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < Ks.size(); ++i) lx.push_back(std::log(1.0 / Ks[i])), ly.push_back(std::log(gaps[i]));
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 3, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  const double p = sxy / sxx;
  const bool decreasing = gaps[0] > gaps[1] && gaps[1] > gaps[2];
  return {decreasing && p >= 1.5 && p <= 2.5, detail + fmt("exponent %.3f", p)};
}

Outcome multiplicity_two() {
  const auto& r = reference();
  const auto w = r.hopf.weight;
  const cplx plus = leading_eigenvalue(1, r.hopf.c_star, w, r.lin);
  const cplx minus = leading_eigenvalue(-1, r.hopf.c_star, w, r.lin);
  const double d = std::abs(plus - minus);
  return {d < 1e-10, fmt("lambda(+1)=%.12f%+.12fi, |difference|=%.2e", plus.real(), plus.imag(), d)};
}

Outcome crossing_identity() {
  const auto& r = reference();
  const auto cc = crossing_speed_check(r.hopf);
  const bool identity = cc.relative_gap < 1e-6;
  const bool positive = r.hopf.mu_prime > 0.0;
  return {identity && positive,
          fmt("relative gap %.2e (%s); mu'=%.6f (%s)", cc.relative_gap, identity ? "ok" : "fails", r.hopf.mu_prime,
              positive ? "positive" : "not positive: Re lambda decreases through c*")};
}

Outcome theta_structure() {
  const auto& r = reference();
  const double rel = std::abs(r.theta.theta2 - 2.0 * r.theta.theta1) / std::abs(r.theta.theta1);
  auto rotated = r.hopf;
  const cplx phase = std::polar(1.0, 1.1);
  rotated.p = scaled(rotated.p, phase);
  rotated.psi_plus = scaled(rotated.psi_plus, phase);
  ReductionInput in{&rotated, &r.lin, std::nullopt, Exec::parallel};
  const auto th = theta_coeffs(rotated, solve_phi_set(in), r.lin);
  const double gauge = std::max(std::abs(th.theta1 - r.theta.theta1) / std::abs(r.theta.theta1),
                                std::abs(th.theta2 - r.theta.theta2) / std::abs(r.theta.theta2));
  return {rel < 1e-8 && gauge < 1e-12,
          fmt("theta1=%.8f%+.8fi, |theta2-2theta1|/|theta1|=%.1e, gauge change %.1e", r.theta.theta1.real(),
              r.theta.theta1.imag(), rel, gauge)};
}

Outcome classification() {
  const auto& r = reference();
  const auto pulled = make_report(r.theta, r.hopf);
  auto lin2 = r.lin;
  lin2.model.gamma = 2.0;
  const auto pushed = make_report(theta_coeffs(r.hopf, r.phis, lin2), r.hopf);
  const bool ok1 = pulled.bif_type == BifurcationType::type1 && pulled.rotating_side == BranchSide::below &&
                   pulled.standing_side == BranchSide::below;
  const bool ok3 = pushed.bif_type == BifurcationType::type3 && pushed.rotating_side == BranchSide::above &&
                   pushed.standing_side == BranchSide::above;
  return {ok1 && ok3, fmt("gamma=-1: type %s, branches %s/%s; gamma=2: type %s, branches %s/%s",
                          to_string(pulled.bif_type).c_str(), to_string(pulled.rotating_side).c_str(),
                          to_string(pulled.standing_side).c_str(), to_string(pushed.bif_type).c_str(),
                          to_string(pushed.rotating_side).c_str(), to_string(pushed.standing_side).c_str())};
}

Outcome normal_form_vs_simulation() {
  const auto& r = reference();
  const auto rep = make_report(r.theta, r.hopf);
  // Simulated amplitude is the RMS of u - u*; a checkerboard with kernel
  // amplitude a and ||p|| = 1 has RMS 2a.
  const double predicted = 4.0 / (-rep.c_cb_coeff);
  const auto& br = checkerboard_branch();
  std::vector<ContinuationSample> live;
  for (const auto& s : br.samples)
    if (s.pattern == PatternClass::checkerboard && !s.decaying) live.push_back(s);
  if (live.size() < 5) return {false, fmt("only %zu nonzero checkerboard samples", live.size())};
  std::sort(live.begin(), live.end(), [](auto& a, auto& b) { return a.c > b.c; });
  live.resize(5);
  const double cs = r.hopf.c_star;
  double mx = 0, my = 0;
  for (const auto& s : live) mx += (cs - s.c) / 5, my += s.amplitude * s.amplitude / 5;
  double sxy = 0, sxx = 0;
  for (const auto& s : live) sxy += (cs - s.c - mx) * (s.amplitude * s.amplitude - my), sxx += std::pow(cs - s.c - mx, 2);
  const double slope = sxy / sxx;
  const double err = std::abs(slope - predicted) / predicted;
  std::string pts;
  for (const auto& s : live) pts += fmt(" (%.3f, %.5f)", s.c, s.amplitude);
  return {err < 0.2, fmt("fitted slope %.4f vs predicted %.4f (%.1f%%); samples%s", slope, predicted, 100 * err,
                         pts.c_str())};
}

Outcome onset_by_simulation() {
  const auto& br = checkerboard_branch();
  double last_alive = std::nan(""), death = std::nan("");
  for (const auto& s : br.samples) {
    const bool alive = s.pattern == PatternClass::checkerboard && !s.decaying;
    if (alive) last_alive = s.c;
    if (!alive && std::isnan(death)) death = s.c;
  }
  const bool ok = br.stop == ContinuationStop::branch_death && death >= 1.33 && death <= 1.45;
  return {ok, fmt("stop=%s, last nonzero at c=%.3f, lost at c=%.3f", to_string(br.stop).c_str(), last_alive, death)};
}

Outcome conservation_symmetry() {
  const auto& s = sim_setup();
  auto sim = make_sim(1.0, SymmetryMode::none);
  auto u = seed_field(SeedKind::oblique_plus, 0.05, s.hopf, s.lin.front, s.lin.grid);
  for (auto& v : u.values) v += 0.01;
  auto mean = [](const Field& f) { return std::accumulate(f.values.begin(), f.values.end(), 0.0) / f.values.size(); };
  auto st = sim.make_state(u);
  const double m0 = mean(st.field);
  sim.advance(st, 10000);
  const double drift = std::abs(mean(st.field) - m0) / std::abs(m0);

  const int ny = s.lin.grid->n_y;
  auto transform = [&](const Field& f, auto map) {
    auto g = Field::zeros(f.grid);
    for (int i = 0; i < f.grid->n_x; ++i)
      for (int j = 0; j < ny; ++j) g.at(i, map(j)) = f.at(i, j);
    return g;
  };
  auto shift = [&](int j) { return (j + 3) % ny; };
  auto reflect = [&](int j) { return (ny - j) % ny; };
  auto base = sim.make_state(u);
  sim.advance(base, 100);
  double err = 0;
  for (int which = 0; which < 2; ++which) {
    auto moved = sim.make_state(which == 0 ? transform(u, shift) : transform(u, reflect));
    sim.advance(moved, 100);
    const auto expect = which == 0 ? transform(base.field, shift) : transform(base.field, reflect);
    for (std::size_t i = 0; i < expect.values.size(); ++i) err = std::max(err, std::abs(expect.values[i] - moved.field.values[i]));
  }
  return {drift < 1e-12 && err < 1e-10, fmt("mean drift %.1e over 1e4 steps, equivariance error %.1e", drift, err)};
}

Outcome k_scan_check() {
  const auto lin = make_lin(10.0 * pi, 30.0 * pi, 1024);
  const auto pts = k_scan({0.1, 0.9}, 1.2, 0.2, lin);
  return {pts[0].lambda.real() > 0.0 && pts[1].lambda.real() < 0.0,
          fmt("Re lambda(k=0.1)=%.5f, Re lambda(k=0.9)=%.5f", pts[0].lambda.real(), pts[1].lambda.real())};
}

Outcome essential_spectrum() {
  std::vector<double> ms;
  for (int i = -2000; i <= 2000; ++i) ms.push_back(i * 0.005);
  bool only_origin = true;
  double top = -1e300;
  for (int ell = 0; ell <= 3; ++ell)
    for (const auto& s : dispersion::essential_curve({0.5, ell, 1.35, -1}, ms).samples) {
      top = std::max(top, s.lambda.real());
      const bool origin = ell == 0 && s.param == 0.0;
      if (origin ? s.lambda.real() != 0.0 : s.lambda.real() >= 0.0) only_origin = false;
    }
  const double h = 1e-4;
  const auto c = dispersion::essential_curve({0.5, 0, 1.35, -1}, {-h, 0.0, h}).samples;
  const double quad = (c[0].lambda.real() + c[2].lambda.real() - 2.0 * c[1].lambda.real()) / (2.0 * h * h);

  // Constant-coefficient block: plateau covering the box and the constant
  // state u^2 = 0.4, where f_u = 1 - 3(0.4) - 5(0.16) = -1 as in the far field.
  ModelSpec m;
  m.K_halfwidth = 1000.0;
  auto lin = Linearization::trivial(make_grid(2.0 * pi, 64, 8, m.k), m);
  lin.front.values.assign(64, std::sqrt(0.4));
  double worst = 0;
  for (int ell : {0, 1, 2}) {
    const auto op = assemble_modal(ell, 1.35, 0.0, lin);
    const auto eig = dense_eigs(op.matrix, 0.0, 64);
    for (int j = -15; j <= 15; ++j) {
      const cplx expected = dispersion::lambda_of_nu(cplx(0.0, 0.5 * j), {0.5, ell, 1.35, -1});
      double best = 1e300;
      for (const auto& e : eig) best = std::min(best, std::abs(e.lambda - expected));
      worst = std::max(worst, best / std::max(1.0, std::abs(expected)));
    }
  }
  return {only_origin && std::abs(top) == 0.0 && std::abs(quad + 1.0) < 1e-6 && worst < 1e-8,
          fmt("max Re=%.1e only at origin: %s; quadratic coefficient %.9f; modal mismatch %.1e", top,
              only_origin ? "yes" : "no", quad, worst)};
}

Outcome quadratic_solve_symmetry() {
  const auto& r = reference();
  ReductionInput in{&r.hopf, &r.lin, std::nullopt, Exec::parallel};
  auto rel = [&](PairTag a, PairTag b) {
    const auto x = solve_phi(a, in), y = solve_phi(b, in);
    double e = 0, n = 0;
    for (std::size_t i = 0; i < x.values.size(); ++i) e = std::max(e, std::abs(x.values[i] - y.values[i])), n = std::max(n, std::abs(x.values[i]));
    return n > 0 ? e / n : e;
  };
  const double d1 = rel(PairTag::aabar, PairTag::bbbar), d2 = rel(PairTag::abbar, PairTag::abar_b),
               d3 = rel(PairTag::aa, PairTag::bb);
  return {std::max({d1, d2, d3}) < 1e-9, fmt("aa-bar/bb-bar %.1e, ab-bar/a-bar b %.1e, aa/bb %.1e", d1, d2, d3)};
}

Outcome pattern_reproduction() {
  const auto& s = sim_setup();
  RelaxOptions ro;
  ro.tol = kRelaxTol;
  ro.t_max = 3000;
  std::string detail;
  bool ok = true;
  for (auto kind : {SeedKind::oblique_plus, SeedKind::checkerboard}) {
    auto sim = make_sim(1.0, kind == SeedKind::checkerboard ? SymmetryMode::reflection : SymmetryMode::none);
    auto st = sim.make_state(seed_field(kind, 0.02, s.hopf, s.lin.front, s.lin.grid));
    const auto r = relax(sim, st, ro);
    const auto cls = classify_pattern(r.diag);
    const bool want = kind == SeedKind::checkerboard
                          ? cls == PatternClass::checkerboard
                          : (cls == PatternClass::oblique_plus || cls == PatternClass::oblique_minus);
    ok = ok && want;
    detail += fmt("%s seed -> %s (amplitude %.4f, period %.2f); ", to_string(kind).c_str(), to_string(cls).c_str(),
                  r.amplitude, r.period_estimate);
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  omp_set_num_threads(configured_threads());
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"spreading speeds", spreading_speeds}},
      {2, {"Hopf location", hopf_location}},
      {3, {"plateau-limit convergence", plateau_limit}},
      {4, {"multiplicity two", multiplicity_two}},
      {5, {"crossing-speed identity and direction", crossing_identity}},
      {6, {"cubic coefficient structure", theta_structure}},
      {7, {"bifurcation classification", classification}},
      {8, {"normal form vs simulation", normal_form_vs_simulation}},
      {9, {"onset by simulation", onset_by_simulation}},
      {10, {"conservation and symmetry", conservation_symmetry}},
      {11, {"k-scan", k_scan_check}},
      {12, {"essential spectrum", essential_spectrum}},
      {13, {"quadratic-solve symmetry", quadratic_solve_symmetry}},
      {14, {"pattern reproduction", pattern_reproduction}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-40s %s  [%.1f s] %s\n", id, entry.first, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
