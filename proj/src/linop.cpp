#include "qlab/linop.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qlab/dispersion.hpp"
#include "qlab/error.hpp"
#include "qlab/fft.hpp"

namespace qlab {

namespace {

void gauge_fix(ModalProfile& p) {
  std::size_t imax = 0;
  for (std::size_t j = 1; j < p.values.size(); ++j)
    if (std::abs(p.values[j]) > std::abs(p.values[imax])) imax = j;
  const cplx z = p.values[imax];
  if (std::abs(z) == 0.0) return;
  const cplx phase = std::conj(z) / std::abs(z);
  for (auto& v : p.values) v *= phase;
  p.values[imax] = std::abs(p.values[imax]);
}

ModalProfile as_profile(const GridPtr& grid, int ell, const Eigen::VectorXcd& v) {
  ModalProfile p = ModalProfile::zeros(grid, ell);
  for (long j = 0; j < v.size(); ++j) p.values[j] = v[j];
  return p;
}

Eigen::VectorXcd as_vector(const ModalProfile& p) {
  Eigen::VectorXcd v(static_cast<long>(p.values.size()));
  for (long j = 0; j < v.size(); ++j) v[j] = p.values[j];
  return v;
}

Linearization with_k(const Linearization& lin, double k) {
  Linearization out = lin;
  out.grid = make_grid(lin.grid->half_width_M, lin.grid->n_x, lin.grid->n_y, k);
  out.model.k = k;
  return out;
}

}  // namespace

Linearization Linearization::trivial(GridPtr grid, ModelSpec model) {
  Linearization lin;
  lin.front = trivial_front(*grid);
  lin.grid = std::move(grid);
  lin.model = model;
  return lin;
}

ModalApplier::ModalApplier(const Linearization& lin, int ell, double c, double eta)
    : ModalApplier(lin, ell, c, WeightSpec{eta}) {}

ModalApplier::ModalApplier(const Linearization& lin, int ell, double c, const WeightSpec& weight)
    : grid_(lin.grid), ell_(ell), c_(c), weight_(weight) {
  weight.validate();
  const auto& g = *grid_;
  q_ = g.k * g.k * ell * ell;
  g_.resize(g.n_x);
  gp_.resize(g.n_x);
  for (int j = 0; j < g.n_x; ++j) {
    g_[j] = weight.slope(g.x_nodes[j]);
    gp_[j] = weight.curvature(g.x_nodes[j]);
  }
  fu_ = sample_f_derivative(g, lin.front, lin.model, 1);
  sym1_ = derivative_symbol(g, 1);
  sym2_ = derivative_symbol(g, 2);
}

void ModalApplier::derivatives(std::span<const cplx> v, std::vector<cplx>& d1,
                               std::vector<cplx>& d2) const {
  const std::size_t n = v.size();
  const auto& plan = fft::Plan1d::get(n);
  std::vector<cplx> hat(n), tmp(n);
  plan.forward(v, hat);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) tmp[j] = hat[j] * sym1_[j] * inv;
  d1.resize(n);
  plan.backward(tmp, d1);
  for (std::size_t j = 0; j < n; ++j) tmp[j] = hat[j] * sym2_[j] * inv;
  d2.resize(n);
  plan.backward(tmp, d2);
}

void ModalApplier::apply(std::span<const cplx> v, std::span<cplx> out) const {
  const std::size_t n = v.size();
  std::vector<cplx> d1, d2, e1, e2, a(n);
  derivatives(v, d1, d2);
  // Conjugated D: d2 - 2 g d1 - g' v + g^2 v - q v.
  for (std::size_t j = 0; j < n; ++j) {
    const double g = g_[j];
    a[j] = d2[j] - 2.0 * g * d1[j] + (g * g - gp_[j] - q_) * v[j] + fu_[j] * v[j];
  }
  derivatives(a, e1, e2);
  for (std::size_t j = 0; j < n; ++j) {
    const double g = g_[j];
    const cplx Da = e2[j] - 2.0 * g * e1[j] + (g * g - gp_[j] - q_) * a[j];
    out[j] = -Da + c_ * (d1[j] - g * v[j]);
  }
}

void ModalApplier::apply_D(std::span<const cplx> v, std::span<cplx> out) const {
  std::vector<cplx> d1, d2;
  derivatives(v, d1, d2);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double g = g_[j];
    out[j] = d2[j] - 2.0 * g * d1[j] + (g * g - gp_[j] - q_) * v[j];
  }
}

ModalProfile ModalApplier::apply(const ModalProfile& v) const {
  ModalProfile out = ModalProfile::zeros(grid_, v.ell);
  apply(v.values, out.values);
  return out;
}

ModalProfile ModalApplier::apply_c_derivative(const ModalProfile& v) const {
  std::vector<cplx> d1, d2;
  derivatives(v.values, d1, d2);
  ModalProfile out = ModalProfile::zeros(grid_, v.ell);
  for (std::size_t j = 0; j < d1.size(); ++j) out.values[j] = d1[j] - g_[j] * v.values[j];
  return out;
}

ModalOperator assemble_modal(int ell, double c, double eta, const Linearization& lin, Exec exec) {
  return assemble_modal(ell, c, WeightSpec{eta}, lin, exec);
}

ModalOperator assemble_modal(int ell, double c, const WeightSpec& weight, const Linearization& lin,
                             Exec exec) {
  const ModalApplier L(lin, ell, c, weight);
  const int n = lin.grid->n_x;
  ModalOperator op;
  op.ell = ell;
  op.c = c;
  op.eta = weight.eta;
  op.weight = weight;
  op.grid = lin.grid;
  assemble_columns(
      n,
      [&](int j, std::span<double> col) {
        std::vector<cplx> e(n, cplx{}), out(n);
        e[j] = 1.0;
        L.apply(e, out);
        for (int i = 0; i < n; ++i) col[i] = out[i].real();
      },
      op.matrix, exec);
  return op;
}

ModalProfile unweight(const ModalProfile& weighted, double eta) {
  return unweight(weighted, WeightSpec{eta});
}

ModalProfile weight_by(const ModalProfile& plain, double eta) {
  return weight_by(plain, WeightSpec{eta});
}

ModalProfile unweight(const ModalProfile& weighted, const WeightSpec& weight) {
  const auto w = weight_profile(*weighted.grid, weight);
  ModalProfile out = weighted;
  for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] /= w.values[j];
  return out;
}

ModalProfile weight_by(const ModalProfile& plain, const WeightSpec& weight) {
  const auto w = weight_profile(*plain.grid, weight);
  ModalProfile out = plain;
  for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] *= w.values[j];
  return out;
}

std::vector<EigenPair> eigs_near(const ModalOperator& op, cplx target, int count,
                                 const EigsOptions& opts) {
  const int n = static_cast<int>(op.matrix.rows());
  if (count > n) throw InvalidArgument("eigs_near: count exceeds the operator size");
  bool dense = opts.method == EigsOptions::Method::dense ||
               (opts.method == EigsOptions::Method::automatic && n <= opts.dense_max);
  std::vector<RitzPair> pairs;
  if (dense) {
    pairs = dense_eigs(op.matrix, target, count);
  } else {
    ArnoldiOptions ao;
    ao.tol = opts.tol;
    ao.krylov_dim = opts.krylov_dim;
    pairs = shift_invert_arnoldi(op.matrix, target, count, ao);
  }
  std::vector<EigenPair> out;
  out.reserve(pairs.size());
  for (auto& rp : pairs)
    out.push_back({rp.lambda, as_profile(op.grid, op.ell, rp.vector), op.ell, rp.residual});
  return out;
}

cplx rightmost_shift(int ell, double k, double c) {
  try {
    const auto bp = dispersion::leading_branch_point({k, ell, c, +1});
    if (bp) {
      const cplx z = bp->lambda;
      return z.imag() < 0.0 ? std::conj(z) : z;
    }
  } catch (const NumericalError&) {
  }
  return {0.0, 0.5};
}

EigenPair leading_eigenpair(const ModalOperator& op, int count, const EigsOptions& opts) {
  const cplx shift = rightmost_shift(op.ell, op.grid->k, op.c);
  const auto pairs = eigs_near(op, shift, count, opts);
  const EigenPair* best = nullptr;
  for (const auto& p : pairs) {
    if (p.residual > 1e3 * opts.tol) continue;
    if (p.lambda.imag() < -1e-12) continue;
    if (!best || p.lambda.real() > best->lambda.real()) best = &p;
  }
  if (!best) throw NumericalError("leading_eigenpair: no converged eigenpair near the shift");
  return *best;
}

cplx leading_eigenvalue(int ell, double c, double eta, const Linearization& lin,
                        const EigsOptions& opts, int count) {
  return leading_eigenvalue(ell, c, WeightSpec{eta}, lin, opts, count);
}

cplx leading_eigenvalue(int ell, double c, const WeightSpec& weight, const Linearization& lin,
                        const EigsOptions& opts, int count) {
  return leading_eigenpair(assemble_modal(ell, c, weight, lin), count, opts).lambda;
}

double plateau_tilt(int ell, double c, const Linearization& lin) {
  try {
    const auto bp = dispersion::leading_branch_point({lin.grid->k, ell, c, +1});
    if (bp) return std::max(0.0, -bp->nu.real());
  } catch (const NumericalError&) {
  }
  return 0.0;
}

WeightSpec HopfOptions::weight(const Linearization& lin, int ell, double c_ref) const {
  const double t = tilt ? *tilt : plateau_tilt(ell, c_ref, lin);
  return WeightSpec{eta, t, lin.model.K_halfwidth, 1.0};
}

SpectrumSet aggregate_spectrum(const std::vector<int>& ells, double c, double eta, int count_total,
                               const Linearization& lin, const EigsOptions& opts) {
  SpectrumSet set;
  set.c = c;
  set.k = lin.grid->k;
  set.eta = eta;
  if (ells.empty() || count_total <= 0) return set;
  // A small offset keeps the shift off the exact mass eigenvalue at zero.
  const cplx target{1e-3, 1e-3};
  for (int ell : ells) {
    const auto op = assemble_modal(ell, c, eta, lin);
    auto pairs = eigs_near(op, target, std::min(count_total, lin.grid->n_x), opts);
    for (auto& p : pairs) set.pairs.push_back(std::move(p));
  }
  std::stable_sort(set.pairs.begin(), set.pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    return std::abs(a.lambda) < std::abs(b.lambda);
  });
  if (static_cast<int>(set.pairs.size()) > count_total) set.pairs.resize(count_total);
  return set;
}

CriticalMode critical_mode(int ell, double c, const Linearization& lin, const HopfOptions& opts) {
  return critical_mode(ell, c, lin, opts.weight(lin, ell, c), opts);
}

CriticalMode critical_mode(int ell, double c, const Linearization& lin, const WeightSpec& weight,
                           const HopfOptions& opts) {
  const auto op = assemble_modal(ell, c, weight, lin);
  const auto lead = leading_eigenpair(op, opts.count, opts.eigs);
  const auto pair = refine_two_sided(op.matrix, lead.lambda, as_vector(lead.profile));
  CriticalMode m;
  m.lambda = pair.lambda;
  m.residual_right = pair.residual_right;
  m.residual_left = pair.residual_left;
  m.weighted_right = pair.right;
  m.p = unweight(as_profile(lin.grid, ell, pair.right), weight);
  const double norm = l2_norm(m.p);
  for (auto& v : m.p.values) v /= norm;
  gauge_fix(m.p);
  m.psi_plus = weight_by(as_profile(lin.grid, ell, pair.left), weight);
  const cplx ip = inner_product(m.p, m.psi_plus);
  m.psi_plus = scaled(m.psi_plus, std::conj(1.0 / ip));
  return m;
}

HopfData hopf_locate(int ell, std::pair<double, double> c_bracket, const Linearization& lin,
                     const HopfOptions& opts) {
  HopfData hd;
  hd.ell = ell;
  hd.eta = opts.eta;
  hd.weight = opts.weight(lin, ell, 0.5 * (c_bracket.first + c_bracket.second));
  auto mu_at = [&](double c) {
    const cplx lam = leading_eigenvalue(ell, c, hd.weight, lin, opts.eigs, opts.count);
    hd.root_history.emplace_back(c, lam);
    return lam;
  };
  double a = c_bracket.first, b = c_bracket.second;
  cplx la = mu_at(a), lb = mu_at(b);
  double fa = la.real(), fb = lb.real();
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream msg;
    msg << "hopf_locate: no sign change of the leading real part over [" << a << ", " << b
        << "] (" << fa << ", " << fb << ")";
    throw NumericalError(msg.str());
  }
  // Illinois-modified regula falsi on mu(c) = Re lambda(c).
  double c = b, fc = fb;
  cplx lc = lb;
  for (int it = 0; it < 80; ++it) {
    c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    lc = mu_at(c);
    fc = lc.real();
    if (std::abs(fc) < opts.mu_tol || std::abs(b - a) < 1e-13) break;
    if ((fc > 0.0) != (fb > 0.0)) {
      a = b;
      fa = fb;
    } else {
      fa *= 0.5;
    }
    b = c;
    fb = fc;
  }
  hd.c_star = c;

  const auto mode = critical_mode(ell, c, lin, hd.weight, opts);
  hd.lambda_star = mode.lambda;
  hd.mu_residual = std::abs(mode.lambda.real());
  hd.omega_star = mode.lambda.imag();
  hd.residual_right = mode.residual_right;
  hd.residual_left = mode.residual_left;
  hd.p = mode.p;
  hd.psi_plus = mode.psi_plus;

  auto lambda_at = [&](double cc) {
    const auto o = assemble_modal(ell, cc, hd.weight, lin);
    return refine_two_sided(o.matrix, mode.lambda, mode.weighted_right).lambda;
  };
  const double h = opts.dc;
  const cplx d1 = (lambda_at(c + h) - lambda_at(c - h)) / (2.0 * h);
  const cplx d2 = (lambda_at(c + 2 * h) - lambda_at(c - 2 * h)) / (4.0 * h);
  hd.lambda_prime_central = d1;
  hd.lambda_prime = (4.0 * d1 - d2) / 3.0;
  hd.mu_prime = hd.lambda_prime.real();

  hd.transversal = hd.mu_prime > 0.0;
  if (!hd.transversal) {
    std::ostringstream msg;
    msg << "crossing speed mu' = " << hd.mu_prime
        << " is not positive: the critical pair crosses into the left half-plane as c increases";
    hd.diagnostic = msg.str();
    if (opts.strict_transversality) throw HypothesisFailure(hd.diagnostic);
  }
  return hd;
}

CrossingCheck crossing_speed_check(const HopfData& hopf, double tol) {
  CrossingCheck out;
  out.lambda_prime_fd = hopf.lambda_prime;
  // p' is formed in weighted coordinates, (d/dx - g)(w p) / w, which is the
  // derivative the discrete operator actually uses; the plain spectral
  // derivative of p is kept as a diagnostic.
  const ModalApplier conj_dx(Linearization::trivial(hopf.p.grid, ModelSpec{}), hopf.ell, 0.0,
                             hopf.weight);
  const auto dp =
      unweight(conj_dx.apply_c_derivative(weight_by(hopf.p, hopf.weight)), hopf.weight);
  out.lambda_prime_formula = inner_product(dp, hopf.psi_plus);
  out.lambda_prime_plain = inner_product(deriv_x(hopf.p, 1), hopf.psi_plus);
  out.relative_gap = std::abs(out.lambda_prime_fd - out.lambda_prime_formula) /
                     std::max(std::abs(out.lambda_prime_fd), 1e-300);
  out.agree = out.relative_gap < tol;
  return out;
}

std::vector<EigenBranch> branch_track(int ell, const std::vector<double>& c_values, int n_branches,
                                      double eta, const Linearization& lin,
                                      const EigsOptions& opts) {
  std::vector<EigenBranch> branches;
  if (c_values.empty() || n_branches <= 0) return branches;
  const int count = 2 * n_branches + 6;
  std::vector<Eigen::VectorXcd> last(n_branches);
  // One weight for the whole track so that eigenvector overlaps compare
  // like with like.
  const double c_mid = 0.5 * (c_values.front() + c_values.back());
  const WeightSpec weight{eta, plateau_tilt(ell, c_mid, lin), lin.model.K_halfwidth, 1.0};
  for (std::size_t ic = 0; ic < c_values.size(); ++ic) {
    const double c = c_values[ic];
    const auto op = assemble_modal(ell, c, weight, lin);
    auto pairs = eigs_near(op, rightmost_shift(ell, lin.grid->k, c), count, opts);
    std::erase_if(pairs, [&](const EigenPair& p) {
      return p.lambda.imag() < -1e-12 || p.residual > 1e3 * opts.tol;
    });
    if (ic == 0) {
      std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
        return a.lambda.real() > b.lambda.real();
      });
      const int take = std::min<int>(n_branches, static_cast<int>(pairs.size()));
      branches.resize(take);
      last.resize(take);
      for (int b = 0; b < take; ++b) {
        branches[b].ell = ell;
        branches[b].points.push_back({c, pairs[b].lambda, 1.0, false});
        last[b] = as_vector(pairs[b].profile);
      }
      continue;
    }
    for (std::size_t b = 0; b < branches.size(); ++b) {
      double best_overlap = -1.0;
      std::size_t best = 0;
      const cplx prev_lambda = branches[b].points.back().lambda;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Eigen::VectorXcd v = as_vector(pairs[i].profile);
        const double ov = std::abs(last[b].dot(v)) / (last[b].norm() * v.norm());
        const bool tie = std::abs(ov - best_overlap) < 1e-3;
        if (ov > best_overlap + 1e-3 ||
            (tie && std::abs(pairs[i].lambda - prev_lambda) <
                        std::abs(pairs[best].lambda - prev_lambda))) {
          best_overlap = std::max(ov, best_overlap);
          best = i;
        }
      }
      if (pairs.empty()) throw NumericalError("branch_track: eigensolve returned no pairs");
      branches[b].points.push_back({c, pairs[best].lambda, best_overlap, best_overlap < 0.5});
      last[b] = as_vector(pairs[best].profile);
    }
  }
  return branches;
}

std::vector<KScanPoint> k_scan(const std::vector<double>& k_values, double c, double eta,
                               const Linearization& lin, int ell, const EigsOptions& opts) {
  std::vector<KScanPoint> out;
  for (double k : k_values) {
    if (!(k > 0.0)) throw InvalidArgument("k_scan: wavenumbers must be positive");
    const auto lk = with_k(lin, k);
    const WeightSpec weight{eta, plateau_tilt(ell, c, lk), lk.model.K_halfwidth, 1.0};
    out.push_back({k, leading_eigenvalue(ell, c, weight, lk, opts)});
  }
  return out;
}

ResonanceMargin nonresonance_margin(const HopfData& hopf, const Linearization& lin, int ell_max,
                                    const std::vector<int>& n_values) {
  ResonanceMargin best{1e300, 0, 0};
  for (int ell = 0; ell <= ell_max; ++ell) {
    const auto op = assemble_modal(ell, hopf.c_star, 0.0, lin);
    for (int n : n_values) {
      const double s = smallest_singular_value(op.matrix, cplx{0.0, n * hopf.omega_star});
      if (s < best.sigma_min) best = {s, ell, n};
    }
  }
  return best;
}

Eigen::MatrixXcd bordered_matrix(const Eigen::MatrixXcd& A, const WeightProfile& w) {
  const long n = A.rows();
  Eigen::VectorXcd z(n);
  for (long j = 0; j < n; ++j) z[j] = 1.0 / w.values[j];
  z /= z.norm();
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  B.topLeftCorner(n, n) = A;
  B.col(n).head(n) = z;
  B.row(n).head(n) = z.transpose();
  return B;
}

double zero_mode_margin(double c, double eta, const Linearization& lin) {
  const auto op = assemble_modal(0, c, eta, lin);
  const auto w = weight_profile(*lin.grid, eta);
  return smallest_singular_value(bordered_matrix(op.matrix.cast<cplx>(), w));
}

}  // namespace qlab
