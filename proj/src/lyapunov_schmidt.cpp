#include "qlab/lyapunov_schmidt.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qlab/error.hpp"

namespace qlab {

namespace {

struct TagInfo {
  ModeTag mode;
  // Factors of the quadratic product: 'p', 'P' (conjugate of p), 'q', 'Q'.
  char first, second;
};

TagInfo tag_info(PairTag tag) {
  switch (tag) {
    case PairTag::aa: return {{2, 2}, 'p', 'p'};
    case PairTag::aabar: return {{0, 0}, 'p', 'P'};
    case PairTag::ab: return {{2, 0}, 'p', 'q'};
    case PairTag::abbar: return {{0, 2}, 'p', 'Q'};
    case PairTag::bb: return {{2, -2}, 'q', 'q'};
    case PairTag::bbbar: return {{0, 0}, 'q', 'Q'};
    case PairTag::abar_b: return {{0, -2}, 'P', 'q'};
    case PairTag::aa_conj: return {{-2, -2}, 'P', 'P'};
    case PairTag::ab_conj: return {{-2, 0}, 'P', 'Q'};
    case PairTag::abbar_conj: return {{0, -2}, 'P', 'q'};
  }
  throw InvalidArgument("unknown pair tag");
}

ModalProfile b_kernel(const ReductionInput& in) {
  ModalProfile q = in.b_profile ? *in.b_profile : in.hopf->p;
  q.ell = -in.hopf->ell;
  return q;
}

ModalProfile pick(char which, const ModalProfile& p, const ModalProfile& q) {
  switch (which) {
    case 'p': return p;
    case 'P': return conj(p);
    case 'q': return q;
    default: return conj(q);
  }
}

void require_ready(const ReductionInput& in) {
  if (!in.hopf || !in.lin) throw InvalidArgument("reduction input needs Hopf data and a linearization");
  if (!in.hopf->p.grid || !in.hopf->p.grid->same_as(*in.lin->grid))
    throw InvalidArgument("reduction input: Hopf data and linearization live on different grids");
}

}  // namespace

ModeTag mode_of(PairTag tag) { return tag_info(tag).mode; }

std::string to_string(PairTag tag) {
  switch (tag) {
    case PairTag::aa: return "aa";
    case PairTag::aabar: return "aabar";
    case PairTag::ab: return "ab";
    case PairTag::abbar: return "abbar";
    case PairTag::bb: return "bb";
    case PairTag::bbbar: return "bbbar";
    case PairTag::abar_b: return "abar_b";
    case PairTag::aa_conj: return "aa_conj";
    case PairTag::ab_conj: return "ab_conj";
    case PairTag::abbar_conj: return "abbar_conj";
  }
  return "?";
}

ModalProfile solve_phi(PairTag tag, const ReductionInput& in, PhiSolveInfo* info) {
  require_ready(in);
  const auto& hopf = *in.hopf;
  const auto& lin = *in.lin;
  const auto ti = tag_info(tag);
  const auto& grid = lin.grid;
  const long n = grid->n_x;
  const ModalProfile q = b_kernel(in);
  const auto f2 = sample_f_derivative(*grid, lin.front, lin.model, 2);

  PhiSolveInfo local;
  local.mode = ti.mode;
  {
    // Solvability of the stated right-hand side, in plain coordinates.
    const auto a = pick(ti.first, hopf.p, q), b = pick(ti.second, hopf.p, q);
    ModalProfile src = ModalProfile::zeros(grid, ti.mode.ell_y);
    for (long j = 0; j < n; ++j) src.values[j] = 0.5 * f2[j] * a.values[j] * b.values[j];
    cplx mean{};
    for (const auto& v : apply_Dell(src, ti.mode.ell_y).values) mean += v;
    local.rhs_mean = std::abs(mean) / static_cast<double>(n);
  }

  // The system lives in weighted coordinates, where the weight rides on the
  // first factor of the product and the conjugated D replaces D.
  const auto w = weight_profile(*grid, hopf.weight);
  const auto a = pick(ti.first, weight_by(hopf.p, hopf.weight), weight_by(q, hopf.weight));
  const auto bf = pick(ti.second, hopf.p, q);
  std::vector<cplx> src(n), rhs(n);
  for (long j = 0; j < n; ++j) src[j] = 0.5 * f2[j] * a.values[j] * bf.values[j];
  const ModalApplier L(lin, ti.mode.ell_y, hopf.c_star, hopf.weight);
  L.apply_D(src, rhs);
  Eigen::VectorXcd b(n);
  for (long j = 0; j < n; ++j) b[j] = -rhs[j];

  const auto op = assemble_modal(ti.mode.ell_y, hopf.c_star, hopf.weight, lin, in.exec);
  Eigen::MatrixXcd A = -op.matrix.cast<cplx>();
  A.diagonal().array() += cplx{0.0, ti.mode.ell_tau * hopf.omega_star};

  Eigen::VectorXcd x;
  const bool bordered = ti.mode.ell_tau == 0 && ti.mode.ell_y == 0;
  if (bordered) {
    const Eigen::MatrixXcd B = bordered_matrix(A, w);
    Eigen::VectorXcd bb = Eigen::VectorXcd::Zero(n + 1);
    bb.head(n) = b;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(B);
    local.rcond = lu.rcond();
    Eigen::VectorXcd sol = lu.solve(bb);
    // One step of iterative refinement; the bordered matrix is poorly scaled.
    sol += lu.solve(bb - B * sol);
    x = sol.head(n);
    local.mean_defect = std::abs(sol[n]);
  } else {
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    local.rcond = lu.rcond();
    if (!(local.rcond > 1e-13)) {
      std::ostringstream msg;
      msg << "quadratic system " << to_string(tag) << " is singular (rcond " << local.rcond
          << "): resonance between the Hopf frequency and mode (" << ti.mode.ell_tau << ", "
          << ti.mode.ell_y << ")";
      throw HypothesisFailure(msg.str());
    }
    x = lu.solve(b);
    x += lu.solve(b - A * x);
  }
  if (!x.allFinite()) throw NumericalError("solve_phi: non-finite solution for " + to_string(tag));
  const double bnorm = b.norm();
  local.residual = bnorm > 0.0 ? (A * x - b).norm() / bnorm : (A * x).norm();

  ModalProfile phi = ModalProfile::zeros(grid, ti.mode.ell_y);
  for (long j = 0; j < n; ++j) phi.values[j] = x[j] / w.values[j];
  if (info) *info = local;
  return phi;
}

PhiSet solve_phi_set(const ReductionInput& in) {
  PhiSet s;
  s.aa = solve_phi(PairTag::aa, in, &s.info[0]);
  s.aabar = solve_phi(PairTag::aabar, in, &s.info[1]);
  s.ab = solve_phi(PairTag::ab, in, &s.info[2]);
  s.abbar = solve_phi(PairTag::abbar, in, &s.info[3]);
  return s;
}

ThetaPair theta_coeffs(const HopfData& hopf, const PhiSet& phis, const Linearization& lin) {
  const auto& grid = lin.grid;
  const auto& W = hopf.weight;
  const long n = grid->n_x;
  const auto& p = hopf.p.values;
  // Balanced copies: v = w p carries the weight, l = psi / w the adjoint.
  const auto v = weight_by(hopf.p, W).values;
  const auto l = unweight(hopf.psi_plus, W);
  const auto f2 = sample_f_derivative(*grid, lin.front, lin.model, 2);
  const auto f3 = sample_f_derivative(*grid, lin.front, lin.model, 3);
  const auto& aa = phis.aa.values;
  const auto& aabar = phis.aabar.values;
  const auto& ab = phis.ab.values;
  const auto& abbar = phis.abbar.values;

  // w times the terms multiplying a|a|^2 and a|b|^2. The b-kernel equals p,
  // and the (0,0) correction of |b|^2 equals that of |a|^2.
  ModalProfile s1 = ModalProfile::zeros(grid, hopf.ell), s2 = s1;
  for (long j = 0; j < n; ++j) {
    const cplx cubic = v[j] * p[j] * std::conj(p[j]);
    s1.values[j] = 0.5 * f3[j] * cubic + f2[j] * (v[j] * aabar[j] + std::conj(v[j]) * aa[j]);
    s2.values[j] = f3[j] * cubic +
                   f2[j] * (v[j] * aabar[j] + v[j] * abbar[j] + std::conj(v[j]) * ab[j]);
  }
  const ModalApplier L(lin, hopf.ell, hopf.c_star, W);
  ModalProfile d1 = ModalProfile::zeros(grid, hopf.ell), d2 = d1;
  L.apply_D(s1.values, d1.values);
  L.apply_D(s2.values, d2.values);

  ThetaPair th;
  th.theta1 = -inner_product(d1, l);
  th.theta2 = -inner_product(d2, l);
  return th;
}

std::string to_string(BifurcationType t) {
  switch (t) {
    case BifurcationType::type1: return "1";
    case BifurcationType::type2: return "2";
    case BifurcationType::type3: return "3";
    case BifurcationType::type4: return "4";
    case BifurcationType::degenerate: return "degenerate";
  }
  return "?";
}

std::string to_string(BranchSide s) {
  switch (s) {
    case BranchSide::below: return "below";
    case BranchSide::above: return "above";
    case BranchSide::undetermined: return "undetermined";
  }
  return "?";
}

LSReport classify(cplx theta1, cplx theta2) {
  LSReport r;
  r.theta1 = theta1;
  r.theta2 = theta2;
  r.alpha = (theta1.real() + theta2.real()) / 2.0;
  r.beta = (theta2.real() - theta1.real()) / 2.0;
  const double scale = std::abs(theta1) + std::abs(theta2);
  const double eps = 1e-12 * scale;
  const double a = r.alpha, b = r.beta;
  if (scale == 0.0 || std::abs(a) <= eps || std::abs(b) <= eps || std::abs(a - b) <= eps) {
    r.bif_type = BifurcationType::degenerate;
    r.message = "higher-order terms required";
    return r;
  }
  if (a < 0.0 && b > 0.0) {
    r.bif_type = BifurcationType::type1;
  } else if (a > 0.0 && b < 0.0) {
    r.bif_type = BifurcationType::type3;
  } else if (a > 0.0) {
    r.bif_type = a > b ? BifurcationType::type3 : BifurcationType::type2;
  } else {
    r.bif_type = a < b ? BifurcationType::type1 : BifurcationType::type4;
  }
  return r;
}

LSReport make_report(const ThetaPair& th, const HopfData& hopf) {
  LSReport r = classify(th.theta1, th.theta2);
  r.c_star = hopf.c_star;
  r.omega_star = hopf.omega_star;
  r.mu_prime = hopf.mu_prime;
  if (hopf.mu_prime != 0.0) {
    r.c_os_coeff = -th.theta1.real() / hopf.mu_prime;
    r.c_cb_coeff = -(th.theta1 + th.theta2).real() / hopf.mu_prime;
  }
  auto side = [](double coeff) {
    if (coeff < 0.0) return BranchSide::below;
    if (coeff > 0.0) return BranchSide::above;
    return BranchSide::undetermined;
  };
  r.rotating_side = side(r.c_os_coeff);
  r.standing_side = side(r.c_cb_coeff);
  return r;
}

std::string LSReport::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "theta1_re = " << theta1.real() << '\n'
     << "theta1_im = " << theta1.imag() << '\n'
     << "theta2_re = " << theta2.real() << '\n'
     << "theta2_im = " << theta2.imag() << '\n'
     << "alpha = " << alpha << '\n'
     << "beta = " << beta << '\n'
     << "c_star = " << c_star << '\n'
     << "omega_star = " << omega_star << '\n'
     << "mu_prime = " << mu_prime << '\n'
     << "c_os_coeff = " << c_os_coeff << '\n'
     << "c_cb_coeff = " << c_cb_coeff << '\n'
     << "rotating_side = " << to_string(rotating_side) << '\n'
     << "standing_side = " << to_string(standing_side) << '\n'
     << "bif_type = " << to_string(bif_type) << '\n';
  if (!message.empty()) os << "message = " << message << '\n';
  return os.str();
}

std::vector<BranchSample> predict_branches(const LSReport& report, std::span<const double> a_values) {
  std::vector<BranchSample> out;
  out.reserve(a_values.size());
  for (double a : a_values) {
    if (a < 0.0) throw InvalidArgument("predict_branches: amplitudes must be non-negative");
    out.push_back({a, report.c_star + report.c_os_coeff * a * a,
                   report.c_star + report.c_cb_coeff * a * a});
  }
  return out;
}

namespace {

ModalProfile profile_on(const ModalProfile& p, const GridPtr& grid) {
  if (p.grid->n_x == grid->n_x && p.grid->half_width_M == grid->half_width_M) return p;
  return resample(p, grid);
}

Field base_field(const FrontProfile& front, const GridPtr& grid) {
  if (front.values.size() != static_cast<std::size_t>(grid->n_x))
    throw InvalidArgument("front profile does not match the target grid");
  Field u = Field::zeros(grid);
  for (int i = 0; i < grid->n_x; ++i)
    for (int j = 0; j < grid->n_y; ++j) u.at(i, j) = front.values[i];
  return u;
}

}  // namespace

Field oblique_field(double a, double tau, const HopfData& hopf, const FrontProfile& front,
                    GridPtr grid, int direction) {
  const auto p = profile_on(hopf.p, grid);
  Field u = base_field(front, grid);
  const double s = direction >= 0 ? 1.0 : -1.0;
  for (int i = 0; i < grid->n_x; ++i)
    for (int j = 0; j < grid->n_y; ++j) {
      const cplx e = std::polar(1.0, tau + s * grid->y_node(j));
      u.at(i, j) += 2.0 * a * (e * p.values[i]).real();
    }
  return u;
}

Field checkerboard_field(double a, double tau, const HopfData& hopf, const FrontProfile& front,
                         GridPtr grid) {
  const auto p = profile_on(hopf.p, grid);
  Field u = base_field(front, grid);
  const cplx e = std::polar(1.0, tau);
  for (int i = 0; i < grid->n_x; ++i) {
    const double r = (e * p.values[i]).real();
    for (int j = 0; j < grid->n_y; ++j) u.at(i, j) += 4.0 * a * std::cos(grid->y_node(j)) * r;
  }
  return u;
}

NormalFormValue normal_form_cubic(const ThetaPair& th, cplx a, cplx b) {
  const double a2 = std::norm(a), b2 = std::norm(b);
  const double N = a2 + b2;
  const double delta = b2 - a2;
  NormalFormValue v;
  v.assembled = a * (0.5 * (th.theta1 + th.theta2) * N + 0.5 * (th.theta2 - th.theta1) * delta);
  v.direct = th.theta1 * a * a2 + th.theta2 * a * b2;
  return v;
}

}  // namespace qlab
