#include "qlab/dispersion.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "qlab/error.hpp"

namespace qlab::dispersion {

namespace {

double q_of(const DispersionParams& p) { return p.k * p.k * p.ell * p.ell; }

// Descending coefficients of nu -> d(lambda, nu):
// -nu^4 + (2q - h) nu^2 + c nu - q(q - h) - lambda.
std::vector<cplx> quartic_coeffs(cplx lambda, const DispersionParams& p) {
  const double q = q_of(p), h = p.h_inf;
  return {-1.0, 0.0, 2.0 * q - h, p.c, -q * (q - h) - lambda};
}

cplx horner(const std::vector<cplx>& a, cplx z) {
  cplx acc = 0.0;
  for (const auto& c : a) acc = acc * z + c;
  return acc;
}

cplx horner_derivative(const std::vector<cplx>& a, cplx z) {
  cplx acc = 0.0;
  const std::size_t n = a.size() - 1;
  for (std::size_t i = 0; i < n; ++i) acc = acc * z + a[i] * static_cast<double>(n - i);
  return acc;
}

bool by_real_desc(const cplx& a, const cplx& b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

struct Tracked {
  cplx a, b;
};

// Follow the pair of roots emanating from a double root along
// lambda(rho) = lambda0 + rho * dir, with geometric steps and step halving
// whenever nearest-neighbour matching is ambiguous.
std::optional<Tracked> track_pair(const DoubleRoot& root, cplx dir) {
  const auto& p = root.params;
  const double scale = 1.0 + std::abs(root.lambda);
  double rho = 1e-8 * scale;
  const double rho_max = 1e6 * scale;

  auto roots_at = [&](double r) { return nu_roots(root.lambda + r * dir, p); };

  auto r0 = roots_at(rho);
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(r0[i] - root.nu) < std::abs(r0[j] - root.nu);
  });
  // The two coalescing roots must be well separated from the other two.
  const double near = std::abs(r0[order[1]] - root.nu);
  const double far = std::abs(r0[order[2]] - root.nu);
  if (!(near < 0.1 * far)) return std::nullopt;
  Tracked t{r0[order[0]], r0[order[1]]};

  double factor = 1.25;
  while (rho < rho_max) {
    const double next = std::min(rho * factor, rho_max);
    const auto r = roots_at(next);
    auto match = [&](cplx z, std::size_t& idx) {
      std::array<double, 4> dist;
      for (std::size_t i = 0; i < 4; ++i) dist[i] = std::abs(r[i] - z);
      idx = static_cast<std::size_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
      double second = 1e300;
      for (std::size_t i = 0; i < 4; ++i)
        if (i != idx) second = std::min(second, dist[i]);
      return dist[idx] < 0.3 * second;
    };
    std::size_t ia = 0, ib = 0;
    const bool ok = match(t.a, ia) && match(t.b, ib) && ia != ib;
    if (!ok) {
      factor = 1.0 + 0.5 * (factor - 1.0);
      if (factor - 1.0 < 1e-7) return std::nullopt;
      continue;
    }
    t = {r[ia], r[ib]};
    rho = next;
    factor = std::min(1.25, 1.0 + 2.0 * (factor - 1.0));
  }
  return t;
}

}  // namespace

std::string to_string(BranchCurve::Label label) {
  switch (label) {
    case BranchCurve::Label::essential:
      return "essential";
    case BranchCurve::Label::absolute:
      return "absolute";
    case BranchCurve::Label::branch_point_track:
      return "branch-point-track";
  }
  return "unknown";
}

void DispersionParams::validate() const {
  if (h_inf != 1 && h_inf != -1) throw InvalidArgument("dispersion: h_inf must be -1 or +1");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("dispersion: k must be positive");
  if (!std::isfinite(c)) throw InvalidArgument("dispersion: c must be finite");
}

cplx d_eval(cplx lambda, cplx nu, const DispersionParams& p) {
  const cplx s = nu * nu - q_of(p);
  return -s * (s + static_cast<double>(p.h_inf)) + p.c * nu - lambda;
}

cplx d_nu(cplx nu, const DispersionParams& p) {
  const double q = q_of(p), h = p.h_inf;
  return -4.0 * nu * nu * nu + 2.0 * (2.0 * q - h) * nu + p.c;
}

cplx d_nunu(cplx nu, const DispersionParams& p) {
  const double q = q_of(p), h = p.h_inf;
  return -12.0 * nu * nu + 2.0 * (2.0 * q - h);
}

cplx lambda_of_nu(cplx nu, const DispersionParams& p) {
  const cplx s = nu * nu - q_of(p);
  return -s * (s + static_cast<double>(p.h_inf)) + p.c * nu;
}

std::vector<cplx> polynomial_roots(const std::vector<cplx>& a) {
  std::size_t lead = 0;
  while (lead < a.size() && a[lead] == 0.0) ++lead;
  if (lead + 1 >= a.size()) return {};
  const std::vector<cplx> coeffs(a.begin() + static_cast<long>(lead), a.end());
  const int n = static_cast<int>(coeffs.size()) - 1;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) comp(0, j) = -coeffs[j + 1] / coeffs[0];
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  for (auto& z : roots) {
    for (int it = 0; it < 3; ++it) {
      const cplx f = horner(coeffs, z);
      const cplx df = horner_derivative(coeffs, z);
      if (std::abs(df) == 0.0) break;
      const cplx trial = z - f / df;
      if (std::abs(horner(coeffs, trial)) < std::abs(f))
        z = trial;
      else
        break;
    }
  }
  return roots;
}

std::array<cplx, 4> nu_roots(cplx lambda, const DispersionParams& p) {
  const auto r = polynomial_roots(quartic_coeffs(lambda, p));
  std::array<cplx, 4> out{r[0], r[1], r[2], r[3]};
  std::sort(out.begin(), out.end(), by_real_desc);
  return out;
}

BranchCurve essential_curve(const DispersionParams& p, const std::vector<double>& m_values) {
  p.validate();
  if (p.h_inf != -1) throw InvalidArgument("essential_curve: defined for the far-field state h_inf = -1");
  return weighted_essential_curve(p, 0.0, m_values);
}

BranchCurve weighted_essential_curve(const DispersionParams& p, double eta,
                                     const std::vector<double>& m_values) {
  p.validate();
  if (!(eta >= 0.0)) throw InvalidArgument("weighted_essential_curve: eta must be non-negative");
  BranchCurve curve;
  curve.label = BranchCurve::Label::essential;
  for (double m : m_values) {
    const cplx nu{-eta, m};
    curve.samples.push_back({m, lambda_of_nu(nu, p), nu, false});
  }
  return curve;
}

DoubleRoot double_root(const DispersionParams& p, cplx nu_seed) {
  p.validate();
  cplx nu = nu_seed;
  DoubleRoot out;
  out.params = p;
  for (int it = 0; it < 60; ++it) {
    const cplx f = d_nu(nu, p);
    const double scale = 1.0 + std::abs(p.c) + 4.0 * std::pow(std::abs(nu), 3);
    if (std::abs(f) < 1e-14 * scale) break;
    const cplx df = d_nunu(nu, p);
    if (std::abs(df) < 1e-300) break;
    nu -= f / df;
    if (it == 59) {
      out.nu = nu;
      out.lambda = lambda_of_nu(nu, p);
      throw NoConvergence<DoubleRoot>("double_root: Newton did not converge", out);
    }
  }
  out.nu = nu;
  out.lambda = lambda_of_nu(nu, p);
  const double scale = 1.0 + std::abs(p.c) + 4.0 * std::pow(std::abs(nu), 3);
  if (std::abs(d_nu(nu, p)) > 1e-12 * scale || !std::isfinite(std::abs(nu)))
    throw NoConvergence<DoubleRoot>("double_root: residual above tolerance", out);
  out.pinched = pinching_check(out);
  return out;
}

std::vector<DoubleRoot> double_roots(const DispersionParams& p) {
  const double q = q_of(p), h = p.h_inf;
  const auto seeds = polynomial_roots({-4.0, 0.0, 2.0 * (2.0 * q - h), p.c});
  std::vector<DoubleRoot> out;
  for (const auto& s : seeds) out.push_back(double_root(p, s));
  return out;
}

bool pinching_check(const DoubleRoot& root) {
  // The real direction is canonical; slightly tilted rays resolve exact
  // collisions that occur in symmetric configurations.
  const double angles[] = {0.0, 0.05, -0.05, 0.2, -0.2};
  for (double th : angles) {
    const auto t = track_pair(root, std::polar(1.0, th));
    if (!t) continue;
    const double ra = t->a.real(), rb = t->b.real();
    const double tol = 1e-8 * (1.0 + std::abs(t->a) + std::abs(t->b));
    if (std::abs(ra) < tol || std::abs(rb) < tol) continue;
    return (ra > 0.0) != (rb > 0.0);
  }
  throw NumericalError("pinching_check: root tracking could not disambiguate the coalescing roots");
}

SpreadingSpeed spreading_speed(int ell, double k, int h_inf) {
  DispersionParams base{k, ell, 0.0, h_inf};
  base.validate();
  const double q = k * k * ell * ell, h = h_inf;
  // Unknown nu; c(nu) from d_nu = 0, lambda(nu) explicit. Require Im c = 0
  // and Re lambda = 0, then keep real positive pinched solutions.
  auto c_of = [&](cplx nu) { return 4.0 * nu * nu * nu - 2.0 * (2.0 * q - h) * nu; };
  auto c_prime = [&](cplx nu) { return 12.0 * nu * nu - 2.0 * (2.0 * q - h); };
  auto lam = [&](cplx nu) {
    const cplx s = nu * nu - q;
    return -s * (s + h) + c_of(nu) * nu;
  };
  auto lam_prime = [&](cplx nu) {
    const cplx s = nu * nu - q;
    return -(2.0 * s + h) * 2.0 * nu + c_prime(nu) * nu + c_of(nu);
  };

  std::vector<cplx> found;
  for (double xr = -2.0; xr <= 2.0 + 1e-12; xr += 0.25) {
    for (double xi = -2.0; xi <= 2.0 + 1e-12; xi += 0.25) {
      cplx nu{xr, xi};
      bool ok = false;
      for (int it = 0; it < 80; ++it) {
        const cplx g = c_of(nu), L = lam(nu);
        const double F0 = g.imag(), F1 = L.real();
        if (std::abs(F0) + std::abs(F1) < 1e-15) {
          ok = true;
          break;
        }
        const cplx gp = c_prime(nu), Lp = lam_prime(nu);
        // Cauchy-Riemann: d(Im g)/dx = Im g', d(Im g)/dy = Re g',
        // d(Re L)/dx = Re L', d(Re L)/dy = -Im L'.
        const double a = gp.imag(), b = gp.real(), cc = Lp.real(), d = -Lp.imag();
        const double det = a * d - b * cc;
        if (std::abs(det) < 1e-300) break;
        const double dx = (F0 * d - b * F1) / det;
        const double dy = (a * F1 - cc * F0) / det;
        nu -= cplx{dx, dy};
        if (std::abs(nu) > 1e3) break;
        if (std::abs(dx) + std::abs(dy) < 1e-15 * (1.0 + std::abs(nu))) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      const cplx g = c_of(nu);
      if (std::abs(g.imag()) > 1e-11 || g.real() <= 0.0) continue;
      bool dup = false;
      for (const auto& z : found)
        if (std::abs(z - nu) < 1e-8) dup = true;
      if (!dup) found.push_back(nu);
    }
  }

  std::optional<SpreadingSpeed> best;
  for (const auto& nu : found) {
    DispersionParams p = base;
    p.c = c_of(nu).real();
    DoubleRoot r;
    try {
      r = double_root(p, nu);
    } catch (const NumericalError&) {
      continue;
    }
    if (!r.pinched || std::abs(r.lambda.real()) > 1e-9) continue;
    if (!best || p.c > best->c_star ||
        (p.c == best->c_star && r.lambda.imag() > best->root.lambda.imag()))
      best = SpreadingSpeed{p.c, r};
  }
  if (!best) throw NumericalError("spreading_speed: no positive spreading speed");
  return *best;
}

std::optional<DoubleRoot> leading_branch_point(const DispersionParams& p) {
  std::optional<DoubleRoot> best;
  for (const auto& r : double_roots(p)) {
    if (!r.pinched) continue;
    if (!best || r.lambda.real() > best->lambda.real() + 1e-13 ||
        (std::abs(r.lambda.real() - best->lambda.real()) <= 1e-13 &&
         r.lambda.imag() > best->lambda.imag()))
      best = r;
  }
  return best;
}

BranchCurve absolute_curve(const DispersionParams& p, const std::vector<double>& gamma_offsets) {
  p.validate();
  const auto start = leading_branch_point(p);
  if (!start) throw NumericalError("absolute_curve: no pinched double root to continue from");
  BranchCurve curve;
  curve.label = BranchCurve::Label::absolute;
  const double q = q_of(p), h = p.h_inf;
  const double a2 = 2.0 * q - h;
  // Continue separately away from gamma = 0 in both directions so each
  // sample is matched to its neighbour.
  std::vector<double> sorted = gamma_offsets;
  std::sort(sorted.begin(), sorted.end());
  std::vector<BranchSample> samples(sorted.size());
  auto solve_at = [&](double gamma, cplx prev) {
    // Roots nu and nu + i gamma of the same quartic: the divided difference
    // [d(nu + hh) - d(nu)] / hh vanishes, a cubic in nu.
    const cplx hh{0.0, gamma};
    const auto r = polynomial_roots({-4.0, -6.0 * hh, -4.0 * hh * hh + 2.0 * a2,
                                     -hh * hh * hh + a2 * hh + p.c});
    cplx best = r[0];
    for (const auto& z : r)
      if (std::abs(z - prev) < std::abs(best - prev)) best = z;
    return best;
  };
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), 0.0) - sorted.begin();
  cplx prev = start->nu;
  for (long i = lo; i < static_cast<long>(sorted.size()); ++i) {
    const cplx nu = solve_at(sorted[i], prev);
    prev = nu;
    samples[i] = {sorted[i], lambda_of_nu(nu, p), nu, false};
  }
  prev = start->nu;
  for (long i = lo - 1; i >= 0; --i) {
    const cplx nu = solve_at(sorted[i], prev);
    prev = nu;
    samples[i] = {sorted[i], lambda_of_nu(nu, p), nu, false};
  }
  curve.samples = std::move(samples);
  return curve;
}

BranchPointTrack branch_point_track(int ell, double k, const std::vector<double>& c_values,
                                    int h_inf) {
  BranchPointTrack out;
  out.curve.label = BranchCurve::Label::branch_point_track;
  std::vector<double> cs = c_values;
  std::sort(cs.begin(), cs.end());
  auto re_bp = [&](double c) -> std::optional<DoubleRoot> {
    return leading_branch_point(DispersionParams{k, ell, c, h_inf});
  };
  for (double c : cs) {
    const auto bp = re_bp(c);
    if (!bp) continue;
    out.curve.samples.push_back({c, bp->lambda, bp->nu, true});
  }
  const auto& s = out.curve.samples;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double f0 = s[i].lambda.real(), f1 = s[i + 1].lambda.real();
    if ((f0 > 0.0) == (f1 > 0.0)) continue;
    double a = s[i].param, b = s[i + 1].param, fa = f0;
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
      const double m = 0.5 * (a + b);
      const auto bp = re_bp(m);
      const double fm = bp ? bp->lambda.real() : -1.0;
      if ((fm > 0.0) == (fa > 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    out.neutral_c = 0.5 * (a + b);
    return out;
  }
  throw NumericalError("branch_point_track: no sign change of Re lambda_bp in the c range");
}

CubicRoots steady_cubic_roots(double c, double f_prime) {
  const auto r = polynomial_roots({1.0, 0.0, f_prime, -c});
  CubicRoots out;
  for (int i = 0; i < 3; ++i) out.roots[i] = r[i];
  std::sort(out.roots.begin(), out.roots.end(), by_real_desc);
  for (const auto& z : out.roots) {
    const double tol = 1e-12 * (1.0 + std::abs(z));
    if (z.real() > tol)
      ++out.positive_real;
    else if (z.real() < -tol)
      ++out.negative_real;
    else
      ++out.zero_real;
  }
  return out;
}

}  // namespace qlab::dispersion
