#include "qlab/eigensolve.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qlab/error.hpp"

namespace qlab {

namespace {

Eigen::VectorXcd random_start(long n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (long i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v / v.norm();
}

bool all_finite(const Eigen::VectorXcd& v) { return v.allFinite(); }

Eigen::PartialPivLU<Eigen::MatrixXcd> factor_shifted(const Eigen::MatrixXd& A, cplx sigma) {
  Eigen::MatrixXcd M = A.cast<cplx>();
  M.diagonal().array() -= sigma;
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(M);
}

}  // namespace

ShiftedLU::ShiftedLU(const Eigen::MatrixXd& A, cplx sigma) : sigma_(sigma) {
  const double scale = 1.0 + std::abs(sigma);
  for (int attempt = 0; attempt < 4; ++attempt) {
    lu_ = factor_shifted(A, sigma_);
    // A shift close to an eigenvalue is what shift-invert wants; only an
    // exactly singular or non-finite factorization forces a nudge.
    if (lu_.rcond() > 1e-30 && lu_.matrixLU().diagonal().allFinite()) return;
    sigma_ += cplx{1e-6, 1e-6} * scale * std::pow(10.0, attempt);
  }
  throw NumericalError("shift-invert: factorization singular at shift and its perturbations");
}

Eigen::VectorXcd ShiftedLU::solve(const Eigen::VectorXcd& b) const { return lu_.solve(b); }

Eigen::VectorXcd ShiftedLU::solve_adjoint(const Eigen::VectorXcd& b) const {
  return lu_.adjoint().solve(b);
}

double residual_norm(const Eigen::MatrixXd& A, cplx lambda, const Eigen::VectorXcd& v, Exec exec) {
  Eigen::VectorXcd Av;
  dense_matvec(A, v, Av, exec);
  return (Av - lambda * v).norm() / v.norm();
}

std::vector<RitzPair> shift_invert_arnoldi(const Eigen::MatrixXd& A, cplx sigma, int count,
                                           const ArnoldiOptions& opts) {
  const long n = A.rows();
  if (A.cols() != n) throw InvalidArgument("shift_invert_arnoldi: matrix must be square");
  if (count < 1) return {};
  count = static_cast<int>(std::min<long>(count, n));
  const ShiftedLU lu(A, sigma);
  const cplx shift = lu.shift();
  const long cap = std::min<long>(n, 400);
  long m = opts.krylov_dim > 0 ? opts.krylov_dim : std::max<long>(2L * count + 20, 40);
  m = std::min(m, cap);
  Eigen::VectorXcd v0 = random_start(n, opts.seed);

  std::vector<RitzPair> best;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    Eigen::MatrixXcd V(n, m + 1);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    V.col(0) = v0 / v0.norm();
    long built = m;
    for (long j = 0; j < m; ++j) {
      Eigen::VectorXcd w = lu.solve(V.col(j));
      // Classical Gram-Schmidt applied twice.
      Eigen::VectorXcd h = V.leftCols(j + 1).adjoint() * w;
      w -= V.leftCols(j + 1) * h;
      const Eigen::VectorXcd h2 = V.leftCols(j + 1).adjoint() * w;
      w -= V.leftCols(j + 1) * h2;
      h += h2;
      H.col(j).head(j + 1) = h;
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta <= 1e-13 * h.norm()) {
        built = j + 1;  // invariant subspace
        break;
      }
      V.col(j + 1) = w / beta;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H.topLeftCorner(built, built));
    const auto& theta = es.eigenvalues();
    std::vector<long> idx(built);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](long a, long b) { return std::abs(theta[a]) > std::abs(theta[b]); });
    const long take = std::min<long>(count, built);
    std::vector<RitzPair> pairs;
    bool converged = true;
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(n);
    for (long t = 0; t < take; ++t) {
      const cplx th = theta[idx[t]];
      if (std::abs(th) == 0.0) continue;
      Eigen::VectorXcd x = V.leftCols(built) * es.eigenvectors().col(idx[t]);
      x /= x.norm();
      RitzPair rp{shift + 1.0 / th, x, 0.0};
      rp.residual = residual_norm(A, rp.lambda, x, opts.exec);
      if (rp.residual > opts.tol) {
        converged = false;
        next += x;
      }
      pairs.push_back(std::move(rp));
    }
    std::sort(pairs.begin(), pairs.end(), [&](const RitzPair& a, const RitzPair& b) {
      return std::abs(a.lambda - sigma) < std::abs(b.lambda - sigma);
    });
    best = std::move(pairs);
    if (converged || built < m) break;
    // Restart from the unconverged wanted directions in a larger space.
    for (const auto& p : best) next += 1e-3 * p.vector;
    v0 = next;
    m = std::min(2 * m, cap);
  }
  return best;
}

std::vector<RitzPair> dense_eigs(const Eigen::MatrixXd& A, cplx target, int count, Exec exec) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
  if (es.info() != Eigen::Success) throw NumericalError("dense_eigs: eigensolver failed");
  const auto& vals = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  std::vector<long> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](long a, long b) {
    return std::abs(vals[a] - target) < std::abs(vals[b] - target);
  });
  std::vector<RitzPair> out;
  const long take = std::min<long>(count, static_cast<long>(vals.size()));
  for (long t = 0; t < take; ++t) {
    Eigen::VectorXcd v = vecs.col(idx[t]);
    v /= v.norm();
    RitzPair rp{vals[idx[t]], v, 0.0};
    rp.residual = residual_norm(A, rp.lambda, v, exec);
    out.push_back(std::move(rp));
  }
  return out;
}

TwoSidedPair refine_two_sided(const Eigen::MatrixXd& A, cplx sigma, const Eigen::VectorXcd& start,
                              int iterations) {
  const long n = A.rows();
  cplx shift = sigma;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const auto lu = factor_shifted(A, shift);
    Eigen::VectorXcd r = start / start.norm();
    Eigen::VectorXcd l = random_start(n, 7u) + r;
    l /= l.norm();
    bool ok = true;
    for (int it = 0; it < iterations && ok; ++it) {
      r = lu.solve(r);
      l = lu.adjoint().solve(l);
      ok = all_finite(r) && all_finite(l) && r.norm() > 0.0 && l.norm() > 0.0;
      if (!ok) break;
      r /= r.norm();
      l /= l.norm();
    }
    if (!ok) {
      shift += cplx{1e-11, 1e-11} * (1.0 + std::abs(sigma));
      continue;
    }
    Eigen::VectorXcd Ar;
    dense_matvec(A, r, Ar, Exec::parallel);
    const cplx denom = l.dot(r);  // l^H r
    if (std::abs(denom) < 1e-14) throw NumericalError("refine_two_sided: left/right vectors orthogonal");
    TwoSidedPair out;
    out.lambda = l.dot(Ar) / denom;
    out.right = r;
    out.left = l;
    out.residual_right = (Ar - out.lambda * r).norm();
    const Eigen::MatrixXd At = A.transpose();
    out.residual_left = residual_norm(At, std::conj(out.lambda), l);
    return out;
  }
  throw NumericalError("refine_two_sided: inverse iteration broke down");
}

double smallest_singular_value(const Eigen::MatrixXcd& B, int iterations) {
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(B);
  Eigen::VectorXcd x = random_start(B.rows(), 11u);
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXcd y = lu.adjoint().solve(x);
    const Eigen::VectorXcd z = lu.solve(y);
    est = z.norm();
    if (!std::isfinite(est)) return 0.0;
    x = z / est;
  }
  return est > 0.0 ? 1.0 / std::sqrt(est) : 0.0;
}

double smallest_singular_value(const Eigen::MatrixXd& A, cplx sigma, int iterations) {
  Eigen::MatrixXcd B = A.cast<cplx>();
  B.diagonal().array() -= sigma;
  return smallest_singular_value(B, iterations);
}

}  // namespace qlab
