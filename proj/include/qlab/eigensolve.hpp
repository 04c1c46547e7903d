#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qlab/kernels.hpp"

namespace qlab {

using cplx = std::complex<double>;

struct RitzPair {
  cplx lambda;
  Eigen::VectorXcd vector;  // unit 2-norm
  double residual = 0.0;    // ||A v - lambda v|| / ||v||
};

// LU factorization of A - sigma I for a real A and complex shift. A shift
// that makes the factorization numerically singular is nudged and retried.
class ShiftedLU {
 public:
  ShiftedLU(const Eigen::MatrixXd& A, cplx sigma);
  cplx shift() const { return sigma_; }
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
  Eigen::VectorXcd solve_adjoint(const Eigen::VectorXcd& b) const;

 private:
  cplx sigma_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

struct ArnoldiOptions {
  int krylov_dim = 0;    // 0: chosen from the requested count
  int max_restarts = 4;
  double tol = 1e-8;     // absolute residual target
  unsigned seed = 20240917u;
  Exec exec = Exec::parallel;
};

// Eigenpairs of A nearest sigma by shift-invert Arnoldi with full
// reorthogonalization and explicit restarts. Returns `count` pairs sorted by
// distance to sigma; residuals are recomputed against A.
std::vector<RitzPair> shift_invert_arnoldi(const Eigen::MatrixXd& A, cplx sigma, int count,
                                           const ArnoldiOptions& opts = {});

// Full dense eigendecomposition, then the `count` eigenpairs nearest target.
std::vector<RitzPair> dense_eigs(const Eigen::MatrixXd& A, cplx target, int count,
                                 Exec exec = Exec::parallel);

struct TwoSidedPair {
  cplx lambda;
  Eigen::VectorXcd right;  // A r = lambda r
  Eigen::VectorXcd left;   // A^H l = conj(lambda) l
  double residual_right = 0.0;
  double residual_left = 0.0;
};

// Inverse iteration for the eigenvalue nearest sigma, for both A and A^H,
// with the two-sided Rayleigh quotient as eigenvalue estimate.
TwoSidedPair refine_two_sided(const Eigen::MatrixXd& A, cplx sigma, const Eigen::VectorXcd& start,
                              int iterations = 6);

// Smallest singular value of A - sigma I by inverse iteration on
// (A - sigma I)^{-1} (A - sigma I)^{-H}.
double smallest_singular_value(const Eigen::MatrixXd& A, cplx sigma, int iterations = 40);
double smallest_singular_value(const Eigen::MatrixXcd& B, int iterations = 40);

double residual_norm(const Eigen::MatrixXd& A, cplx lambda, const Eigen::VectorXcd& v,
                     Exec exec = Exec::parallel);

}  // namespace qlab
