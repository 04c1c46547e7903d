#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qlab/eigensolve.hpp"
#include "qlab/kernels.hpp"
#include "qlab/model.hpp"
#include "qlab/spectral.hpp"

namespace qlab {

// Everything needed to linearize about a y-independent front.
struct Linearization {
  GridPtr grid;
  ModelSpec model;
  FrontProfile front;

  static Linearization trivial(GridPtr grid, ModelSpec model);
};

// Modal block L_ell v = -D(D v + f_u v) + c v', D = d_xx - k^2 ell^2, written
// in the weighted variable w v (see WeightSpec). The conjugation is analytic:
// d/dx becomes d/dx - g with g = w'/w, so the matrix never carries the
// exponentially large weight.
struct ModalOperator {
  int ell = 0;
  double c = 0.0;
  double eta = 0.0;
  WeightSpec weight;
  GridPtr grid;
  Eigen::MatrixXd matrix;
};

// Matrix-free application of the weighted modal operator.
class ModalApplier {
 public:
  ModalApplier(const Linearization& lin, int ell, double c, double eta);
  ModalApplier(const Linearization& lin, int ell, double c, const WeightSpec& weight);
  void apply(std::span<const cplx> v, std::span<cplx> out) const;
  ModalProfile apply(const ModalProfile& v) const;
  // Same with the c-derivative of the operator (the conjugated d/dx).
  ModalProfile apply_c_derivative(const ModalProfile& v) const;
  // Conjugated D alone, for this applier's transverse index.
  void apply_D(std::span<const cplx> v, std::span<cplx> out) const;

 private:
  void derivatives(std::span<const cplx> v, std::vector<cplx>& d1, std::vector<cplx>& d2) const;
  GridPtr grid_;
  int ell_;
  double c_;
  WeightSpec weight_;
  double q_;
  std::vector<double> g_, gp_, fu_;
  std::vector<cplx> sym1_, sym2_;
};

ModalOperator assemble_modal(int ell, double c, double eta, const Linearization& lin,
                             Exec exec = Exec::parallel);
ModalOperator assemble_modal(int ell, double c, const WeightSpec& weight, const Linearization& lin,
                             Exec exec = Exec::parallel);

// Eigenvector profiles are stored in weighted coordinates; these convert.
ModalProfile unweight(const ModalProfile& weighted, double eta);
ModalProfile weight_by(const ModalProfile& plain, double eta);
ModalProfile unweight(const ModalProfile& weighted, const WeightSpec& weight);
ModalProfile weight_by(const ModalProfile& plain, const WeightSpec& weight);

struct EigenPair {
  cplx lambda;
  ModalProfile profile;  // weighted coordinates, unit 2-norm
  int ell = 0;
  double residual = 0.0;
};

struct SpectrumSet {
  std::vector<EigenPair> pairs;
  double c = 0.0, k = 0.0, eta = 0.0;
};

struct EigsOptions {
  enum class Method { automatic, dense, shift_invert };
  Method method = Method::automatic;
  int dense_max = 256;     // automatic switches to shift-invert above this size
  double tol = 1e-8;
  int krylov_dim = 0;
};

std::vector<EigenPair> eigs_near(const ModalOperator& op, cplx target, int count,
                                 const EigsOptions& opts = {});

// Shift for locating the rightmost modal eigenvalues: the plateau's leading
// absolute-spectrum branch point (upper half-plane), or a fallback target.
cplx rightmost_shift(int ell, double k, double c);

// Eigenpair with the largest real part among residual-checked pairs near the
// rightmost shift, restricted to Im lambda >= 0.
EigenPair leading_eigenpair(const ModalOperator& op, int count = 6, const EigsOptions& opts = {});

SpectrumSet aggregate_spectrum(const std::vector<int>& ells, double c, double eta, int count_total,
                               const Linearization& lin, const EigsOptions& opts = {});

struct HopfOptions {
  double eta = 0.2;
  // Exponential tilt across the plateau [-K, K]; removes the transport
  // non-normality of long plateaus without moving any eigenvalue. Unset:
  // taken from the plateau's leading branch point at the bracket midpoint.
  std::optional<double> tilt;
  double mu_tol = 1e-9;
  double dc = 1e-3;  // central differences at h and 2h, Richardson-combined
  int count = 6;
  bool strict_transversality = false;  // throw when the crossing speed is not positive
  EigsOptions eigs{};

  WeightSpec weight(const Linearization& lin, int ell, double c_ref) const;
};

// Decay rate of the plateau's critical spatial mode, -Re nu at the leading
// branch point (zero when there is none): the tilt that balances it.
double plateau_tilt(int ell, double c, const Linearization& lin);

struct HopfData {
  int ell = 1;
  double eta = 0.0;
  WeightSpec weight;
  double c_star = 0.0;
  double omega_star = 0.0;
  cplx lambda_star;
  ModalProfile p;         // unweighted, ||p|| = 1, largest entry real positive
  ModalProfile psi_plus;  // unweighted adjoint, <p, psi_plus> = 1
  double mu_prime = 0.0;
  cplx lambda_prime;          // Richardson combination of the two central differences
  cplx lambda_prime_central;  // plain central difference with step dc
  double mu_residual = 0.0;
  double residual_right = 0.0, residual_left = 0.0;
  bool transversal = false;  // mu_prime > 0
  std::string diagnostic;
  std::vector<std::pair<double, cplx>> root_history;
};

// Critical eigen data at a fixed speed: the leading pair of the ell block
// refined on both sides, with p unweighted, ||p|| = 1, its largest entry real
// positive, and psi_plus scaled so that <p, psi_plus> = 1.
struct CriticalMode {
  cplx lambda;
  ModalProfile p, psi_plus;
  Eigen::VectorXcd weighted_right;
  double residual_right = 0.0, residual_left = 0.0;
};
CriticalMode critical_mode(int ell, double c, const Linearization& lin, const HopfOptions& opts = {});
CriticalMode critical_mode(int ell, double c, const Linearization& lin, const WeightSpec& weight,
                           const HopfOptions& opts = {});

HopfData hopf_locate(int ell, std::pair<double, double> c_bracket, const Linearization& lin,
                     const HopfOptions& opts = {});

// Leading eigenvalue for a given c with the conjugated operator.
cplx leading_eigenvalue(int ell, double c, double eta, const Linearization& lin,
                        const EigsOptions& opts = {}, int count = 6);
cplx leading_eigenvalue(int ell, double c, const WeightSpec& weight, const Linearization& lin,
                        const EigsOptions& opts = {}, int count = 6);

struct CrossingCheck {
  cplx lambda_prime_fd;
  cplx lambda_prime_formula;
  cplx lambda_prime_plain;  // plain spectral derivative of the unweighted p
  double relative_gap = 0.0;
  bool agree = false;
};
CrossingCheck crossing_speed_check(const HopfData& hopf, double tol = 1e-6);

struct BranchPoint {
  double c = 0.0;
  cplx lambda;
  double overlap = 1.0;
  bool ambiguous = false;
};
struct EigenBranch {
  int ell = 0;
  std::vector<BranchPoint> points;
};
std::vector<EigenBranch> branch_track(int ell, const std::vector<double>& c_values, int n_branches,
                                      double eta, const Linearization& lin,
                                      const EigsOptions& opts = {});

// branch_track and k_scan add the plateau tilt to the weight, as hopf_locate does.
struct KScanPoint {
  double k = 0.0;
  cplx lambda;
};
std::vector<KScanPoint> k_scan(const std::vector<double>& k_values, double c, double eta,
                               const Linearization& lin, int ell = 1, const EigsOptions& opts = {});

// Smallest singular value of L_ell - i n omega (unweighted) over |ell| <= ell_max
// and n in n_values; returns (minimum, ell, n).
struct ResonanceMargin {
  double sigma_min = 0.0;
  int ell = 0;
  int n = 0;
};
ResonanceMargin nonresonance_margin(const HopfData& hopf, const Linearization& lin, int ell_max = 4,
                                    const std::vector<int>& n_values = {2, 3, 4, 5});

// Smallest singular value of the weighted ell = 0 block bordered by the
// zero-mean constraint.
double zero_mode_margin(double c, double eta, const Linearization& lin);

// Bordered matrix [A z; z^T 0] with z = 1/w, representing the zero-mean
// constraint in weighted coordinates.
Eigen::MatrixXcd bordered_matrix(const Eigen::MatrixXcd& A, const WeightProfile& w);

}  // namespace qlab
