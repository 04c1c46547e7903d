#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qlab/linop.hpp"

namespace qlab {

// Quadratic-order corrections, labelled by the pair of kernel amplitudes that
// produces them. a rides on e^{i(tau + y)}, b on e^{i(tau - y)}; a bar denotes
// the complex conjugate amplitude.
enum class PairTag {
  aa,          // (2, 2)
  aabar,       // (0, 0)
  ab,          // (2, 0)
  abbar,       // (0, 2)
  bb,          // (2, -2)
  bbbar,       // (0, 0)
  abar_b,      // (0, -2)
  aa_conj,     // (-2, -2)
  ab_conj,     // (-2, 0)
  abbar_conj,  // (0, -2) via the conjugate of the (0, 2) system
};

struct ModeTag {
  int ell_tau = 0;
  int ell_y = 0;
};

ModeTag mode_of(PairTag tag);
std::string to_string(PairTag tag);

struct PhiSolveInfo {
  ModeTag mode;
  double residual = 0.0;       // ||A phi - rhs|| / ||rhs|| in weighted coordinates
  double rhs_mean = 0.0;       // |discrete mean| of the unweighted right-hand side
  double mean_defect = 0.0;    // bordering multiplier of the (0,0) solve
  double rcond = 0.0;
};

// Inputs shared by all quadratic solves. b_profile is the kernel profile of
// the e^{i(tau - y)} mode; when absent it is taken equal to p.
struct ReductionInput {
  const HopfData* hopf = nullptr;
  const Linearization* lin = nullptr;
  std::optional<ModalProfile> b_profile;
  Exec exec = Exec::parallel;
};

// Solves (i ell_tau omega - L_{ell_y}(c*)) phi = -D_{ell_y}(1/2 f_uu(x, u*) P)
// where P is the quadratic product for the tag. The (0, 0) systems are
// bordered by the zero-mean constraint. Returns the unweighted profile.
ModalProfile solve_phi(PairTag tag, const ReductionInput& in, PhiSolveInfo* info = nullptr);

struct PhiSet {
  ModalProfile aa, aabar, ab, abbar;
  std::array<PhiSolveInfo, 4> info{};
};

PhiSet solve_phi_set(const ReductionInput& in);

struct ThetaPair {
  cplx theta1;
  cplx theta2;
};

ThetaPair theta_coeffs(const HopfData& hopf, const PhiSet& phis, const Linearization& lin);

enum class BifurcationType { type1 = 1, type2 = 2, type3 = 3, type4 = 4, degenerate = 0 };
std::string to_string(BifurcationType t);

// Which side of c* a branch of small-amplitude solutions lives on.
enum class BranchSide { below, above, undetermined };
std::string to_string(BranchSide s);

struct LSReport {
  cplx theta1, theta2;
  double alpha = 0.0;  // Re(theta1 + theta2) / 2
  double beta = 0.0;   // Re(theta2 - theta1) / 2
  BifurcationType bif_type = BifurcationType::degenerate;
  std::string message;
  // c - c* = coefficient * a^2 for rotating (oblique) and standing (checkerboard) waves.
  double c_os_coeff = 0.0;
  double c_cb_coeff = 0.0;
  BranchSide rotating_side = BranchSide::undetermined;
  BranchSide standing_side = BranchSide::undetermined;
  double c_star = 0.0;
  double omega_star = 0.0;
  double mu_prime = 0.0;

  // Flat key = value lines, one per field.
  std::string serialize() const;
};

// Type from the signs of alpha, beta and their order; degenerate inputs get
// the degenerate type with an explanatory message.
LSReport classify(cplx theta1, cplx theta2);

// Completes the branch coefficients and sides from the crossing data.
LSReport make_report(const ThetaPair& th, const HopfData& hopf);

struct BranchSample {
  double a = 0.0;
  double c_os = 0.0;
  double c_cb = 0.0;
};
std::vector<BranchSample> predict_branches(const LSReport& report, std::span<const double> a_values);

// Leading-order fields u* + 2a Re(e^{i(tau + y)} p) and u* + 4a cos(y) Re(e^{i tau} p).
Field oblique_field(double a, double tau, const HopfData& hopf, const FrontProfile& front,
                    GridPtr grid, int direction = +1);
Field checkerboard_field(double a, double tau, const HopfData& hopf, const FrontProfile& front,
                         GridPtr grid);

// Cubic part of the first bifurcation equation, assembled from N and delta
// and evaluated directly.
struct NormalFormValue {
  cplx assembled;
  cplx direct;
};
NormalFormValue normal_form_cubic(const ThetaPair& th, cplx a, cplx b);

}  // namespace qlab
