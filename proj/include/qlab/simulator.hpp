#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qlab/fft.hpp"
#include "qlab/kernels.hpp"
#include "qlab/linop.hpp"
#include "qlab/model.hpp"
#include "qlab/spectral.hpp"

namespace qlab {

// Field plus the multistep history. prev_nonlinear holds the explicit term
// of the previous step on the half-complex spectral layout (n_x, n_y/2 + 1);
// empty means the next step starts with forward Euler.
struct SimState {
  Field field;
  std::vector<cplx> prev_nonlinear;
  double t = 0.0;
  long step_count = 0;
};

// Invariant subspace enforced after every step. reflection keeps the field
// even under y -> -y, which contains the standing (checkerboard) waves.
enum class SymmetryMode { none, reflection };

struct SimOptions {
  double dt = 5e-3;
  // Implicit shift s: -Delta(s u) is carried by Crank-Nicolson and subtracted
  // from the explicit part. Unset picks default_stabilizer(model).
  std::optional<double> stabilizer;
  SymmetryMode symmetry = SymmetryMode::none;
  Exec exec = Exec::parallel;
};

// Bound on -f_u over the plateau and far field for states of the size the
// nonlinearity saturates at; keeps the high-wavenumber CN modes contracting.
double default_stabilizer(const ModelSpec& model);

// Pseudospectral IMEX integrator for
//   u_t = -Delta_k(Delta_k u + f(x, u)) + c u_x + c chi(x)
// in the co-moving frame. Owns its FFT plans and workspaces, so one instance
// drives one trajectory at a time.
class Simulator {
 public:
  Simulator(GridPtr grid, ModelSpec model, FrontProfile front, SimOptions opts = {});

  const ChannelGrid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  const ModelSpec& model() const { return model_; }
  const FrontProfile& front() const { return front_; }
  const SimOptions& options() const { return opts_; }
  double stabilizer() const { return stab_; }

  // Changes the quench speed; the multistep history is discarded.
  void set_speed(double c, SimState& state);

  void step(SimState& state);
  void advance(SimState& state, long steps);

  SimState make_state(Field field) const;

  // Normalized half-complex coefficients and back.
  void to_spectral(const Field& u, std::vector<cplx>& coeffs);
  void to_physical(std::vector<cplx> coeffs, Field& u);
  // Coefficients of the ell = 1 column over the x-wavenumbers.
  std::vector<cplx> transverse_one(const Field& u);

  // sqrt of the grid mean of (u - u*)^2, and its split into ell = 0 and
  // ell != 0 energies.
  double deviation_norm(const Field& u) const;
  std::pair<double, double> deviation_energy_split(const Field& u);

  std::size_t spectral_size() const { return coeffs_.size(); }

 private:
  void explicit_term(const Field& u, const std::vector<cplx>& uh, std::vector<cplx>& out);
  void project(std::vector<cplx>& uh) const;

  GridPtr grid_;
  ModelSpec model_;
  FrontProfile front_;
  SimOptions opts_;
  double stab_ = 1.0;
  int nx_, ny_, nyc_;
  int px_, py_, pyc_;
  fft::PlanReal2d plan_, pad_plan_;
  std::vector<double> sigma_;      // xi^2 + k^2 ell^2 on the spectral layout
  std::vector<cplx> implicit_;     // -sigma^2 - s sigma + i c xi
  std::vector<cplx> source_hat_;   // normalized coefficients of chi
  std::vector<double> h_shift_;    // h(x) + s on the grid
  std::vector<double> pad_zero_;
  std::vector<double> real_work_, pad_real_, pad_out_;
  std::vector<cplx> coeffs_, pad_coeffs_, nonlinear_;
};

enum class SeedKind { oblique_plus, oblique_minus, checkerboard, stripes, random };
std::string to_string(SeedKind k);
SeedKind parse_seed_kind(const std::string& s);

// Initial field u* + leading-order ansatz at tau = 0. stripes needs an
// ell = 0 HopfData; random uses uniform noise in [-amplitude, amplitude].
Field seed_field(SeedKind kind, double amplitude, const HopfData& hopf, const FrontProfile& front,
                 GridPtr grid, std::uint64_t rng_seed = 1);

enum class PatternClass { oblique_plus, oblique_minus, checkerboard, stripes, trivial, mixed };
std::string to_string(PatternClass p);

// Trailing-series summary of a state. z_plus and z_minus are the periodogram
// energies of the ell = 1 coefficients at +omega and -omega.
struct PatternDiagnostics {
  double amplitude = 0.0;
  double energy_ell0 = 0.0;
  double energy_rest = 0.0;
  double omega = 0.0;
  double z_plus = 0.0;
  double z_minus = 0.0;
  double period() const;
};

struct ClassifyThresholds {
  double trivial = 1e-5;
  double rotating_ratio = 10.0;  // |z+|/|z-| beyond this is rotating
  double standing_ratio = 2.0;   // within this factor is standing
};

PatternClass classify_pattern(const PatternDiagnostics& d, const ClassifyThresholds& th = {});

struct RelaxOptions {
  double tol = 1e-6;
  double t_max = 2000.0;
  double window = 20.0;
  double sample_interval = 0.25;
  double trivial_threshold = 1e-5;
  // Converged once this many consecutive window amplitudes span at most
  // tol * A. A single-window test fires at the turning points of slowly
  // damped amplitude oscillations.
  int converge_windows = 8;
  // Windows kept for the frequency estimate.
  int spectral_windows = 4;
  // A run is declared decaying when its window amplitudes fall over this
  // many windows and the fitted small-amplitude growth rate is negative.
  int decay_windows = 4;
  // The growth-rate fit is trusted only once A^2 has dropped by this fraction
  // over the fitted windows. Smaller spreads make the extrapolation to A = 0
  // unreliable, and near onset the amplitude relaxes through slowly damped
  // oscillations whose undershoot can mimic decay.
  double decay_spread = 0.9;
};

struct RelaxResult {
  SimState state;
  PatternDiagnostics diag;
  double amplitude = 0.0;
  double period_estimate = 0.0;
  bool converged = false;
  bool decaying = false;
  std::vector<double> window_amplitudes;
};

RelaxResult relax(Simulator& sim, SimState state, const RelaxOptions& opts = {});

// Runs a copy of the state for the given time and summarizes it.
PatternDiagnostics observe(Simulator& sim, SimState state, double duration,
                           double sample_interval = 0.25);
PatternClass classify_pattern(Simulator& sim, const SimState& state, double duration = 40.0,
                              const ClassifyThresholds& th = {});

struct ContinuationSample {
  double c = 0.0;
  double amplitude = 0.0;
  PatternClass pattern = PatternClass::trivial;
  double period = 0.0;
  bool converged = false;
  bool decaying = false;
};

enum class ContinuationStop { completed, branch_death, class_change };
std::string to_string(ContinuationStop s);

struct ContinuationBranch {
  std::vector<ContinuationSample> samples;
  bool increasing = true;
  ContinuationStop stop = ContinuationStop::completed;
  SimState end_state;
};

// Steps c from c_from toward c_to (inclusive, up to rounding) reusing the
// previous end state. Death of the branch or a change of pattern class ends
// the sweep; samples whose relaxation hit t_max are kept with converged unset.
ContinuationBranch adiabatic_continuation(Simulator& sim, SimState start, double c_from,
                                          double c_to, double dc, const RelaxOptions& relax_opts = {},
                                          const ClassifyThresholds& th = {});

std::string branch_csv(const ContinuationBranch& branch);

// Binary checkpoint: "QCH1", version, n_x, n_y, M, k, c, t, field; then an
// optional "HIST" block with the step count and multistep history.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  SimState state;
  double M = 0.0, k = 0.0, c = 0.0;
};

void checkpoint_save(const SimState& state, double c, const std::filesystem::path& path);
// Grid must match the stored dimensions, M and k.
Checkpoint checkpoint_load(const std::filesystem::path& path, GridPtr grid);

}  // namespace qlab
