#include "qlab/experiments.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "qlab/dispersion.hpp"
#include "qlab/error.hpp"
#include "qlab/linop.hpp"
#include "qlab/lyapunov_schmidt.hpp"
#include "qlab/plot.hpp"
#include "qlab/simulator.hpp"

namespace qlab {

std::string artifact_version() { return "quench-lab 1.0.0"; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("sha256: cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return sha256_hex(ss.str());
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["config_sha256"] = config_sha256;
  j["version"] = version;
  j["rng_seed"] = rng_seed;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["timings"] = nlohmann::ordered_json::array();
  for (const auto& t : timings) j["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  j["total_seconds"] = total_seconds;
  return j.dump(2) + "\n";
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"fig1-patterns", "fig3-spectrum", "fig4-branches",
                                                 "fig5-diagram",  "fig6-kscan",    "speeds",
                                                 "hopf",          "ls-report"};
  return names;
}

namespace {

using Clock = std::chrono::steady_clock;

// Collects outputs and timings for one scenario run.
class Run {
 public:
  Run(std::string scenario, const ExperimentConfig& cfg, std::filesystem::path dir)
      : cfg_(cfg), dir_(std::move(dir)) {
    manifest_.scenario = std::move(scenario);
    manifest_.version = artifact_version();
    manifest_.rng_seed = cfg.scenario.rng_seed;
    std::filesystem::create_directories(dir_);
    const std::string echo = echo_config(cfg);
    manifest_.config_sha256 = sha256_hex(echo);
    write("config.effective.ini", echo);
  }

  const ExperimentConfig& cfg() const { return cfg_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + (dir_ / name).string() + "'");
    f << content;
    f.close();
    if (!f) throw std::runtime_error("write failed for '" + (dir_ / name).string() + "'");
    record(name);
  }

  void plot(const PlotData& data, PlotKind kind, const std::string& name) {
    for (const auto& p : emit_plot(data, kind, dir_ / name)) record(p.filename().string());
  }

  template <class F>
  auto stage(const std::string& label, F&& fn) {
    const auto t0 = Clock::now();
    auto finish = [&] {
      manifest_.timings.push_back({label, std::chrono::duration<double>(Clock::now() - t0).count()});
    };
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto r = fn();
      finish();
      return r;
    }
  }

  RunManifest finish(Clock::time_point start) {
    manifest_.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const auto text = manifest_.to_json();
    std::ofstream f(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    f << text;
    return manifest_;
  }

 private:
  void record(const std::string& name) {
    const auto p = dir_ / name;
    for (auto& f : manifest_.files)
      if (f.path == name) {
        f.sha256 = sha256_file(p);
        f.bytes = std::filesystem::file_size(p);
        return;
      }
    manifest_.files.push_back({name, sha256_file(p), std::filesystem::file_size(p)});
  }

  ExperimentConfig cfg_;
  std::filesystem::path dir_;
  RunManifest manifest_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

GridPtr grid_of(const ExperimentConfig& cfg) {
  return make_grid(cfg.grid.M, cfg.grid.n_x, cfg.grid.n_y, cfg.model.k);
}

HopfOptions hopf_options(const ExperimentConfig& cfg) {
  HopfOptions o;
  o.eta = cfg.numerics.eta;
  o.mu_tol = cfg.numerics.hopf_tol;
  o.eigs.tol = cfg.numerics.eig_tol;
  return o;
}

std::vector<double> linspace(double a, double b, double step) {
  std::vector<double> out;
  const long n = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
  for (long i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

std::string hopf_row(const HopfData& h, const CrossingCheck& cc) {
  return std::to_string(h.ell) + "," + fmt(h.c_star) + "," + fmt(h.omega_star) + "," + fmt(h.mu_prime) +
         "," + fmt(h.lambda_prime.real()) + "," + fmt(h.lambda_prime.imag()) + "," +
         fmt(cc.lambda_prime_formula.real()) + "," + fmt(cc.lambda_prime_formula.imag()) + "," +
         fmt(cc.relative_gap) + "," + (h.transversal ? "1" : "0") + "," + fmt(h.weight.tilt) + "\n";
}

const char* kHopfHeader =
    "ell,c_star,omega,mu_prime,lambda_prime_re,lambda_prime_im,formula_re,formula_im,"
    "relative_gap,transversal,tilt\n";

void speeds(Run& run) {
  const double k = run.cfg().model.k;
  std::string csv = "ell,c_star,lambda_re,lambda_im,nu_re,nu_im\n";
  run.stage("spreading speeds", [&] {
    for (int ell : {0, 1}) {
      const auto s = dispersion::spreading_speed(ell, k, +1);
      csv += std::to_string(ell) + "," + fmt(s.c_star) + "," + fmt(s.root.lambda.real()) + "," +
             fmt(s.root.lambda.imag()) + "," + fmt(s.root.nu.real()) + "," + fmt(s.root.nu.imag()) + "\n";
    }
  });
  run.write("speeds.csv", csv);
}

void hopf(Run& run) {
  const auto& cfg = run.cfg();
  const auto lin = Linearization::trivial(grid_of(cfg), cfg.model);
  const auto opts = hopf_options(cfg);
  std::string csv = kHopfHeader;
  const auto h1 = run.stage("hopf ell=1", [&] {
    return hopf_locate(1, {cfg.scenario.bracket_low, cfg.scenario.bracket_high}, lin, opts);
  });
  csv += hopf_row(h1, crossing_speed_check(h1));
  const auto h0 = run.stage("hopf ell=0", [&] {
    return hopf_locate(0, {cfg.scenario.bracket0_low, cfg.scenario.bracket0_high}, lin, opts);
  });
  csv += hopf_row(h0, crossing_speed_check(h0));
  run.write("hopf.csv", csv);

  std::string prof = "x,p_re,p_im,psi_re,psi_im\n";
  for (int i = 0; i < lin.grid->n_x; ++i)
    prof += fmt(lin.grid->x_nodes[i]) + "," + fmt(h1.p.values[i].real()) + "," + fmt(h1.p.values[i].imag()) +
            "," + fmt(h1.psi_plus.values[i].real()) + "," + fmt(h1.psi_plus.values[i].imag()) + "\n";
  run.write("hopf_profiles.csv", prof);
  if (!h1.diagnostic.empty()) run.write("hopf_diagnostic.txt", h1.diagnostic + "\n");
}

void fig3(Run& run) {
  const auto& cfg = run.cfg();
  const double c = cfg.scenario.c.value_or(1.35);
  const auto lin = Linearization::trivial(grid_of(cfg), cfg.model);
  std::vector<int> ells;
  for (int l = 0; l <= cfg.scenario.ell_max; ++l) ells.push_back(l);
  EigsOptions eo;
  eo.tol = cfg.numerics.eig_tol;
  const auto set = run.stage("eigenvalues", [&] {
    return aggregate_spectrum(ells, c, cfg.numerics.eta, cfg.scenario.spectrum_count, lin, eo);
  });
  std::string csv = "ell,re,im,residual\n";
  PlotData pd;
  pd.title = "Weighted spectrum at c = " + fmt(c);
  pd.x_label = "Re lambda";
  pd.y_label = "Im lambda";
  PlotSeries eig{"eigenvalues", {}, {}};
  for (const auto& p : set.pairs) {
    csv += std::to_string(p.ell) + "," + fmt(p.lambda.real()) + "," + fmt(p.lambda.imag()) + "," +
           fmt(p.residual) + "\n";
    eig.x.push_back(p.lambda.real());
    eig.y.push_back(p.lambda.imag());
  }
  run.write("spectrum.csv", csv);
  pd.series.push_back(eig);

  // Weighted essential curves of the far field and absolute curves of the plateau.
  std::string curves = "kind,ell,param,re,im\n";
  run.stage("curves", [&] {
    std::vector<double> ms, gs;
    for (int i = -200; i <= 200; ++i) ms.push_back(i * 0.02);
    for (int i = -100; i <= 100; ++i) gs.push_back(i * 0.02);
    for (int ell : ells) {
      const auto ess = dispersion::weighted_essential_curve({cfg.model.k, ell, c, -1}, cfg.numerics.eta, ms);
      PlotSeries se{"essential l=" + std::to_string(ell), {}, {}};
      for (const auto& s : ess.samples) {
        curves += "essential," + std::to_string(ell) + "," + fmt(s.param) + "," + fmt(s.lambda.real()) + "," +
                  fmt(s.lambda.imag()) + "\n";
        se.x.push_back(s.lambda.real());
        se.y.push_back(s.lambda.imag());
      }
      pd.series.push_back(se);
      try {
        const auto abs = dispersion::absolute_curve({cfg.model.k, ell, c, +1}, gs);
        PlotSeries sa{"absolute l=" + std::to_string(ell), {}, {}};
        for (const auto& s : abs.samples) {
          curves += "absolute," + std::to_string(ell) + "," + fmt(s.param) + "," + fmt(s.lambda.real()) + "," +
                    fmt(s.lambda.imag()) + "\n";
          sa.x.push_back(s.lambda.real());
          sa.y.push_back(s.lambda.imag());
        }
        pd.series.push_back(sa);
      } catch (const NumericalError&) {
      }
    }
  });
  run.write("spectrum_curves.csv", curves);
  run.plot(pd, PlotKind::scatter, "spectrum_plot.svg");
}

void fig4(Run& run) {
  const auto& cfg = run.cfg();
  const auto lin = Linearization::trivial(grid_of(cfg), cfg.model);
  const auto cs = linspace(cfg.scenario.c_min.value_or(1.2), cfg.scenario.c_max.value_or(1.7),
                           std::abs(cfg.scenario.dc.value_or(0.02)));
  EigsOptions eo;
  eo.tol = cfg.numerics.eig_tol;
  std::string csv = "ell,branch,c,re,im,overlap,ambiguous\n";
  PlotData pd;
  pd.title = "Leading eigenvalues versus quench speed";
  pd.x_label = "c";
  pd.y_label = "Re lambda";
  for (int ell : {0, 1}) {
    const auto br = run.stage("branches ell=" + std::to_string(ell), [&] {
      return branch_track(ell, cs, cfg.scenario.branches, cfg.numerics.eta, lin, eo);
    });
    for (std::size_t b = 0; b < br.size(); ++b) {
      PlotSeries s{"l=" + std::to_string(ell) + " #" + std::to_string(b), {}, {}};
      for (const auto& p : br[b].points) {
        csv += std::to_string(ell) + "," + std::to_string(b) + "," + fmt(p.c) + "," + fmt(p.lambda.real()) + "," +
               fmt(p.lambda.imag()) + "," + fmt(p.overlap) + "," + (p.ambiguous ? "1" : "0") + "\n";
        s.x.push_back(p.c);
        s.y.push_back(p.lambda.real());
      }
      pd.series.push_back(s);
    }
  }
  run.write("branches.csv", csv);
  run.plot(pd, PlotKind::curves, "branches_plot.svg");

  std::string bp = "ell,c,re,im,neutral_c\n";
  PlotData pb;
  pb.title = "Absolute-spectrum branch points";
  pb.x_label = "c";
  pb.y_label = "Re lambda_bp";
  run.stage("branch points", [&] {
    for (int ell : {0, 1}) {
      double neutral = std::nan("");
      dispersion::BranchCurve curve;
      try {
        const auto t = dispersion::branch_point_track(ell, cfg.model.k, cs, +1);
        neutral = t.neutral_c;
        curve = t.curve;
      } catch (const NumericalError&) {
        for (double c : cs)
          if (auto r = dispersion::leading_branch_point({cfg.model.k, ell, c, +1}))
            curve.samples.push_back({c, r->lambda, r->nu, true});
      }
      PlotSeries s{"l=" + std::to_string(ell), {}, {}};
      for (const auto& p : curve.samples) {
        bp += std::to_string(ell) + "," + fmt(p.param) + "," + fmt(p.lambda.real()) + "," + fmt(p.lambda.imag()) +
              "," + fmt(neutral) + "\n";
        s.x.push_back(p.param);
        s.y.push_back(p.lambda.real());
      }
      pb.series.push_back(s);
    }
  });
  run.write("branch_points.csv", bp);
  run.plot(pb, PlotKind::curves, "branch_points_plot.svg");
}

void fig6(Run& run) {
  const auto& cfg = run.cfg();
  const double c = cfg.scenario.c.value_or(1.2);
  const auto lin = Linearization::trivial(grid_of(cfg), cfg.model);
  std::vector<double> ks;
  const int n = cfg.scenario.k_count;
  for (int i = 0; i < n; ++i)
    ks.push_back(n == 1 ? cfg.scenario.k_min
                        : cfg.scenario.k_min + (cfg.scenario.k_max - cfg.scenario.k_min) * i / (n - 1));
  EigsOptions eo;
  eo.tol = cfg.numerics.eig_tol;
  const auto pts = run.stage("k scan", [&] { return k_scan(ks, c, cfg.numerics.eta, lin, 1, eo); });
  std::string csv = "k,re,im\n";
  PlotData pd;
  pd.title = "Leading transverse growth rate at c = " + fmt(c);
  pd.x_label = "k";
  pd.y_label = "Re lambda";
  PlotSeries s{"l=1", {}, {}};
  for (const auto& p : pts) {
    csv += fmt(p.k) + "," + fmt(p.lambda.real()) + "," + fmt(p.lambda.imag()) + "\n";
    s.x.push_back(p.k);
    s.y.push_back(p.lambda.real());
  }
  pd.series.push_back(s);
  run.write("kscan.csv", csv);
  run.plot(pd, PlotKind::curves, "kscan_plot.svg");
}

struct Reduction {
  HopfData hopf;
  LSReport report;
  PhiSet phis;
};

Reduction reduce(Run& run, const Linearization& lin) {
  const auto& cfg = run.cfg();
  Reduction r;
  r.hopf = run.stage("hopf ell=1", [&] {
    return hopf_locate(1, {cfg.scenario.bracket_low, cfg.scenario.bracket_high}, lin, hopf_options(cfg));
  });
  run.stage("quadratic corrections", [&] {
    ReductionInput in{&r.hopf, &lin, std::nullopt, Exec::parallel};
    r.phis = solve_phi_set(in);
  });
  run.stage("cubic coefficients", [&] {
    r.report = make_report(theta_coeffs(r.hopf, r.phis, lin), r.hopf);
  });
  return r;
}

void ls_report(Run& run) {
  const auto& cfg = run.cfg();
  const auto lin = Linearization::trivial(grid_of(cfg), cfg.model);
  const auto red = reduce(run, lin);
  run.write("ls_report.txt", red.report.serialize());
  std::string phi = "mode_tau,mode_y,residual,rhs_mean,mean_defect,rcond\n";
  for (const auto& i : red.phis.info)
    phi += std::to_string(i.mode.ell_tau) + "," + std::to_string(i.mode.ell_y) + "," + fmt(i.residual) + "," +
           fmt(i.rhs_mean) + "," + fmt(i.mean_defect) + "," + fmt(i.rcond) + "\n";
  run.write("phi_solves.csv", phi);
  std::vector<double> as;
  for (int i = 0; i <= 40; ++i) as.push_back(0.005 * i);
  std::string csv = "a,c_oblique,c_checkerboard\n";
  PlotData pd;
  pd.title = "Predicted branches";
  pd.x_label = "c";
  pd.y_label = "a";
  PlotSeries so{"rotating", {}, {}}, sc{"standing", {}, {}};
  for (const auto& b : predict_branches(red.report, as)) {
    csv += fmt(b.a) + "," + fmt(b.c_os) + "," + fmt(b.c_cb) + "\n";
    so.x.push_back(b.c_os);
    so.y.push_back(b.a);
    sc.x.push_back(b.c_cb);
    sc.y.push_back(b.a);
  }
  pd.series = {so, sc};
  run.write("predicted_branches.csv", csv);
  run.plot(pd, PlotKind::curves, "predicted_branches_plot.svg");
}

SimOptions sim_options(const ExperimentConfig& cfg, SeedKind seed) {
  SimOptions so;
  so.dt = cfg.numerics.dt;
  so.stabilizer = cfg.numerics.stabilizer;
  so.symmetry = seed == SeedKind::checkerboard ? SymmetryMode::reflection : SymmetryMode::none;
  return so;
}

RelaxOptions relax_options(const ExperimentConfig& cfg) {
  RelaxOptions ro;
  ro.tol = cfg.numerics.relax_tol;
  ro.t_max = cfg.numerics.t_max;
  ro.window = cfg.numerics.window;
  ro.trivial_threshold = cfg.numerics.trivial_threshold;
  return ro;
}

PlotData field_heatmap(const Field& u, const std::string& title) {
  const auto& g = *u.grid;
  PlotData pd;
  pd.title = title;
  pd.x_label = "x";
  pd.y_label = "y";
  pd.rows = g.n_y;
  pd.cols = g.n_x;
  pd.grid.resize(static_cast<std::size_t>(g.n_x) * g.n_y);
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_y; ++j) pd.grid[static_cast<std::size_t>(j) * g.n_x + i] = u.at(i, j);
  pd.x_min = -g.half_width_M;
  pd.x_max = g.half_width_M;
  pd.y_min = 0.0;
  pd.y_max = 2.0 * std::numbers::pi;
  return pd;
}

void fig1(Run& run) {
  const auto& cfg = run.cfg();
  const double c = cfg.scenario.c.value_or(1.0);
  const auto grid = grid_of(cfg);
  auto model = cfg.model;
  model.c = c;
  const auto lin = Linearization::trivial(grid, model);
  const auto h = run.stage("hopf ell=1", [&] {
    return hopf_locate(1, {cfg.scenario.bracket_low, cfg.scenario.bracket_high}, lin, hopf_options(cfg));
  });
  std::string summary = "seed,class,amplitude,period,converged\n";
  for (auto kind : {SeedKind::oblique_plus, SeedKind::checkerboard}) {
    const auto name = to_string(kind);
    Simulator sim(grid, model, lin.front, sim_options(cfg, kind));
    auto state = sim.make_state(seed_field(kind, cfg.scenario.seed_amplitude, h, lin.front, grid,
                                           cfg.scenario.rng_seed));
    const auto r = run.stage("relax " + name, [&] { return relax(sim, state, relax_options(cfg)); });
    const auto cls = r.decaying ? PatternClass::trivial : classify_pattern(r.diag);
    summary += name + "," + to_string(cls) + "," + fmt(r.amplitude) + "," + fmt(r.period_estimate) + "," +
               (r.converged ? "1" : "0") + "\n";
    const std::string stem = kind == SeedKind::checkerboard ? "checkerboard" : "oblique";
    run.plot(field_heatmap(r.state.field, name + " seed at c = " + fmt(c)), PlotKind::heatmap,
             "field_" + stem + ".svg");
  }
  run.write("patterns.csv", summary);
}

void fig5(Run& run) {
  const auto& cfg = run.cfg();
  const auto grid = grid_of(cfg);
  const double c0 = cfg.scenario.c_min.value_or(1.0), c1 = cfg.scenario.c_max.value_or(1.45);
  const double dc = cfg.scenario.dc.value_or(c1 >= c0 ? 0.01 : -0.01);
  auto model = cfg.model;
  model.c = c0;
  const auto lin = Linearization::trivial(grid, model);
  const auto red = reduce(run, lin);
  const auto kind = parse_seed_kind(cfg.scenario.seed);
  Simulator sim(grid, model, lin.front, sim_options(cfg, kind));
  auto state = sim.make_state(
      seed_field(kind, cfg.scenario.seed_amplitude, red.hopf, lin.front, grid, cfg.scenario.rng_seed));
  const auto br = run.stage("continuation", [&] {
    return adiabatic_continuation(sim, state, c0, c1, dc, relax_options(cfg));
  });
  run.write("branch.csv", branch_csv(br));
  std::ostringstream status;
  status << "stop = " << to_string(br.stop) << "\nc_star = " << fmt(red.hopf.c_star)
         << "\nbif_type = " << to_string(red.report.bif_type) << "\n";
  run.write("continuation_status.txt", status.str());

  PlotData pd;
  pd.title = "Bifurcation diagram, gamma = " + fmt(cfg.model.gamma);
  pd.x_label = "c";
  pd.y_label = "||u - u*||";
  PlotSeries dns{"simulation", {}, {}};
  for (const auto& s : br.samples) {
    dns.x.push_back(s.c);
    dns.y.push_back(s.amplitude);
  }
  pd.series.push_back(dns);
  // Leading-order prediction in the same norm: 2a for standing, sqrt(2) a
  // for rotating waves with a unit-norm kernel profile.
  const bool standing = kind == SeedKind::checkerboard;
  const double coeff = standing ? red.report.c_cb_coeff : red.report.c_os_coeff;
  const double scale = standing ? 2.0 : std::sqrt(2.0);
  PlotSeries pred{"normal form", {}, {}};
  for (int i = 0; i <= 50; ++i) {
    const double a = 0.004 * i;
    pred.x.push_back(red.hopf.c_star + coeff * a * a);
    pred.y.push_back(scale * a);
  }
  pd.series.push_back(pred);
  run.plot(pd, PlotKind::curves, "diagram.svg");
}

}  // namespace

RunManifest run_scenario(const std::string& name, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir) {
  static const std::vector<std::pair<std::string, std::function<void(Run&)>>> table = {
      {"fig1-patterns", fig1}, {"fig3-spectrum", fig3}, {"fig4-branches", fig4}, {"fig5-diagram", fig5},
      {"fig6-kscan", fig6},    {"speeds", speeds},      {"hopf", hopf},          {"ls-report", ls_report}};
  for (const auto& [key, fn] : table) {
    if (key != name) continue;
    const auto start = Clock::now();
    Run run(name, cfg, out_dir / name);
    try {
      fn(run);
    } catch (const NumericalError& e) {
      throw NumericalError(name + ": " + e.what());
    }
    return run.finish(start);
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace qlab
