#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "qlab/config.hpp"
#include "qlab/error.hpp"
#include "qlab/experiments.hpp"
#include "qlab/plot.hpp"

using namespace qlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("qlab_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("empty config gives the full defaults") {
  const auto c = parse_config_text("");
  CHECK(c.model.delta_steep == 5.0);
  CHECK(c.model.K_halfwidth == doctest::Approx(10.0 * std::numbers::pi));
  CHECK(c.model.k == 0.5);
  CHECK(c.numerics.eta == 0.2);
  CHECK(c.grid.n_x == 1024);
  CHECK_FALSE(c.numerics.stabilizer.has_value());
}

TEST_CASE("values, pi multiples and comments parse") {
  const auto c = parse_config_text(
      "# quench setup\n[model]\ngamma = 2\nK_halfwidth = 20pi ; wider plateau\n"
      "[grid]\nM = 40*pi\nn_x = 2048\n[numerics]\nstabilizer = 12\n[scenario]\nc = 1.2\nseed = oblique+\n");
  CHECK(c.model.gamma == 2.0);
  CHECK(c.model.K_halfwidth == doctest::Approx(20.0 * std::numbers::pi));
  CHECK(c.grid.M == doctest::Approx(40.0 * std::numbers::pi));
  CHECK(c.grid.n_x == 2048);
  CHECK(c.numerics.stabilizer.value() == 12.0);
  CHECK(c.scenario.c.value() == 1.2);
  CHECK(c.scenario.seed == "oblique+");
  CHECK(parse_real("pi") == doctest::Approx(std::numbers::pi));
}

TEST_CASE("override is echoed in the effective config") {
  auto c = parse_config_text("");
  apply_override(c, "model.gamma=-1");
  apply_override(c, "dt=0.01");
  CHECK(c.model.gamma == -1.0);
  CHECK(c.numerics.dt == 0.01);
  const auto echo = echo_config(c);
  CHECK(echo.find("gamma = -1") != std::string::npos);
  // The echo parses back to the same configuration.
  CHECK(echo_config(parse_config_text(echo)) == echo);
}

TEST_CASE("strict parsing rejects bad input with line context") {
  CHECK_THROWS_AS(parse_config_text("[grid]\nn_x = 1000\n"), ConfigError);
  try {
    parse_config_text("[model]\ngamma = 1\ngama = 2\n");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config_text("[model]\ngamma = 1\ngamma = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model]\ngamma = one\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[physics]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("gamma = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model]\nk = -0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[scenario]\nseed = hexagons\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid]\nM = 10\n"), ConfigError);  // box narrower than the plateau
  auto c = parse_config_text("");
  CHECK_THROWS_AS(apply_override(c, "nonsense"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "grid.n_y=12"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/qlab.ini"), ConfigError);
}

TEST_CASE("empty plot data is an error and writes nothing") {
  const auto d = scratch("plot_empty");
  PlotData data;
  CHECK_THROWS_AS(emit_plot(data, PlotKind::curves, d / "x.svg"), InvalidArgument);
  CHECK_THROWS_AS(emit_plot(data, PlotKind::heatmap, d / "h.svg"), InvalidArgument);
  CHECK(fs::is_empty(d));
}

TEST_CASE("plots are deterministic and carry a CSV twin") {
  const auto d = scratch("plot_twin");
  PlotData data;
  data.title = "t";
  data.series.push_back({"s", {0.0, 1.0, 2.0}, {1.0, -1.0, 0.5}});
  const auto paths = emit_plot(data, PlotKind::scatter, d / "a.svg");
  REQUIRE(paths.size() == 2);
  CHECK(fs::exists(d / "a.csv"));
  const auto first = slurp(d / "a.svg");
  emit_plot(data, PlotKind::scatter, d / "a.svg");
  CHECK(slurp(d / "a.svg") == first);

  PlotData heat;
  heat.rows = 2;
  heat.cols = 2;
  heat.grid = {1.0, -1.0, -1.0, 1.0};
  emit_plot(heat, PlotKind::heatmap, d / "h.svg");
  const auto svg = slurp(d / "h.svg");
  CHECK(svg.find("<rect") != std::string::npos);
  CHECK(slurp(d / "h.csv").find("row,col,value") == 0);
}

TEST_CASE("scenario run: manifest digests match and reruns are byte-identical") {
  const auto d = scratch("speeds");
  auto cfg = parse_config_text("");
  const auto m = run_scenario("speeds", cfg, d / "a");
  run_scenario("speeds", cfg, d / "b");
  const auto j = nlohmann::json::parse(slurp(d / "a" / "speeds" / "manifest.json"));
  CHECK(j["scenario"] == "speeds");
  CHECK(j["config_sha256"] == sha256_hex(echo_config(cfg)));
  for (const auto& f : j["files"]) {
    const auto p = d / "a" / "speeds" / f["path"].get<std::string>();
    CHECK(f["sha256"] == sha256_file(p));
    CHECK(f["bytes"].get<std::uintmax_t>() == fs::file_size(p));
  }
  CHECK(slurp(d / "a" / "speeds" / "speeds.csv") == slurp(d / "b" / "speeds" / "speeds.csv"));
  CHECK(m.files.size() == 2);
  CHECK_THROWS_AS(run_scenario("fig2", cfg, d), ConfigError);
}

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
