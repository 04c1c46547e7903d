#include "qlab/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "qlab/error.hpp"
#include "qlab/spectral.hpp"

namespace qlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

long parse_integer(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw InvalidArgument("expected an integer");
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument("expected an integer, got '" + s + "'");
  }
  if (pos != s.size()) throw InvalidArgument("expected an integer, got '" + s + "'");
  return v;
}

struct Key {
  std::string section, name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

template <class Ref, class Ok>
Key real(std::string section, std::string name, Ref ref, Ok ok, std::string range) {
  Key k{section, name, {}, {}};
  k.set = [ref, ok, range, name](ExperimentConfig& c, const std::string& raw) {
    const double v = parse_real(raw);
    require(ok(v), name + " must be " + range);
    ref(c) = v;
  };
  k.get = [ref](const ExperimentConfig& c) {
    return format_real(ref(c));
  };
  return k;
}

template <class Ref, class Ok>
Key integer(std::string section, std::string name, Ref ref, Ok ok, std::string range) {
  Key k{section, name, {}, {}};
  k.set = [ref, ok, range, name](ExperimentConfig& c, const std::string& raw) {
    const long v = parse_integer(raw);
    require(ok(v), name + " must be " + range);
    ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(v);
  };
  k.get = [ref](const ExperimentConfig& c) {
    return std::to_string(ref(c));
  };
  return k;
}

template <class Ref>
Key text(std::string section, std::string name, Ref ref, std::vector<std::string> choices = {}) {
  Key k{section, name, {}, {}};
  k.set = [ref, name, choices](ExperimentConfig& c, const std::string& raw) {
    require(!raw.empty(), name + " must not be empty");
    if (!choices.empty()) {
      bool known = false;
      for (const auto& ch : choices) known = known || ch == raw;
      require(known, name + " '" + raw + "' is not one of the accepted values");
    }
    ref(c) = raw;
  };
  k.get = [ref](const ExperimentConfig& c) { return ref(c); };
  return k;
}

// A real that may be left unset with the word "auto".
template <class Ref, class Ok>
Key optional_real(std::string section, std::string name, Ref ref, Ok ok, std::string range) {
  Key k{section, name, {}, {}};
  k.set = [ref, ok, range, name](ExperimentConfig& c, const std::string& raw) {
    if (raw == "auto") {
      ref(c).reset();
      return;
    }
    const double v = parse_real(raw);
    require(ok(v), name + " must be " + range);
    ref(c) = v;
  };
  k.get = [ref](const ExperimentConfig& c) {
    const auto& v = ref(c);
    return v ? format_real(*v) : std::string("auto");
  };
  return k;
}

const std::vector<Key>& registry() {
  auto pos = [](double v) { return v > 0.0; };
  auto nonneg = [](double v) { return v >= 0.0; };
  auto finite = [](double v) { return std::isfinite(v); };
  auto pow2 = [](long v) { return v >= 8 && is_power_of_two(v); };
  static const std::vector<Key> keys = {
      real("model", "gamma", [](auto& c) -> auto& { return c.model.gamma; }, finite,
           "finite"),
      real("model", "delta_steep", [](auto& c) -> auto& { return c.model.delta_steep; },
           pos, "positive"),
      real("model", "K_halfwidth", [](auto& c) -> auto& { return c.model.K_halfwidth; },
           pos, "positive"),
      real("model", "k", [](auto& c) -> auto& { return c.model.k; }, pos, "positive"),
      real("model", "chi_amplitude",
           [](auto& c) -> auto& { return c.model.chi.amplitude; }, finite, "finite"),
      real("model", "chi_center", [](auto& c) -> auto& { return c.model.chi.center; },
           finite, "finite"),
      real("model", "chi_width", [](auto& c) -> auto& { return c.model.chi.width; },
           pos, "positive"),
      real("grid", "M", [](auto& c) -> auto& { return c.grid.M; }, pos, "positive"),
      integer("grid", "n_x", [](auto& c) -> auto& { return c.grid.n_x; }, pow2,
              "a power of two >= 8"),
      integer("grid", "n_y", [](auto& c) -> auto& { return c.grid.n_y; }, pow2,
              "a power of two >= 8"),
      real("numerics", "dt", [](auto& c) -> auto& { return c.numerics.dt; }, pos,
           "positive"),
      real("numerics", "eta", [](auto& c) -> auto& { return c.numerics.eta; }, nonneg,
           "non-negative"),
      real("numerics", "relax_tol", [](auto& c) -> auto& { return c.numerics.relax_tol; },
           pos, "positive"),
      real("numerics", "window", [](auto& c) -> auto& { return c.numerics.window; }, pos,
           "positive"),
      real("numerics", "t_max", [](auto& c) -> auto& { return c.numerics.t_max; }, pos,
           "positive"),
      real("numerics", "trivial_threshold",
           [](auto& c) -> auto& { return c.numerics.trivial_threshold; }, pos,
           "positive"),
      real("numerics", "hopf_tol", [](auto& c) -> auto& { return c.numerics.hopf_tol; },
           pos, "positive"),
      real("numerics", "eig_tol", [](auto& c) -> auto& { return c.numerics.eig_tol; },
           pos, "positive"),
      optional_real("numerics", "stabilizer",
                    [](auto& c) -> auto& { return c.numerics.stabilizer; },
                    nonneg, "non-negative or auto"),
      optional_real("scenario", "c",
                    [](auto& c) -> auto& { return c.scenario.c; }, pos,
                    "positive or auto"),
      optional_real("scenario", "c_min", [](auto& c) -> auto& { return c.scenario.c_min; }, pos,
                    "positive or auto"),
      optional_real("scenario", "c_max", [](auto& c) -> auto& { return c.scenario.c_max; }, pos,
                    "positive or auto"),
      optional_real("scenario", "dc", [](auto& c) -> auto& { return c.scenario.dc; },
                    [](double v) { return v != 0.0 && std::isfinite(v); }, "non-zero or auto"),
      real("scenario", "bracket_low",
           [](auto& c) -> auto& { return c.scenario.bracket_low; }, pos, "positive"),
      real("scenario", "bracket_high",
           [](auto& c) -> auto& { return c.scenario.bracket_high; }, pos, "positive"),
      real("scenario", "bracket0_low",
           [](auto& c) -> auto& { return c.scenario.bracket0_low; }, pos, "positive"),
      real("scenario", "bracket0_high",
           [](auto& c) -> auto& { return c.scenario.bracket0_high; }, pos, "positive"),
      text("scenario", "seed", [](auto& c) -> auto& { return c.scenario.seed; },
           {"oblique+", "oblique-", "checkerboard", "stripes", "random"}),
      real("scenario", "seed_amplitude",
           [](auto& c) -> auto& { return c.scenario.seed_amplitude; }, nonneg,
           "non-negative"),
      integer("scenario", "rng_seed",
              [](auto& c) -> auto& { return c.scenario.rng_seed; },
              [](long v) { return v >= 0; }, "non-negative"),
      real("scenario", "k_min", [](auto& c) -> auto& { return c.scenario.k_min; }, pos,
           "positive"),
      real("scenario", "k_max", [](auto& c) -> auto& { return c.scenario.k_max; }, pos,
           "positive"),
      integer("scenario", "k_count", [](auto& c) -> auto& { return c.scenario.k_count; },
              [](long v) { return v >= 1 && v <= 10000; }, "in [1, 10000]"),
      integer("scenario", "spectrum_count",
              [](auto& c) -> auto& { return c.scenario.spectrum_count; },
              [](long v) { return v >= 1; }, "positive"),
      integer("scenario", "ell_max", [](auto& c) -> auto& { return c.scenario.ell_max; },
              [](long v) { return v >= 0 && v <= 64; }, "in [0, 64]"),
      integer("scenario", "branches", [](auto& c) -> auto& { return c.scenario.branches; },
              [](long v) { return v >= 1 && v <= 100; }, "in [1, 100]"),
      text("scenario", "output_dir",
           [](auto& c) -> auto& { return c.scenario.output_dir; }),
  };
  return keys;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : registry())
    if (k.section == section && k.name == name) return &k;
  return nullptr;
}

void cross_check(const ExperimentConfig& c) {
  if (!(c.grid.M > c.model.K_halfwidth))
    throw ConfigError("grid.M must exceed model.K_halfwidth so the quench fits in the box");
  if (!(c.scenario.bracket_low < c.scenario.bracket_high))
    throw ConfigError("scenario.bracket_low must be below scenario.bracket_high");
  if (!(c.scenario.bracket0_low < c.scenario.bracket0_high))
    throw ConfigError("scenario.bracket0_low must be below scenario.bracket0_high");
  if (!(c.scenario.k_min <= c.scenario.k_max))
    throw ConfigError("scenario.k_min must not exceed scenario.k_max");
}

}  // namespace

double parse_real(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) throw InvalidArgument("expected a number");
  double mult = 1.0;
  auto strip_pi = [&](const std::string& suffix) {
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s = trim(s.substr(0, s.size() - suffix.size()));
      mult = std::numbers::pi;
      return true;
    }
    return false;
  };
  if (!strip_pi("*pi")) strip_pi("pi");
  if (mult != 1.0 && (s.empty() || s == "-" || s == "+")) s += "1";
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument("expected a number, got '" + trim(raw) + "'");
  }
  if (pos != s.size() || !std::isfinite(v))
    throw InvalidArgument("expected a number, got '" + trim(raw) + "'");
  return v * mult;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Comments: whole-line, or inline after whitespace.
    for (const char* mark : {" #", "\t#", " ;", "\t;"}) {
      const auto p = line.find(mark);
      if (p != std::string::npos) line.erase(p);
    }
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", lineno);
      section = trim(s.substr(1, s.size() - 2));
      if (section != "model" && section != "grid" && section != "numerics" && section != "scenario")
        throw ConfigError("unknown section [" + section + "]", lineno);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", lineno);
    if (section.empty()) throw ConfigError("key outside of any section", lineno);
    const std::string name = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    const Key* key = find_key(section, name);
    if (!key) throw ConfigError("unknown key '" + name + "' in [" + section + "]", lineno);
    if (!seen.insert(section + "." + name).second)
      throw ConfigError("duplicate key '" + section + "." + name + "'", lineno);
    try {
      key->set(cfg, value);
    } catch (const InvalidArgument& e) {
      throw ConfigError(section + "." + name + ": " + e.what(), lineno);
    }
  }
  cross_check(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' lacks '='");
  const std::string lhs = trim(assignment.substr(0, eq)), value = trim(assignment.substr(eq + 1));
  const Key* key = nullptr;
  const auto dot = lhs.find('.');
  if (dot != std::string::npos) {
    key = find_key(lhs.substr(0, dot), lhs.substr(dot + 1));
  } else {
    for (const auto& k : registry())
      if (k.name == lhs) {
        if (key) throw ConfigError("override key '" + lhs + "' is ambiguous; qualify it");
        key = &k;
      }
  }
  if (!key) throw ConfigError("unknown override key '" + lhs + "'");
  try {
    key->set(cfg, value);
  } catch (const InvalidArgument& e) {
    throw ConfigError("override " + key->section + "." + key->name + ": " + e.what());
  }
  cross_check(cfg);
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : registry()) {
    if (k.section != section) {
      if (!section.empty()) os << '\n';
      section = k.section;
      os << '[' << section << "]\n";
    }
    os << k.name << " = " << k.get(cfg) << '\n';
  }
  return os.str();
}

}  // namespace qlab
