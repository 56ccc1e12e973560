#pragma once

// Plain-text run configuration: one `key = value` per line, `#` starts a comment.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "leibenson/errors.hpp"
#include "leibenson/geometry.hpp"
#include "leibenson/params.hpp"
#include "leibenson/solver.hpp"

namespace leibenson {

struct RunConfig {
  std::string family = "euclidean";
  int n = 3;
  double p = 2.0;
  double q = 0.5;
  double zeta = 2.0;
  std::optional<double> sigma;
  std::optional<double> l;
  double c = 1.0;
  std::optional<double> alpha;
  double R0 = 1.0;
  std::string regime = "exact-rn";
  std::string density = "auto";  ///< auto | power | cored | constant | zero
  double core = 1.0;
  std::optional<double> theta;   ///< defaults to theta_max
  double R_probe = 100.0;
  double R_max = 20.0;
  int cells = 2000;
  double grading = 2.0;
  double cfl = 0.4;
  double t_max = 1.5;
  double ext_tol = 1e-10;
  double floor_eps = 1e-12;
  std::string outer_bc = "dirichlet_zero";
  std::string scheme = "implicit";
  double max_rel_change = 0.05;
  std::string initial = "barenblatt";  ///< barenblatt | bump | zero
  double C = 1.0;
  double T = 1.0;
  std::optional<double> probe_C;
  double record_every = 0.005;
  std::string out_path = "trace.csv";

  bool operator==(const RunConfig&) const = default;
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || std::isnan(out)) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

inline int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

inline std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class T>
Field make_field(const std::string& key, T RunConfig::*member) {
  Field f;
  if constexpr (std::is_same_v<T, double>) {
    f.set = [key, member](RunConfig& c, const std::string& v) { c.*member = to_double(key, v); };
    f.get = [member](const RunConfig& c) { return std::optional<std::string>(fmt(c.*member)); };
  } else if constexpr (std::is_same_v<T, int>) {
    f.set = [key, member](RunConfig& c, const std::string& v) { c.*member = to_int(key, v); };
    f.get = [member](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.*member)); };
  } else if constexpr (std::is_same_v<T, std::optional<double>>) {
    f.set = [key, member](RunConfig& c, const std::string& v) {
      if (v == "none") {
        c.*member = std::nullopt;
      } else {
        c.*member = to_double(key, v);
      }
    };
    f.get = [member](const RunConfig& c) -> std::optional<std::string> {
      if (!(c.*member)) return std::nullopt;
      return fmt(*(c.*member));
    };
  } else {
    f.set = [member](RunConfig& c, const std::string& v) { c.*member = v; };
    f.get = [member](const RunConfig& c) { return std::optional<std::string>(c.*member); };
  }
  return f;
}

/// Keys in dump order.
inline const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add = [&t](const std::string& key, auto member) { t.emplace_back(key, make_field(key, member)); };
    add("family", &RunConfig::family);
    add("n", &RunConfig::n);
    add("p", &RunConfig::p);
    add("q", &RunConfig::q);
    add("zeta", &RunConfig::zeta);
    add("sigma", &RunConfig::sigma);
    add("l", &RunConfig::l);
    add("c", &RunConfig::c);
    add("alpha", &RunConfig::alpha);
    add("R0", &RunConfig::R0);
    add("regime", &RunConfig::regime);
    add("density", &RunConfig::density);
    add("core", &RunConfig::core);
    add("theta", &RunConfig::theta);
    add("R_probe", &RunConfig::R_probe);
    add("R_max", &RunConfig::R_max);
    add("cells", &RunConfig::cells);
    add("grading", &RunConfig::grading);
    add("cfl", &RunConfig::cfl);
    add("t_max", &RunConfig::t_max);
    add("ext_tol", &RunConfig::ext_tol);
    add("floor_eps", &RunConfig::floor_eps);
    add("outer_bc", &RunConfig::outer_bc);
    add("scheme", &RunConfig::scheme);
    add("max_rel_change", &RunConfig::max_rel_change);
    add("initial", &RunConfig::initial);
    add("C", &RunConfig::C);
    add("T", &RunConfig::T);
    add("probe_C", &RunConfig::probe_C);
    add("record_every", &RunConfig::record_every);
    add("out_path", &RunConfig::out_path);
    return t;
  }();
  return table;
}

}  // namespace config_detail

inline void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : config_detail::fields()) {
    if (name == key) {
      field.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

/// Applies one `key = value` assignment.
inline void apply_assignment(RunConfig& cfg, std::string_view line, const std::string& where = "") {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(where + "expected 'key = value', got '" + std::string(line) + "'");
  }
  const std::string key = config_detail::trim(line.substr(0, eq));
  const std::string value = config_detail::trim(line.substr(eq + 1));
  if (key.empty()) throw ConfigError(where + "empty key");
  if (value.empty()) throw ConfigError(where + "key '" + key + "' has no value");
  try {
    set_key(cfg, key, value);
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  }
}

inline RunConfig parse_config(std::istream& in, RunConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (config_detail::trim(line).empty()) continue;
    apply_assignment(cfg, line, "line " + std::to_string(lineno) + ": ");
  }
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text, RunConfig cfg = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(cfg));
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(cfg));
}

/// Every key with a value, at 17 significant digits; unset optional keys are omitted.
inline std::string dump_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [name, field] : config_detail::fields()) {
    if (auto v = field.get(cfg)) os << name << " = " << *v << "\n";
  }
  return os.str();
}

/// Checks the settings every command relies on.
inline void validate(const RunConfig& c) {
  Exponents e;
  e.n = c.n;
  e.p = c.p;
  e.q = c.q;
  e.zeta = c.zeta;
  e.sigma = c.sigma;
  try {
    e.validate();
  } catch (const DomainError& err) {
    throw ConfigError(err.what());
  }
  parse_family(c.family);
  parse_regime(c.regime);
  parse_outer_bc(c.outer_bc);
  parse_scheme(c.scheme);
  auto positive = [](double x, const char* key) {
    if (!(x > 0.0)) throw ConfigError(std::string(key) + " must be > 0");
  };
  if (c.density != "auto" && c.density != "power" && c.density != "cored" && c.density != "constant" &&
      c.density != "zero") {
    throw ConfigError("density must be one of auto, power, cored, constant, zero");
  }
  if (c.initial != "barenblatt" && c.initial != "bump" && c.initial != "zero") {
    throw ConfigError("initial must be one of barenblatt, bump, zero");
  }
  if (c.l && !(*c.l >= 0.0)) throw ConfigError("l must be >= 0");
  if (c.theta && !(*c.theta > 1.0)) throw ConfigError("theta must be > 1 (or inf)");
  if (c.probe_C) positive(*c.probe_C, "probe_C");
  positive(c.c, "c");
  positive(c.R0, "R0");
  positive(c.core, "core");
  positive(c.R_probe, "R_probe");
  positive(c.R_max, "R_max");
  positive(c.C, "C");
  positive(c.T, "T");
  positive(c.ext_tol, "ext_tol");
  positive(c.floor_eps, "floor_eps");
  positive(c.max_rel_change, "max_rel_change");
  if (c.cells < 3) throw ConfigError("cells must be >= 3");
  if (!(c.grading >= 1.0)) throw ConfigError("grading must be >= 1");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (!(c.t_max >= 0.0)) throw ConfigError("t_max must be >= 0");
  if (!(c.record_every >= 0.0)) throw ConfigError("record_every must be >= 0");
  if (c.out_path.empty()) throw ConfigError("out_path must not be empty");
}

inline Exponents exponents_of(const RunConfig& c) {
  Exponents e;
  e.n = c.n;
  e.p = c.p;
  e.q = c.q;
  e.zeta = c.zeta;
  e.sigma = c.sigma;
  return e;
}

/// Model with the configured density. `auto` picks rho = r^-l on R^n, rho = 1 on
/// the conformal model and the cored power (bounded at the origin) otherwise.
inline WeightedModel model_of(const RunConfig& c) {
  WeightedModel m = WeightedModel::euclidean(c.n, c.p);
  const Family fam = parse_family(c.family);
  auto need_alpha = [&]() {
    if (!c.alpha) throw ConfigError("family '" + c.family + "' needs alpha");
    return *c.alpha;
  };
  switch (fam) {
    case Family::euclidean: break;
    case Family::conformal:
      if (!c.l) throw ConfigError("conformal family needs l");
      m = build_conformal(c.n, c.p, *c.l, c.c, c.R0);
      break;
    case Family::ch_polynomial: m = build_ch_polynomial(c.n, c.p, need_alpha()); break;
    case Family::ricci_polynomial: m = build_ricci_polynomial(c.n, c.p, need_alpha()); break;
  }
  std::string kind = c.density;
  if (kind == "auto") {
    if (fam == Family::conformal) {
      kind = "constant";
    } else if (fam == Family::euclidean) {
      kind = c.l ? "power" : "constant";
    } else {
      kind = c.l ? "cored" : "constant";
    }
  }
  Density rho = Density::constant(1.0);
  if (kind == "zero") {
    rho = Density::zero();
  } else if (kind == "power" || kind == "cored") {
    if (!c.l) throw ConfigError("density '" + kind + "' needs l");
    rho = kind == "power" ? Density::power(*c.l) : Density::cored_power(*c.l, c.core);
  }
  return m.with_density(rho);
}

}  // namespace leibenson
