#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdreg/error.hpp"
#include "rdreg/exo.hpp"
#include "rdreg/modal.hpp"
#include "rdreg/plant_spec.hpp"
#include "rdreg/regulator.hpp"
#include "rdreg/scenario/expression.hpp"
#include "rdreg/synthesis/certificate.hpp"

namespace rdreg {

/// One closed-loop experiment. Text form: `key = value` per line, `#`
/// comments, arrays as `[v1, v2]`, profiles as whitelisted expressions.
struct ScenarioConfig {
  std::string name = "scenario";
  // plant
  double a = 0.0;
  double tau = 0.0;
  std::size_t grid = 100;
  double dt = 1e-3;
  Expression w0{{{ExprTerm::Kind::constant, 0.0, 0.0}}};
  Expression eps_hat0{{{ExprTerm::Kind::constant, 0.0, 0.0}}};
  // exosystem and disturbance coefficients
  double omega = 1.0;
  Vec2 p0{1.0, 0.0};
  std::array<Expression, 2> d1{Expression{{{ExprTerm::Kind::constant, 0.0, 0.0}}},
                               Expression{{{ExprTerm::Kind::constant, 0.0, 0.0}}}};
  Row2 d2{0.0, 0.0};
  Row2 d3{0.0, 0.0};
  Row2 d4{0.0, 0.0};
  // design
  double delta = 1.0;
  int order = 0;  // lower bound on N; the truncation rule can raise it
  double controller_margin = 0.5;
  double controller_spread = 0.3;
  double observer_margin = 1.0;
  double observer_spread = 0.3;
  std::uint64_t lmi_seed = 1;
  int lmi_budget = 20000;
  std::optional<std::vector<double>> K;
  std::optional<std::vector<double>> L;
  // adaptive observer
  double iota = 0.5;
  double kappa0 = 5.0;
  double kappa1 = 10.0;
  // run
  double horizon = 60.0;
  double snapshot_interval = 0.5;
  std::optional<std::array<double, 2>> decay_window;  // default: last half of the horizon
  std::array<double, 2> early_window{0.0, 5.0};

  int truncation() const { return std::max(min_truncation(a, delta), order); }

  PlantSpec plant() const {
    PlantSpec p;
    p.a = a;
    p.tau = tau;
    p.grid_m = grid;
    p.dt = dt;
    p.d1 = [e = d1](double x) { return Row2{e[0](x), e[1](x)}; };
    p.d2 = d2;
    p.d3 = d3;
    p.w0 = [e = w0](double x) { return e(x); };
    return p;
  }

  ExoSpec exo() const { return ExoSpec::harmonic(omega, p0, d4); }

  ReducedModel model() const { return build_reduced(a, delta, tau, truncation()); }

  SynthesisOptions synthesis() const {
    SynthesisOptions o;
    o.controller = {controller_margin, controller_spread};
    o.observer = {observer_margin, observer_spread};
    o.lmi.seed = lmi_seed;
    o.lmi.budget = lmi_budget;
    if (K) o.fixed_K = Matrix::row(*K);
    if (L) o.fixed_L = Matrix::column(*L);
    return o;
  }

  AdaptiveGains adaptive() const { return {iota, kappa0, kappa1}; }

  std::array<double, 2> tail_window() const { return decay_window.value_or(std::array{0.5 * horizon, horizon}); }

  void validate() const {
    auto bad = [](const std::string& m) { throw ConfigError(0, m); };
    if (!(tau >= 0.0)) bad("tau must be >= 0");
    if (grid < 20 || grid % 2) bad("grid must be even and >= 20");
    if (!(dt > 0.0)) bad("dt must be positive");
    if (!(omega > 0.0)) bad("omega must be positive");
    if (!(delta > 0.0)) bad("delta must be positive");
    if (order < 0 || order > 20) bad("order must be in [0, 20]");
    if (!(horizon > 0.0)) bad("horizon must be positive");
    const double steps = horizon / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) bad("horizon must be a multiple of dt");
    const auto [w0b, w1b] = tail_window();
    if (!(0.0 <= w0b && w0b < w1b && w1b <= horizon)) bad("decay_window must lie inside [0, horizon]");
    if (!(0.0 <= early_window[0] && early_window[0] < early_window[1] && early_window[1] <= horizon))
      bad("early_window must lie inside [0, horizon]");
    const auto n = static_cast<std::size_t>(truncation() + 1);
    if (K && K->size() != n) bad("K must have N+1 = " + std::to_string(n) + " entries");
    if (L && L->size() != n) bad("L must have N+1 = " + std::to_string(n) + " entries");
    try {
      adaptive().validate();
    } catch (const ContractError& e) {
      bad(e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw ConfigError(line, "'" + key + "': expected a number, got '" + v + "'");
  return x;
}

inline long long parse_integer(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(line, "'" + key + "': expected an integer");
  return x;
}

/// Splits "[a, b, c]" at top-level commas (brackets and parentheses nest).
inline std::vector<std::string> parse_array(const std::string& v, int line, const std::string& key) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError(line, "'" + key + "': expected an array literal [..]");
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const char c = v[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  for (const auto& s : out)
    if (s.empty()) throw ConfigError(line, "'" + key + "': empty array element");
  return out;
}

inline std::vector<double> parse_numbers(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  for (const auto& s : parse_array(v, line, key)) out.push_back(parse_number(s, line, key));
  return out;
}

inline std::array<double, 2> parse_pair(const std::string& v, int line, const std::string& key) {
  const auto xs = parse_numbers(v, line, key);
  if (xs.size() != 2) throw ConfigError(line, "'" + key + "': expected exactly 2 entries");
  return {xs[0], xs[1]};
}

inline std::string join(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num17(v[i]);
  return s + "]";
}

}  // namespace detail

inline ScenarioConfig parse_config(std::istream& is) {
  using namespace detail;
  ScenarioConfig c;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string val = trim(text.substr(eq + 1));
    if (val.empty()) throw ConfigError(line, "'" + key + "': missing value");
    if (!seen.insert(key).second) throw ConfigError(line, "duplicate key '" + key + "'");

    auto num = [&] { return parse_number(val, line, key); };
    auto pair = [&] { return parse_pair(val, line, key); };
    if (key == "name") c.name = val;
    else if (key == "a") c.a = num();
    else if (key == "tau") c.tau = num();
    else if (key == "grid") {
      const auto g = parse_integer(val, line, key);
      if (g < 20 || g % 2) throw ConfigError(line, "'grid' must be even and >= 20");
      c.grid = static_cast<std::size_t>(g);
    } else if (key == "dt") c.dt = num();
    else if (key == "w0") c.w0 = parse_expression(val, line);
    else if (key == "eps_hat0") c.eps_hat0 = parse_expression(val, line);
    else if (key == "omega") c.omega = num();
    else if (key == "p0") c.p0 = pair();
    else if (key == "d1") {
      const auto parts = parse_array(val, line, key);
      if (parts.size() != 2) throw ConfigError(line, "'d1' must have 2 entries");
      c.d1 = {parse_expression(parts[0], line), parse_expression(parts[1], line)};
    } else if (key == "d2") c.d2 = pair();
    else if (key == "d3") c.d3 = pair();
    else if (key == "d4") c.d4 = pair();
    else if (key == "delta") c.delta = num();
    else if (key == "order") c.order = static_cast<int>(parse_integer(val, line, key));
    else if (key == "controller_margin") c.controller_margin = num();
    else if (key == "controller_spread") c.controller_spread = num();
    else if (key == "observer_margin") c.observer_margin = num();
    else if (key == "observer_spread") c.observer_spread = num();
    else if (key == "lmi_seed") c.lmi_seed = static_cast<std::uint64_t>(parse_integer(val, line, key));
    else if (key == "lmi_budget") c.lmi_budget = static_cast<int>(parse_integer(val, line, key));
    else if (key == "K") c.K = parse_numbers(val, line, key);
    else if (key == "L") c.L = parse_numbers(val, line, key);
    else if (key == "iota") c.iota = num();
    else if (key == "kappa0") c.kappa0 = num();
    else if (key == "kappa1") c.kappa1 = num();
    else if (key == "horizon") c.horizon = num();
    else if (key == "snapshot_interval") c.snapshot_interval = num();
    else if (key == "decay_window") c.decay_window = pair();
    else if (key == "early_window") c.early_window = pair();
    else throw ConfigError(line, "unknown key '" + key + "'");
  }
  if (!seen.count("a")) throw ConfigError(line, "missing required key 'a'");
  if (!seen.count("omega")) throw ConfigError(line, "missing required key 'omega'");
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

/// Every field written explicitly; the result parses back to an equal config.
inline void write_config(std::ostream& os, const ScenarioConfig& c) {
  using detail::join;
  using detail::num17;
  os << "name = " << c.name << '\n';
  os << "a = " << num17(c.a) << '\n';
  os << "tau = " << num17(c.tau) << '\n';
  os << "grid = " << c.grid << '\n';
  os << "dt = " << num17(c.dt) << '\n';
  os << "w0 = " << to_string(c.w0) << '\n';
  os << "eps_hat0 = " << to_string(c.eps_hat0) << '\n';
  os << "omega = " << num17(c.omega) << '\n';
  os << "p0 = " << join({c.p0[0], c.p0[1]}) << '\n';
  os << "d1 = [" << to_string(c.d1[0]) << ", " << to_string(c.d1[1]) << "]\n";
  os << "d2 = " << join({c.d2[0], c.d2[1]}) << '\n';
  os << "d3 = " << join({c.d3[0], c.d3[1]}) << '\n';
  os << "d4 = " << join({c.d4[0], c.d4[1]}) << '\n';
  os << "delta = " << num17(c.delta) << '\n';
  os << "order = " << c.order << '\n';
  os << "controller_margin = " << num17(c.controller_margin) << '\n';
  os << "controller_spread = " << num17(c.controller_spread) << '\n';
  os << "observer_margin = " << num17(c.observer_margin) << '\n';
  os << "observer_spread = " << num17(c.observer_spread) << '\n';
  os << "lmi_seed = " << c.lmi_seed << '\n';
  os << "lmi_budget = " << c.lmi_budget << '\n';
  if (c.K) os << "K = " << join(*c.K) << '\n';
  if (c.L) os << "L = " << join(*c.L) << '\n';
  os << "iota = " << num17(c.iota) << '\n';
  os << "kappa0 = " << num17(c.kappa0) << '\n';
  os << "kappa1 = " << num17(c.kappa1) << '\n';
  os << "horizon = " << num17(c.horizon) << '\n';
  os << "snapshot_interval = " << num17(c.snapshot_interval) << '\n';
  if (c.decay_window) os << "decay_window = " << join({(*c.decay_window)[0], (*c.decay_window)[1]}) << '\n';
  os << "early_window = " << join({c.early_window[0], c.early_window[1]}) << '\n';
}

inline bool operator==(const ScenarioConfig& x, const ScenarioConfig& y) {
  std::ostringstream a, b;
  write_config(a, x);
  write_config(b, y);
  return a.str() == b.str() && x.w0 == y.w0 && x.eps_hat0 == y.eps_hat0 && x.d1 == y.d1;
}

}  // namespace rdreg
