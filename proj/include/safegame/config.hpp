/*
 Copyright 2026 The safegame Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SAFEGAME_CONFIG_HPP
#define SAFEGAME_CONFIG_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "safegame/montecarlo.hpp"

namespace safegame {

/// Config problem tied to a line of the source text (0 when not line-bound).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        key_(std::move(key)),
        detail_(what) {}
  int line() const { return line_; }
  /// The key the problem belongs to, when known.
  const std::string& key() const { return key_; }
  /// The message without the line prefix.
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  std::string key_;
  std::string detail_;
};

/// Everything a run needs. Defaults depend on the system; see defaults_for.
struct RunConfig {
  SystemTag system = SystemTag::kPendulum;
  int horizon = 150;
  double dt = 0.01;
  std::string output_dir = "out";

  PendulumParams pendulum;
  double initial_angle = 3.141592653589793;
  double initial_rate = 0.0;
  double rate_limit = 5.0;

  QuadrotorParams quadrotor;
  Eigen::Vector3d start{10.0, 0.0, -1.0};
  Eigen::Vector3d target{-5.0, -3.0, 2.0};

  int obstacle_count = kBenchmarkObstacleCount;
  std::uint64_t obstacle_seed = kBenchmarkObstacleSeed;
  ObstacleBounds obstacle_bounds;
  /// Explicit obstacles; when non-empty the random course is not drawn.
  std::vector<Sphere> obstacle_list;

  BarrierKind barrier = BarrierKind::kInverse;
  bool shift_by_target = true;

  double q_dbas = 1000.0;
  double state_weight = 0.0;
  double r_u = 0.1;
  double r_v = 1.1;
  Eigen::Vector3d pendulum_terminal{1000.0, 5.0, 500.0};
  double terminal_position = 10.0;
  double terminal_other = 1.0;
  bool hover_reference = true;

  SolverOptions solver;

  UncertaintyTag level = UncertaintyTag::kModerate;
  double wind_sigma = WindModel::kModerateSigma;
  int trials = 1000;
  double reach_threshold = 0.3;
  std::uint64_t scenario_seed = 1;
  int workers = 0;
  double divergence_bound = 1e6;
};

inline RunConfig defaults_for(SystemTag system) {
  RunConfig c;
  c.system = system;
  if (system == SystemTag::kQuadrotor) {
    const QuadrotorSetup s;
    c.horizon = s.horizon;
    c.quadrotor = s.params;
    c.q_dbas = s.q_dbas;
    c.state_weight = s.state_weight;
    c.r_u = s.r_u;
    c.r_v = s.r_v;
    c.terminal_position = s.terminal_position;
    c.terminal_other = s.terminal_other;
    c.reach_threshold = 2.0;
    c.solver = s.options;
  }
  return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, int line, const std::string& key) {
  double out = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(out))
    throw ConfigError("'" + key + "' expects a finite number, got '" + s + "'", line);
  return out;
}

inline long long parse_int(const std::string& s, int line, const std::string& key) {
  long long out = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + s + "'", line);
  return out;
}

inline std::uint64_t parse_u64(const std::string& s, int line, const std::string& key) {
  std::uint64_t out = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + s + "'", line);
  return out;
}

inline bool parse_bool(const std::string& s, int line, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + s + "'", line);
}

inline std::vector<double> parse_list(const std::string& s, int line,
                                      const std::string& key) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, line, key));
  return out;
}

inline Eigen::Vector3d parse_vec3(const std::string& s, int line, const std::string& key) {
  const auto v = parse_list(s, line, key);
  if (v.size() != 3)
    throw ConfigError("'" + key + "' expects three numbers", line);
  return {v[0], v[1], v[2]};
}

inline std::string format_vec3(const Eigen::Vector3d& v) {
  return format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]);
}

/// "x y z r; x y z r; ..."
inline std::vector<Sphere> parse_spheres(const std::string& s, int line,
                                         const std::string& key) {
  std::vector<Sphere> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto v = parse_list(item, line, key);
    if (v.size() != 4)
      throw ConfigError("'" + key + "' entries are 'x y z radius'", line);
    out.push_back({{v[0], v[1], v[2]}, v[3]});
  }
  return out;
}

inline std::string format_spheres(const std::vector<Sphere>& list) {
  std::string out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) out += "; ";
    out += format_vec3(list[i].center) + " " + format_double(list[i].radius);
  }
  return out;
}

/// One config key: how to print it and how to read it back.
struct KeySpec {
  std::string name;
  std::function<std::string(const RunConfig&)> print;
  std::function<void(RunConfig&, const std::string&, int)> parse;
};

inline std::vector<KeySpec> key_table(SystemTag system) {
  using C = RunConfig;
  std::vector<KeySpec> t;
  auto num = [&t](std::string name, double C::*field) {
    t.push_back({name, [field](const C& c) { return format_double(c.*field); },
                 [field, name](C& c, const std::string& v, int line) {
                   c.*field = parse_double(v, line, name);
                 }});
  };
  auto add = [&t](std::string name, std::function<std::string(const C&)> p,
                  std::function<void(C&, const std::string&, int)> r) {
    t.push_back({std::move(name), std::move(p), std::move(r)});
  };

  add("system", [](const C& c) { return to_string(c.system); },
      [](C&, const std::string&, int) {});
  add("horizon", [](const C& c) { return std::to_string(c.horizon); },
      [](C& c, const std::string& v, int l) { c.horizon = static_cast<int>(parse_int(v, l, "horizon")); });
  num("dt", &C::dt);
  add("output_dir", [](const C& c) { return c.output_dir; },
      [](C& c, const std::string& v, int l) {
        if (v.empty()) throw ConfigError("'output_dir' must not be empty", l);
        c.output_dir = v;
      });

  if (system == SystemTag::kPendulum) {
    add("pendulum.length", [](const C& c) { return format_double(c.pendulum.length); },
        [](C& c, const std::string& v, int l) { c.pendulum.length = parse_double(v, l, "pendulum.length"); });
    add("pendulum.damping", [](const C& c) { return format_double(c.pendulum.damping); },
        [](C& c, const std::string& v, int l) { c.pendulum.damping = parse_double(v, l, "pendulum.damping"); });
    add("pendulum.mass", [](const C& c) { return format_double(c.pendulum.mass); },
        [](C& c, const std::string& v, int l) { c.pendulum.mass = parse_double(v, l, "pendulum.mass"); });
    add("pendulum.gravity", [](const C& c) { return format_double(c.pendulum.gravity); },
        [](C& c, const std::string& v, int l) { c.pendulum.gravity = parse_double(v, l, "pendulum.gravity"); });
    num("pendulum.initial_angle", &C::initial_angle);
    num("pendulum.initial_rate", &C::initial_rate);
    num("pendulum.rate_limit", &C::rate_limit);
  } else {
    add("quadrotor.mass", [](const C& c) { return format_double(c.quadrotor.mass); },
        [](C& c, const std::string& v, int l) { c.quadrotor.mass = parse_double(v, l, "quadrotor.mass"); });
    add("quadrotor.inertia", [](const C& c) { return format_vec3(c.quadrotor.inertia); },
        [](C& c, const std::string& v, int l) { c.quadrotor.inertia = parse_vec3(v, l, "quadrotor.inertia"); });
    add("quadrotor.gravity", [](const C& c) { return format_double(c.quadrotor.gravity); },
        [](C& c, const std::string& v, int l) { c.quadrotor.gravity = parse_double(v, l, "quadrotor.gravity"); });
    add("quadrotor.start", [](const C& c) { return format_vec3(c.start); },
        [](C& c, const std::string& v, int l) { c.start = parse_vec3(v, l, "quadrotor.start"); });
    add("quadrotor.target", [](const C& c) { return format_vec3(c.target); },
        [](C& c, const std::string& v, int l) { c.target = parse_vec3(v, l, "quadrotor.target"); });
    add("obstacles.count", [](const C& c) { return std::to_string(c.obstacle_count); },
        [](C& c, const std::string& v, int l) { c.obstacle_count = static_cast<int>(parse_int(v, l, "obstacles.count")); });
    add("obstacles.seed", [](const C& c) { return std::to_string(c.obstacle_seed); },
        [](C& c, const std::string& v, int l) { c.obstacle_seed = parse_u64(v, l, "obstacles.seed"); });
    add("obstacles.min_corner", [](const C& c) { return format_vec3(c.obstacle_bounds.min_corner); },
        [](C& c, const std::string& v, int l) { c.obstacle_bounds.min_corner = parse_vec3(v, l, "obstacles.min_corner"); });
    add("obstacles.max_corner", [](const C& c) { return format_vec3(c.obstacle_bounds.max_corner); },
        [](C& c, const std::string& v, int l) { c.obstacle_bounds.max_corner = parse_vec3(v, l, "obstacles.max_corner"); });
    add("obstacles.radius_min", [](const C& c) { return format_double(c.obstacle_bounds.radius_min); },
        [](C& c, const std::string& v, int l) { c.obstacle_bounds.radius_min = parse_double(v, l, "obstacles.radius_min"); });
    add("obstacles.radius_max", [](const C& c) { return format_double(c.obstacle_bounds.radius_max); },
        [](C& c, const std::string& v, int l) { c.obstacle_bounds.radius_max = parse_double(v, l, "obstacles.radius_max"); });
    add("obstacles.clearance", [](const C& c) { return format_double(c.obstacle_bounds.clearance); },
        [](C& c, const std::string& v, int l) { c.obstacle_bounds.clearance = parse_double(v, l, "obstacles.clearance"); });
    add("obstacles.list", [](const C& c) { return format_spheres(c.obstacle_list); },
        [](C& c, const std::string& v, int l) { c.obstacle_list = parse_spheres(v, l, "obstacles.list"); });
  }

  add("barrier.kind",
      [](const C& c) { return std::string(c.barrier == BarrierKind::kInverse ? "inverse" : "log"); },
      [](C& c, const std::string& v, int l) {
        if (v == "inverse") c.barrier = BarrierKind::kInverse;
        else if (v == "log") c.barrier = BarrierKind::kLogarithmic;
        else throw ConfigError("'barrier.kind' must be inverse or log", l);
      });
  add("barrier.shift_by_target", [](const C& c) { return std::string(c.shift_by_target ? "true" : "false"); },
      [](C& c, const std::string& v, int l) { c.shift_by_target = parse_bool(v, l, "barrier.shift_by_target"); });

  num("cost.q_dbas", &C::q_dbas);
  if (system == SystemTag::kQuadrotor) num("cost.state_weight", &C::state_weight);
  num("cost.r_u", &C::r_u);
  num("cost.r_v", &C::r_v);
  if (system == SystemTag::kPendulum) {
    add("cost.terminal", [](const C& c) { return format_vec3(c.pendulum_terminal); },
        [](C& c, const std::string& v, int l) { c.pendulum_terminal = parse_vec3(v, l, "cost.terminal"); });
  } else {
    num("cost.terminal_position", &C::terminal_position);
    num("cost.terminal_other", &C::terminal_other);
    add("cost.hover_reference", [](const C& c) { return std::string(c.hover_reference ? "true" : "false"); },
        [](C& c, const std::string& v, int l) { c.hover_reference = parse_bool(v, l, "cost.hover_reference"); });
  }

  add("solver.convergence_threshold", [](const C& c) { return format_double(c.solver.convergence_threshold); },
      [](C& c, const std::string& v, int l) { c.solver.convergence_threshold = parse_double(v, l, "solver.convergence_threshold"); });
  add("solver.max_iterations", [](const C& c) { return std::to_string(c.solver.max_iterations); },
      [](C& c, const std::string& v, int l) { c.solver.max_iterations = static_cast<int>(parse_int(v, l, "solver.max_iterations")); });
  add("solver.regularization",
      [](const C& c) { return std::string(c.solver.regularization == RegularizationScheme::kEigenClamp ? "eigen_clamp" : "additive"); },
      [](C& c, const std::string& v, int l) {
        if (v == "eigen_clamp") c.solver.regularization = RegularizationScheme::kEigenClamp;
        else if (v == "additive") c.solver.regularization = RegularizationScheme::kAdditive;
        else throw ConfigError("'solver.regularization' must be eigen_clamp or additive", l);
      });
  add("solver.initial_regularization", [](const C& c) { return format_double(c.solver.initial_regularization); },
      [](C& c, const std::string& v, int l) { c.solver.initial_regularization = parse_double(v, l, "solver.initial_regularization"); });
  add("solver.max_regularization", [](const C& c) { return format_double(c.solver.max_regularization); },
      [](C& c, const std::string& v, int l) { c.solver.max_regularization = parse_double(v, l, "solver.max_regularization"); });
  add("solver.line_search_shrink", [](const C& c) { return format_double(c.solver.line_search_shrink); },
      [](C& c, const std::string& v, int l) { c.solver.line_search_shrink = parse_double(v, l, "solver.line_search_shrink"); });
  add("solver.min_step", [](const C& c) { return format_double(c.solver.min_step); },
      [](C& c, const std::string& v, int l) { c.solver.min_step = parse_double(v, l, "solver.min_step"); });
  add("solver.min_ratio", [](const C& c) { return format_double(c.solver.min_ratio); },
      [](C& c, const std::string& v, int l) { c.solver.min_ratio = parse_double(v, l, "solver.min_ratio"); });
  add("solver.max_player", [](const C& c) { return std::string(c.solver.max_player_enabled ? "true" : "false"); },
      [](C& c, const std::string& v, int l) { c.solver.max_player_enabled = parse_bool(v, l, "solver.max_player"); });
  add("solver.second_order", [](const C& c) { return std::string(c.solver.second_order_dynamics ? "true" : "false"); },
      [](C& c, const std::string& v, int l) { c.solver.second_order_dynamics = parse_bool(v, l, "solver.second_order"); });

  if (system == SystemTag::kPendulum) {
    add("scenario.level",
        [](const C& c) { return std::string(c.level == UncertaintyTag::kModerate ? "moderate" : "high"); },
        [](C& c, const std::string& v, int l) {
          if (v == "moderate") c.level = UncertaintyTag::kModerate;
          else if (v == "high") c.level = UncertaintyTag::kHigh;
          else throw ConfigError("'scenario.level' must be moderate or high", l);
        });
  } else {
    num("scenario.wind_sigma", &C::wind_sigma);
  }
  add("scenario.trials", [](const C& c) { return std::to_string(c.trials); },
      [](C& c, const std::string& v, int l) { c.trials = static_cast<int>(parse_int(v, l, "scenario.trials")); });
  num("scenario.reach_threshold", &C::reach_threshold);
  add("scenario.seed", [](const C& c) { return std::to_string(c.scenario_seed); },
      [](C& c, const std::string& v, int l) { c.scenario_seed = parse_u64(v, l, "scenario.seed"); });
  add("scenario.workers", [](const C& c) { return std::to_string(c.workers); },
      [](C& c, const std::string& v, int l) { c.workers = static_cast<int>(parse_int(v, l, "scenario.workers")); });
  num("scenario.divergence_bound", &C::divergence_bound);
  return t;
}

}  // namespace detail

/// Throws ConfigError on values that no run could use. The error names
/// the offending key so that parse_config can point at its line.
inline void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what, 0, key);
  };
  check(c.horizon >= 2, "horizon", "must be at least 2");
  check(c.dt > 0.0, "dt", "must be positive");
  check(!c.output_dir.empty(), "output_dir", "must not be empty");
  check(c.q_dbas >= 0.0, "cost.q_dbas", "must be non-negative");
  check(c.state_weight >= 0.0, "cost.state_weight", "must be non-negative");
  check(c.r_u > 0.0, "cost.r_u", "must be positive");
  check(c.r_v > 0.0, "cost.r_v", "must be positive");

  const SolverOptions& o = c.solver;
  check(o.convergence_threshold > 0.0, "solver.convergence_threshold", "must be positive");
  check(o.max_iterations >= 1, "solver.max_iterations", "must be at least 1");
  check(o.initial_regularization > 0.0, "solver.initial_regularization", "must be positive");
  check(o.max_regularization >= o.initial_regularization, "solver.max_regularization",
        "must not be below solver.initial_regularization");
  check(o.line_search_shrink > 0.0 && o.line_search_shrink < 1.0,
        "solver.line_search_shrink", "must lie in (0,1)");
  check(o.min_step > 0.0 && o.min_step <= 1.0, "solver.min_step", "must lie in (0,1]");
  check(o.min_ratio >= 0.0, "solver.min_ratio", "must be non-negative");

  check(c.trials >= 1, "scenario.trials", "must be at least 1");
  check(c.workers >= 0, "scenario.workers", "must be non-negative");
  check(c.reach_threshold > 0.0, "scenario.reach_threshold", "must be positive");
  check(c.divergence_bound > 0.0, "scenario.divergence_bound", "must be positive");

  if (c.system == SystemTag::kPendulum) {
    check(c.pendulum.length > 0.0, "pendulum.length", "must be positive");
    check(c.pendulum.damping > 0.0, "pendulum.damping", "must be positive");
    check(c.pendulum.mass > 0.0, "pendulum.mass", "must be positive");
    check(c.pendulum.gravity > 0.0, "pendulum.gravity", "must be positive");
    check(c.rate_limit > 0.0, "pendulum.rate_limit", "must be positive");
    check(std::abs(c.initial_rate) < c.rate_limit, "pendulum.initial_rate",
          "must lie strictly inside the rate limit");
    check(c.pendulum_terminal.minCoeff() >= 0.0, "cost.terminal", "must be non-negative");
  } else {
    check(c.quadrotor.mass > 0.0, "quadrotor.mass", "must be positive");
    check(c.quadrotor.inertia.minCoeff() > 0.0, "quadrotor.inertia", "must be positive");
    check(c.quadrotor.gravity > 0.0, "quadrotor.gravity", "must be positive");
    check(c.wind_sigma >= 0.0, "scenario.wind_sigma", "must be non-negative");
    check(c.terminal_position >= 0.0, "cost.terminal_position", "must be non-negative");
    check(c.terminal_other >= 0.0, "cost.terminal_other", "must be non-negative");
    check(c.obstacle_count >= 0, "obstacles.count", "must be non-negative");
    const ObstacleBounds& b = c.obstacle_bounds;
    check(b.radius_min > 0.0, "obstacles.radius_min", "must be positive");
    check(b.radius_max >= b.radius_min, "obstacles.radius_max",
          "must not be below obstacles.radius_min");
    check((b.max_corner - b.min_corner).minCoeff() >= 0.0, "obstacles.max_corner",
          "must not be below obstacles.min_corner");
    check(b.clearance >= 0.0, "obstacles.clearance", "must be non-negative");
    for (const auto& o : c.obstacle_list)
      check(o.radius > 0.0, "obstacles.list", "radii must be positive");
  }
}

/// Parses `key = value` lines; `#` starts a comment. The system is read
/// first so that defaults and the admissible key set follow it.
inline RunConfig parse_config(const std::string& text) {
  struct Line {
    int number;
    std::string key, value;
  };
  std::vector<Line> lines;
  {
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      const auto hash = raw.find('#');
      std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (s.empty()) continue;
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected 'key = value'", number);
      Line l{number, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1))};
      if (l.key.empty()) throw ConfigError("missing key before '='", number);
      lines.push_back(std::move(l));
    }
  }
  SystemTag system = SystemTag::kPendulum;
  bool have_system = false;
  for (const auto& l : lines) {
    if (l.key != "system") continue;
    if (have_system) throw ConfigError("duplicate key 'system'", l.number);
    if (l.value == "pendulum") system = SystemTag::kPendulum;
    else if (l.value == "quadrotor") system = SystemTag::kQuadrotor;
    else throw ConfigError("'system' must be pendulum or quadrotor", l.number);
    have_system = true;
  }
  if (!have_system) throw ConfigError("missing required key 'system'");

  RunConfig cfg = defaults_for(system);
  const auto table = detail::key_table(system);
  const auto other = detail::key_table(system == SystemTag::kPendulum
                                           ? SystemTag::kQuadrotor
                                           : SystemTag::kPendulum);
  std::set<std::string> seen;
  for (const auto& l : lines) {
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const detail::KeySpec& k) { return k.name == l.key; });
    if (it == table.end()) {
      const bool foreign = std::any_of(other.begin(), other.end(),
                                       [&](const detail::KeySpec& k) { return k.name == l.key; });
      throw ConfigError(foreign ? "key '" + l.key + "' does not apply to system " +
                                      to_string(system)
                                : "unknown key '" + l.key + "'",
                        l.number);
    }
    if (!seen.insert(l.key).second)
      throw ConfigError("duplicate key '" + l.key + "'", l.number);
    it->parse(cfg, l.value, l.number);
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    for (const auto& l : lines)
      if (l.key == e.key()) throw ConfigError(e.detail(), l.number, e.key());
    throw;
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text: every key of the system in a fixed order.
inline std::string print_config(const RunConfig& c) {
  std::string out;
  for (const auto& k : detail::key_table(c.system))
    out += k.name + " = " + k.print(c) + "\n";
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

inline std::string hash_keys(const RunConfig& c,
                             const std::function<bool(const std::string&)>& keep) {
  std::string text;
  for (const auto& k : key_table(c.system))
    if (keep(k.name)) text += k.name + " = " + k.print(c) + "\n";
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

inline bool is_run_environment_key(const std::string& key) {
  return key == "output_dir" || key == "scenario.workers";
}

}  // namespace detail

/// Hash of every key that can change a result. The output directory and
/// the worker count are left out.
inline std::string config_hash(const RunConfig& c) {
  return detail::hash_keys(
      c, [](const std::string& k) { return !detail::is_run_environment_key(k); });
}

/// Hash of the keys that define the optimal-control problem and solver,
/// excluding the Monte-Carlo scenario. Solutions carry it so that an
/// evaluation can check it is using a matching solution.
inline std::string problem_hash(const RunConfig& c) {
  return detail::hash_keys(c, [](const std::string& k) {
    return !detail::is_run_environment_key(k) && k.rfind("scenario.", 0) != 0;
  });
}

/// The explicit obstacle list when given, otherwise the seeded random course.
/// An unusable course is a ConfigError.
inline ObstacleCourse course_from(const RunConfig& c) {
  try {
    if (!c.obstacle_list.empty()) {
      ObstacleCourse course;
      course.obstacles = c.obstacle_list;
      course.start = c.start;
      course.target = c.target;
      course.validate();
      return course;
    }
    return build_obstacle_course(c.obstacle_seed, c.obstacle_count,
                                 c.obstacle_bounds, c.start, c.target);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("obstacle course: ") + e.what());
  }
}

inline Benchmark benchmark_from(const RunConfig& c) {
  if (c.system == SystemTag::kPendulum) {
    PendulumSetup s;
    s.params = c.pendulum;
    s.dt = c.dt;
    s.horizon = c.horizon;
    s.initial_angle = c.initial_angle;
    s.initial_rate = c.initial_rate;
    s.rate_limit = c.rate_limit;
    s.barrier = c.barrier;
    s.shift_by_target = c.shift_by_target;
    s.q_dbas = c.q_dbas;
    s.r_u = c.r_u;
    s.r_v = c.r_v;
    s.terminal = c.pendulum_terminal;
    s.options = c.solver;
    return make_pendulum_benchmark(s);
  }
  QuadrotorSetup s;
  s.params = c.quadrotor;
  s.dt = c.dt;
  s.horizon = c.horizon;
  s.course = course_from(c);
  s.barrier = c.barrier;
  s.shift_by_target = c.shift_by_target;
  s.q_dbas = c.q_dbas;
  s.state_weight = c.state_weight;
  s.r_u = c.r_u;
  s.r_v = c.r_v;
  s.terminal_position = c.terminal_position;
  s.terminal_other = c.terminal_other;
  s.hover_reference = c.hover_reference;
  s.options = c.solver;
  return make_quadrotor_benchmark(s);
}

inline Scenario scenario_from(const RunConfig& c) {
  Scenario s;
  s.system = c.system;
  s.level = c.level == UncertaintyTag::kModerate ? UncertaintyLevel::moderate()
                                                  : UncertaintyLevel::high();
  s.wind_sigma = c.wind_sigma;
  s.trials = c.trials;
  s.reach_threshold = c.reach_threshold;
  s.seed = c.scenario_seed;
  s.workers = c.workers;
  s.divergence_bound = c.divergence_bound;
  return s;
}

}  // namespace safegame

#endif  // SAFEGAME_CONFIG_HPP
