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

// Artifact formats.
//
// CSV files start with one `# key=value,...` provenance line followed by a
// header row. JSON files carry the same provenance as top-level fields.
// Column orders are fixed:
//
//   trajectory.csv  k, t, <plant states>, <u>, <v>, <w>, <h>
//   iterations.csv  iter, cost, delta_v, alpha_u, alpha_v, regularization,
//                   expected_u, expected_v, ratio_u, ratio_v, min_accepted,
//                   max_accepted, trials
//   trials.csv      trial, safe, reached, success, finite, violation_step,
//                   violation_constraint, terminal_distance, rejected_draws,
//                   <final plant state>
//   bundle.csv      trial, k, t, <plant states>
//   envelope.csv    k, t, then <name>_mean, <name>_lo, <name>_hi per state
//
// Input columns are empty on the last row of trajectory.csv.

#ifndef SAFEGAME_IO_HPP
#define SAFEGAME_IO_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "safegame/config.hpp"

namespace safegame {

/// A missing, unreadable or malformed artifact.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

/// Provenance stamped into every artifact.
struct Provenance {
  std::string config_hash;
  std::string problem_hash;
  std::uint64_t seed = 0;
  std::string mode;

  static Provenance of(const RunConfig& c, const std::string& mode) {
    return {::safegame::config_hash(c), ::safegame::problem_hash(c), c.scenario_seed, mode};
  }

  std::string csv_line() const {
    return "# config_hash=" + config_hash + ",problem_hash=" + problem_hash +
           ",seed=" + std::to_string(seed) + ",mode=" + mode + "\n";
  }

  void stamp(nlohmann::ordered_json& j) const {
    j["config_hash"] = config_hash;
    j["problem_hash"] = problem_hash;
    j["seed"] = seed;
    j["mode"] = mode;
  }
};

inline std::vector<std::string> plant_state_names(SystemTag s) {
  if (s == SystemTag::kPendulum) return {"theta", "theta_dot"};
  return {"x", "y", "z", "roll", "pitch", "yaw",
          "vel_x", "vel_y", "vel_z", "rate_p", "rate_q", "rate_r"};
}

namespace detail {

inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string column_label(const std::string& label) {
  std::string out;
  for (char ch : label)
    out += (std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_');
  return out;
}

inline nlohmann::ordered_json to_json(const Vector& v) {
  auto j = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

inline nlohmann::ordered_json to_json(const Matrix& m) {
  auto j = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

template <class T>
nlohmann::ordered_json to_json_list(const std::vector<T>& xs) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& x : xs) j.push_back(to_json(x));
  return j;
}

inline double json_double(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw ArtifactError("expected a number");
  return j.get<double>();
}

inline Vector vector_from(const nlohmann::json& j) {
  if (!j.is_array()) throw ArtifactError("expected a vector");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = json_double(j[i]);
  return v;
}

inline Matrix matrix_from(const nlohmann::json& j) {
  if (!j.is_array()) throw ArtifactError("expected a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols)
      throw ArtifactError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = json_double(j[r][c]);
  }
  return m;
}

template <class T, class F>
std::vector<T> list_from(const nlohmann::json& j, F convert) {
  if (!j.is_array()) throw ArtifactError("expected a list");
  std::vector<T> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(convert(e));
  return out;
}

}  // namespace detail

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Solve artifacts

inline std::string trajectory_csv(const Solution& sol, const AugmentedModel& model,
                                  SystemTag system, const Provenance& prov) {
  const Trajectory& t = sol.trajectory;
  const int n = model.plant_dim();
  const int mu = model.min_input_dim();
  const int mv = model.max_input_dim();
  const int q = model.barrier_dim();
  std::vector<const SafeSetFunction*> constraints;
  for (const auto& spec : model.specs())
    for (const auto& c : spec.constraints) constraints.push_back(&c);

  std::string out = prov.csv_line() + "k,t";
  for (const auto& name : plant_state_names(system)) out += "," + name;
  for (int i = 0; i < mu; ++i) out += ",u" + std::to_string(i);
  for (int i = 0; i < mv; ++i) out += ",v" + std::to_string(i);
  for (int i = 0; i < q; ++i) out += ",w" + std::to_string(i);
  for (const auto* c : constraints) out += ",h_" + detail::column_label(c->label);
  out += "\n";
  for (int k = 0; k <= t.horizon(); ++k) {
    const Vector& x = t.states[k];
    out += std::to_string(k) + "," + detail::num(k * t.dt);
    for (int i = 0; i < n; ++i) out += "," + detail::num(x[i]);
    for (int i = 0; i < mu; ++i)
      out += "," + (k < t.horizon() ? detail::num(t.min_inputs[k][i]) : std::string());
    for (int i = 0; i < mv; ++i)
      out += "," + (k < t.horizon() ? detail::num(t.max_inputs[k][i]) : std::string());
    for (int i = 0; i < q; ++i) out += "," + detail::num(x[n + i]);
    const Vector plant = x.head(n);
    for (const auto* c : constraints) out += "," + detail::num(c->value(plant));
    out += "\n";
  }
  return out;
}

inline std::string iterations_csv(const Solution& sol, const Provenance& prov) {
  std::string out = prov.csv_line() +
                    "iter,cost,delta_v,alpha_u,alpha_v,regularization,expected_u,"
                    "expected_v,ratio_u,ratio_v,min_accepted,max_accepted,trials\n";
  for (const auto& r : sol.log) {
    out += std::to_string(r.iteration) + "," + detail::num(r.cost) + "," +
           detail::num(r.delta_v) + "," + detail::num(r.alpha_u) + "," +
           detail::num(r.alpha_v) + "," + detail::num(r.regularization) + "," +
           detail::num(r.expected_u) + "," + detail::num(r.expected_v) + "," +
           detail::num(r.ratio_u) + "," + detail::num(r.ratio_v) + "," +
           (r.min_accepted ? "1" : "0") + "," + (r.max_accepted ? "1" : "0") + "," +
           std::to_string(r.trials) + "\n";
  }
  return out;
}

/// Terminal distance of the nominal under the scenario's reach components.
inline double nominal_terminal_distance(const Solution& sol, const Benchmark& bench,
                                        SystemTag system) {
  const Vector& x = sol.trajectory.states.back();
  if (system == SystemTag::kPendulum) return std::abs(x[0] - bench.plant_target[0]);
  return (x.head(3) - bench.plant_target.head(3)).norm();
}

inline std::string summary_json(const Solution& sol, const Benchmark& bench,
                                SystemTag system, const Provenance& prov) {
  nlohmann::ordered_json j;
  j["format"] = "safegame-summary";
  prov.stamp(j);
  j["system"] = to_string(system);
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["final_cost"] = sol.cost;
  j["terminal_distance"] = nominal_terminal_distance(sol, bench, system);
  const SafetyReport safety = is_safe_trajectory(
      bench.model->specs(), sol.trajectory, bench.model->plant_dim());
  j["nominal_safe"] = safety.safe;
  return dump(j);
}

inline std::string solution_json(const Solution& sol, const Provenance& prov) {
  nlohmann::ordered_json j;
  j["format"] = "safegame-solution";
  prov.stamp(j);
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["cost"] = sol.cost;
  j["dt"] = sol.trajectory.dt;
  j["states"] = detail::to_json_list(sol.trajectory.states);
  j["min_inputs"] = detail::to_json_list(sol.trajectory.min_inputs);
  j["max_inputs"] = detail::to_json_list(sol.trajectory.max_inputs);
  j["ff_u"] = detail::to_json_list(sol.policy.ff_u);
  j["fb_u"] = detail::to_json_list(sol.policy.fb_u);
  j["ff_v"] = detail::to_json_list(sol.policy.ff_v);
  j["fb_v"] = detail::to_json_list(sol.policy.fb_v);
  auto value = nlohmann::ordered_json::array();
  for (double v : sol.value) value.push_back(v);
  j["value"] = value;
  return dump(j);
}

struct LoadedSolution {
  Solution solution;
  Provenance provenance;
};

/// Parses solution.json and checks it against the model's dimensions.
inline LoadedSolution parse_solution(const std::string& text, const AugmentedModel& model) {
  LoadedSolution out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "safegame-solution")
      throw ArtifactError("not a solution artifact");
    out.provenance.config_hash = j.at("config_hash").get<std::string>();
    out.provenance.problem_hash = j.at("problem_hash").get<std::string>();
    out.provenance.seed = j.at("seed").get<std::uint64_t>();
    out.provenance.mode = j.at("mode").get<std::string>();
    Solution& s = out.solution;
    s.converged = j.at("converged").get<bool>();
    s.iterations = j.at("iterations").get<int>();
    s.cost = detail::json_double(j.at("cost"));
    s.trajectory.dt = detail::json_double(j.at("dt"));
    s.trajectory.states = detail::list_from<Vector>(j.at("states"), detail::vector_from);
    s.trajectory.min_inputs = detail::list_from<Vector>(j.at("min_inputs"), detail::vector_from);
    s.trajectory.max_inputs = detail::list_from<Vector>(j.at("max_inputs"), detail::vector_from);
    s.policy.ff_u = detail::list_from<Vector>(j.at("ff_u"), detail::vector_from);
    s.policy.fb_u = detail::list_from<Matrix>(j.at("fb_u"), detail::matrix_from);
    s.policy.ff_v = detail::list_from<Vector>(j.at("ff_v"), detail::vector_from);
    s.policy.fb_v = detail::list_from<Matrix>(j.at("fb_v"), detail::matrix_from);
    s.value = detail::list_from<double>(j.at("value"), detail::json_double);
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed solution artifact: ") + e.what());
  }
  const Solution& s = out.solution;
  try {
    s.trajectory.validate(model.state_dim(), model.min_input_dim(), model.max_input_dim());
  } catch (const Error& e) {
    throw ArtifactError(std::string("solution does not fit the model: ") + e.what());
  }
  const std::size_t gains = static_cast<std::size_t>(std::max(s.trajectory.horizon() - 1, 0));
  if (s.policy.fb_u.size() != gains || s.policy.ff_u.size() != gains)
    throw ArtifactError("solution policy length does not match its horizon");
  for (const auto& k : s.policy.fb_u)
    if (k.rows() != model.min_input_dim() || k.cols() != model.state_dim())
      throw ArtifactError("solution feedback gain has the wrong shape");
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation artifacts

namespace detail {

inline void scenario_fields(nlohmann::ordered_json& j, const Scenario& s) {
  j["system"] = to_string(s.system);
  if (s.system == SystemTag::kPendulum)
    j["level"] = s.level.tag == UncertaintyTag::kModerate ? "moderate" : "high";
  else
    j["wind_sigma"] = s.wind_sigma;
  j["trials"] = s.trials;
  j["reach_threshold"] = s.reach_threshold;
}

inline nlohmann::ordered_json metric_fields(const Metrics& m) {
  nlohmann::ordered_json j;
  j["safety_rate"] = m.safety_rate;
  j["reachability_rate"] = m.reachability_rate;
  j["success_rate"] = m.success_rate;
  j["rmsd"] = m.rmsd;
  j["total_state_variance"] = m.total_state_variance;
  j["blowups"] = m.blowups;
  j["rejected_draws"] = m.rejected_draws;
  return j;
}

}  // namespace detail

inline std::string metrics_json(const Metrics& m, const Provenance& prov) {
  nlohmann::ordered_json j;
  j["format"] = "safegame-metrics";
  prov.stamp(j);
  detail::scenario_fields(j, m.scenario);
  const auto fields = detail::metric_fields(m);
  for (const auto& [k, v] : fields.items()) j[k] = v;
  return dump(j);
}

inline std::string trials_csv(const Metrics& m, const Provenance& prov) {
  std::string out = prov.csv_line() +
                    "trial,safe,reached,success,finite,violation_step,"
                    "violation_constraint,terminal_distance,rejected_draws";
  for (const auto& name : plant_state_names(m.scenario.system)) out += ",final_" + name;
  out += "\n";
  for (const auto& r : m.records) {
    out += std::to_string(r.index) + "," + (r.safe ? "1" : "0") + "," +
           (r.reached ? "1" : "0") + "," + (r.success() ? "1" : "0") + "," +
           (r.finite ? "1" : "0") + "," + std::to_string(r.violation_step) + "," +
           std::to_string(r.violation_constraint) + "," +
           detail::num(r.terminal_distance) + "," + std::to_string(r.rejected_draws);
    for (Eigen::Index i = 0; i < r.final_state.size(); ++i)
      out += "," + detail::num(r.final_state[i]);
    out += "\n";
  }
  return out;
}

inline std::string comparison_json(const Metrics& proposed, const Metrics& baseline,
                                   const Comparison& c, const Provenance& prov) {
  nlohmann::ordered_json j;
  j["format"] = "safegame-comparison";
  prov.stamp(j);
  detail::scenario_fields(j, c.scenario);
  j["proposed"] = detail::metric_fields(proposed);
  j["baseline"] = detail::metric_fields(baseline);
  nlohmann::ordered_json d;
  d["safety"] = c.safety_delta;
  d["reachability"] = c.reachability_delta;
  d["success"] = c.success_delta;
  d["rmsd"] = c.rmsd_delta;
  d["total_state_variance"] = c.variance_delta;
  j["delta"] = d;
  nlohmann::ordered_json f;
  f["safer"] = c.safer;
  f["more_successful"] = c.more_successful;
  f["lower_variance"] = c.lower_variance;
  f["larger_rmsd"] = c.larger_rmsd;
  f["lower_reachability"] = c.lower_reachability;
  j["orderings"] = f;
  return dump(j);
}

// ---------------------------------------------------------------------------
// Plot data

inline std::string bundle_csv(const std::vector<std::vector<Vector>>& trajs, double dt,
                              SystemTag system, const Provenance& prov) {
  std::string out = prov.csv_line() + "trial,k,t";
  for (const auto& name : plant_state_names(system)) out += "," + name;
  out += "\n";
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (std::size_t k = 0; k < trajs[i].size(); ++k) {
      out += std::to_string(i) + "," + std::to_string(k) + "," + detail::num(k * dt);
      const Vector& x = trajs[i][k];
      for (Eigen::Index c = 0; c < x.size(); ++c) out += "," + detail::num(x[c]);
      out += "\n";
    }
  }
  return out;
}

inline std::string envelope_csv(const Envelope& e, double dt, SystemTag system,
                                const Provenance& prov) {
  const auto names = plant_state_names(system);
  std::string out = prov.csv_line() + "k,t";
  for (const auto& name : names) out += "," + name + "_mean," + name + "_lo," + name + "_hi";
  out += "\n";
  for (int k = 0; k < e.steps(); ++k) {
    out += std::to_string(k) + "," + detail::num(k * dt);
    for (Eigen::Index c = 0; c < e.mean[k].size(); ++c)
      out += "," + detail::num(e.mean[k][c]) + "," + detail::num(e.lower[k][c]) + "," +
             detail::num(e.upper[k][c]);
    out += "\n";
  }
  return out;
}

}  // namespace safegame

#endif  // SAFEGAME_IO_HPP
