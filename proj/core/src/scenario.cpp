#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lfgc/sim.hpp"

namespace lfgc {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "scenario: invalid configuration";
  for (const auto& i : issues) out += "\n  " + i;
  return out;
}

// Reads fields of one JSON object, recording every problem with its path.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::vector<std::string>& issues)
      : j_(j), path_(std::move(path)), issues_(issues) {
    if (!j_.is_object()) issue(path_, "expected an object");
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  void number(const std::string& key, double& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) return issue(at(key), "expected a number");
    out = v.get<double>();
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) return issue(at(key), "expected an integer");
    if (std::is_unsigned_v<Int> && v.is_number_integer() && !v.is_number_unsigned() &&
        v.get<long long>() < 0) {
      return issue(at(key), "expected a nonnegative integer");
    }
    out = v.get<Int>();
  }

  void boolean(const std::string& key, bool& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) return issue(at(key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) return issue(at(key), "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) return issue(at(key), "expected an array of numbers");
    std::vector<double> tmp;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) return issue(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      tmp.push_back(v[i].get<double>());
    }
    out = std::move(tmp);
  }

  template <typename Enum>
  void choice(const std::string& key, Enum& out,
              std::initializer_list<std::pair<const char*, Enum>> options) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    std::string allowed;
    for (const auto& [name, value] : options) {
      if (v.is_string() && v.get<std::string>() == name) {
        out = value;
        return;
      }
      allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    }
    issue(at(key), "expected one of " + allowed);
  }

  // Marks a key as consumed by a nested reader.
  bool child(const std::string& key) {
    seen_.insert(key);
    return has(key);
  }

  void reject_unknown() {
    if (!j_.is_object()) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) issue(at(key), "unknown field");
    }
  }

  void issue(const std::string& path, const std::string& what) {
    issues_.push_back((path.empty() ? std::string("<root>") : path) + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& issues_;
  std::set<std::string> seen_;
};

void read_state(const json& j, const std::string& path, VehicleState& s,
                std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  r.number("x", s.x);
  r.number("y", s.y);
  r.number("v", s.v);
  r.number("psi", s.psi);
  r.reject_unknown();
}

void read_params(const json& j, const std::string& path, VehicleParams& p,
                 std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  r.number("l_f", p.l_f);
  r.number("l_r", p.l_r);
  r.number("length", p.length);
  r.number("width", p.width);
  r.number("a_bound", p.a_bound);
  r.number("delta_bound", p.delta_bound);
  r.number("v_min", p.v_min);
  r.number("v_max", p.v_max);
  r.reject_unknown();
}

void read_idm(const json& j, const std::string& path, IdmParams& p,
              std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  r.number("v0", p.v0);
  r.number("phi0", p.phi0);
  r.number("a_m", p.a_m);
  r.number("b", p.b);
  r.number("delta", p.delta);
  r.number("T", p.T);
  r.reject_unknown();
}

void read_road(const json& j, const std::string& path, RoadGeometry& road,
               std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  r.numbers("lane_centers", road.lane_centers);
  r.number("lane_width", road.lane_width);
  r.number("y_min", road.y_min);
  r.number("y_max", road.y_max);
  r.number("merge_lane_end_x", road.merge_lane_end_x);
  r.integer("merge_lane", road.merge_lane);
  r.integer("target_lane", road.target_lane);
  r.reject_unknown();
}

void read_matrix(const json& v, const std::string& path, Eigen::MatrixXd& out,
                 std::vector<std::string>& issues) {
  if (!v.is_array() || v.empty()) {
    issues.push_back(path + ": expected a non-empty array of rows");
    return;
  }
  const std::size_t n = v.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_array() || v[i].size() != n) {
      issues.push_back(path + "[" + std::to_string(i) + "]: expected a row of " +
                       std::to_string(n) + " numbers");
      return;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!v[i][k].is_number()) {
        issues.push_back(path + "[" + std::to_string(i) + "][" + std::to_string(k) +
                         "]: expected a number");
        return;
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[i][k].get<double>();
    }
  }
  out = m;
}

void read_planner(const json& j, const std::string& path, PlannerConfig& p,
                  std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  r.integer("horizon", p.horizon);
  r.number("dt", p.integration.dt);
  r.integer("substeps", p.integration.substeps);
  r.number("discount", p.discount);
  r.number("epsilon", p.epsilon);
  r.numbers("accel_levels", p.accel_levels);
  r.number("lane_change_duration", p.lane_change_duration);
  r.number("comfort_time_gap", p.reward.comfort_time_gap);
  r.number("box_margin", p.reward.box_margin);
  if (r.child("weights")) {
    ObjectReader w(r.raw("weights"), r.at("weights"), issues);
    w.number("w1", p.weights.w1);
    w.number("w2", p.weights.w2);
    w.number("w3", p.weights.w3);
    w.number("w4", p.weights.w4);
    w.number("w5", p.weights.w5);
    w.reject_unknown();
  }
  r.reject_unknown();
}

void read_beliefs(const json& j, const std::string& path, BeliefConfig& b,
                  std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  if (r.child("W_diag")) {
    std::vector<double> d;
    r.numbers("W_diag", d);
    if (!d.empty()) {
      b.W = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()))
                .asDiagonal();
    }
  }
  if (r.child("W")) {
    if (r.has("W_diag")) r.issue(r.at("W"), "give either W or W_diag, not both");
    read_matrix(r.raw("W"), r.at("W"), b.W, issues);
  }
  if (r.child("transition")) {
    Eigen::MatrixXd t;
    read_matrix(r.raw("transition"), r.at("transition"), t, issues);
    if (t.size() > 0 && (t.rows() != 2 || t.cols() != 2)) {
      r.issue(r.at("transition"), "expected a 2x2 matrix");
    } else if (t.size() > 0) {
      b.transition = t;
    }
  }
  double p0 = b.p0.p_leader;
  r.number("p0_leader", p0);
  b.p0 = {p0, 1.0 - p0};
  r.number("floor", b.floor);
  r.choice("residual", b.mode,
           {{"interacting", ResidualMode::interacting}, {"joint", ResidualMode::joint}});
  r.reject_unknown();
}

void read_recording(const json& j, const std::string& path, Recording& rec,
                    std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  r.number("t0", rec.t0);
  r.number("dt", rec.dt);
  if (r.child("states")) {
    const json& s = r.raw("states");
    if (!s.is_array()) {
      r.issue(r.at("states"), "expected an array of [x, y, v, psi]");
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const json& row = s[i];
        const bool ok = row.is_array() && row.size() == 4 &&
                        std::all_of(row.begin(), row.end(), [](const json& e) { return e.is_number(); });
        if (!ok) {
          r.issue(r.at("states") + "[" + std::to_string(i) + "]", "expected [x, y, v, psi]");
          continue;
        }
        rec.states.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                              row[3].get<double>()});
      }
    }
  }
  r.reject_unknown();
}

void read_agent(const json& j, const std::string& path, AgentConfig& a,
                std::vector<std::string>& issues) {
  ObjectReader r(j, path, issues);
  if (!r.has("id")) r.issue(r.at("id"), "required");
  r.integer("id", a.id);
  r.choice("kind", a.spec.kind,
           {{"game", AgentKind::game}, {"idm", AgentKind::idm},
            {"constant_speed", AgentKind::constant_speed}, {"replay", AgentKind::replay}});
  r.choice("role", a.spec.role, {{"leader", Role::leader}, {"follower", Role::follower}});
  r.choice("target", a.spec.target, {{"front", IdmTarget::front}, {"ego", IdmTarget::ego}});
  r.string("recording", a.spec.recording);
  r.boolean("interacting", a.interacting);
  r.boolean("noise", a.noise);
  r.boolean("front_guard", a.spec.front_guard);
  if (r.child("state")) read_state(r.raw("state"), r.at("state"), a.initial, issues);
  if (r.child("params")) read_params(r.raw("params"), r.at("params"), a.spec.params, issues);
  if (r.child("idm")) read_idm(r.raw("idm"), r.at("idm"), a.spec.idm, issues);
  if (r.child("guard")) read_idm(r.raw("guard"), r.at("guard"), a.spec.guard, issues);
  r.reject_unknown();
}

json state_json(const VehicleState& s) {
  return {{"x", s.x}, {"y", s.y}, {"v", s.v}, {"psi", s.psi}};
}

json params_json(const VehicleParams& p) {
  return {{"l_f", p.l_f},         {"l_r", p.l_r},         {"length", p.length},
          {"width", p.width},     {"a_bound", p.a_bound}, {"delta_bound", p.delta_bound},
          {"v_min", p.v_min},     {"v_max", p.v_max}};
}

json idm_json(const IdmParams& p) {
  return {{"v0", p.v0}, {"phi0", p.phi0}, {"a_m", p.a_m},
          {"b", p.b},   {"delta", p.delta}, {"T", p.T}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

void collect(std::vector<std::string>& issues, const std::string& path,
             const std::function<void()>& check) {
  try {
    check();
  } catch (const std::exception& e) {
    issues.push_back(path + ": " + e.what());
  }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::string> ScenarioConfig::problems() const {
  std::vector<std::string> issues;
  if (schema_version != kScenarioSchemaVersion) {
    issues.push_back("schema_version: unsupported version " + std::to_string(schema_version));
  }
  if (max_steps < 1) issues.push_back("max_steps: must be >= 1");
  if (!(completion_tolerance > 0)) issues.push_back("completion_tolerance: must be positive");
  bool road_ok = true;
  collect(issues, "road", [&] {
    try {
      road.validate();
    } catch (...) {
      road_ok = false;
      throw;
    }
  });
  collect(issues, "ego.params", [&] { ego_params.validate(); });
  if (!is_finite(ego_initial)) issues.push_back("ego.state: non-finite value");
  if (road_ok && road.lane_of(ego_initial.y) != road.merge_lane) {
    issues.push_back("ego.state.y: ego must start in the merge lane");
  }
  collect(issues, "planner", [&] { planner.validate(); });
  collect(issues, "beliefs", [&] { beliefs.validate(); });
  const Eigen::Index w_dim = beliefs.mode == ResidualMode::joint ? 8 : 4;
  if (beliefs.W.rows() != w_dim || beliefs.W.cols() != w_dim) {
    issues.push_back("beliefs.W: expected " + std::to_string(w_dim) + "x" +
                     std::to_string(w_dim) + " for the chosen residual mode");
  }
  if (selection.headway < 0) issues.push_back("selection.headway: must be nonnegative");
  if (selection.max_interacting < 1) issues.push_back("selection.max_interacting: must be >= 1");
  for (const auto& [name, rec] : recordings) {
    const std::string p = "recordings." + name;
    if (rec.states.empty()) issues.push_back(p + ".states: empty recording");
    if (!(rec.dt > 0)) issues.push_back(p + ".dt: must be positive");
  }
  std::set<int> ids;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentConfig& a = agents[i];
    const std::string p = "agents[" + std::to_string(i) + "]";
    if (a.id <= 0) issues.push_back(p + ".id: must be positive (0 is the ego)");
    if (!ids.insert(a.id).second) issues.push_back(p + ".id: duplicate id " + std::to_string(a.id));
    collect(issues, p + ".params", [&] { a.spec.params.validate(); });
    collect(issues, p + ".idm", [&] { a.spec.idm.validate(); });
    collect(issues, p + ".guard", [&] { a.spec.guard.validate(); });
    if (a.spec.kind == AgentKind::replay) {
      if (!recordings.count(a.spec.recording)) {
        issues.push_back(p + ".recording: unknown recording '" + a.spec.recording + "'");
      }
    } else if (!is_finite(a.initial)) {
      issues.push_back(p + ".state: non-finite value");
    }
  }
  return issues;
}

void ScenarioConfig::validate() const {
  auto issues = problems();
  if (!issues.empty()) throw ScenarioError(std::move(issues));
}

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string("<root>: malformed JSON: ") + e.what()});
  }
  std::vector<std::string> issues;
  ScenarioConfig cfg;
  ObjectReader r(j, "", issues);
  if (!r.has("schema_version")) r.issue("schema_version", "required");
  r.integer("schema_version", cfg.schema_version);
  r.string("name", cfg.name);
  r.integer("seed", cfg.seed);
  r.integer("max_steps", cfg.max_steps);
  r.boolean("ego_signals_merge", cfg.ego_signals_merge);
  r.boolean("log_timing", cfg.log_timing);
  r.number("completion_tolerance", cfg.completion_tolerance);
  if (r.child("road")) read_road(r.raw("road"), "road", cfg.road, issues);
  if (r.child("ego")) {
    ObjectReader e(r.raw("ego"), "ego", issues);
    if (!e.has("state")) e.issue("ego.state", "required");
    if (e.child("state")) read_state(e.raw("state"), "ego.state", cfg.ego_initial, issues);
    if (e.child("params")) read_params(e.raw("params"), "ego.params", cfg.ego_params, issues);
    e.reject_unknown();
  } else {
    r.issue("ego", "required");
  }
  if (r.child("planner")) read_planner(r.raw("planner"), "planner", cfg.planner, issues);
  if (r.child("beliefs")) read_beliefs(r.raw("beliefs"), "beliefs", cfg.beliefs, issues);
  if (r.child("selection")) {
    ObjectReader s(r.raw("selection"), "selection", issues);
    s.choice("mode", cfg.selection.mode,
             {{"fixed", SelectionMode::fixed}, {"selection_box", SelectionMode::selection_box}});
    s.number("headway", cfg.selection.headway);
    s.integer("max_interacting", cfg.selection.max_interacting);
    s.reject_unknown();
  }
  if (r.child("recordings")) {
    const json& recs = r.raw("recordings");
    if (!recs.is_object()) {
      r.issue("recordings", "expected an object keyed by recording name");
    } else {
      for (const auto& [name, rec] : recs.items()) {
        read_recording(rec, "recordings." + name, cfg.recordings[name], issues);
      }
    }
  }
  if (r.child("agents")) {
    const json& agents = r.raw("agents");
    if (!agents.is_array()) {
      r.issue("agents", "expected an array");
    } else {
      for (std::size_t i = 0; i < agents.size(); ++i) {
        AgentConfig a;
        read_agent(agents[i], "agents[" + std::to_string(i) + "]", a, issues);
        cfg.agents.push_back(std::move(a));
      }
    }
  }
  r.reject_unknown();
  if (issues.empty()) issues = cfg.problems();
  if (!issues.empty()) throw ScenarioError(std::move(issues));
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ScenarioError& e) {
    std::vector<std::string> issues;
    for (const auto& i : e.issues()) issues.push_back(path.string() + ": " + i);
    throw ScenarioError(std::move(issues));
  }
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["max_steps"] = cfg.max_steps;
  j["ego_signals_merge"] = cfg.ego_signals_merge;
  j["log_timing"] = cfg.log_timing;
  j["completion_tolerance"] = cfg.completion_tolerance;
  const RoadGeometry& road = cfg.road;
  j["road"] = {{"lane_centers", road.lane_centers}, {"lane_width", road.lane_width},
               {"y_min", road.y_min},               {"y_max", road.y_max},
               {"merge_lane_end_x", road.merge_lane_end_x},
               {"merge_lane", road.merge_lane},     {"target_lane", road.target_lane}};
  j["ego"] = {{"state", state_json(cfg.ego_initial)}, {"params", params_json(cfg.ego_params)}};
  const PlannerConfig& p = cfg.planner;
  j["planner"] = {{"horizon", p.horizon},
                  {"dt", p.integration.dt},
                  {"substeps", p.integration.substeps},
                  {"discount", p.discount},
                  {"epsilon", p.epsilon},
                  {"accel_levels", p.accel_levels},
                  {"lane_change_duration", p.lane_change_duration},
                  {"comfort_time_gap", p.reward.comfort_time_gap},
                  {"box_margin", p.reward.box_margin},
                  {"weights",
                   {{"w1", p.weights.w1}, {"w2", p.weights.w2}, {"w3", p.weights.w3},
                    {"w4", p.weights.w4}, {"w5", p.weights.w5}}}};
  const BeliefConfig& b = cfg.beliefs;
  j["beliefs"] = {{"W", matrix_json(b.W)},
                  {"transition", matrix_json(b.transition)},
                  {"p0_leader", b.p0.p_leader},
                  {"floor", b.floor},
                  {"residual", b.mode == ResidualMode::joint ? "joint" : "interacting"}};
  j["selection"] = {
      {"mode", cfg.selection.mode == SelectionMode::fixed ? "fixed" : "selection_box"},
      {"headway", cfg.selection.headway},
      {"max_interacting", cfg.selection.max_interacting}};
  json recs = json::object();
  for (const auto& [name, rec] : cfg.recordings) {
    json states = json::array();
    for (const auto& s : rec.states) states.push_back({s.x, s.y, s.v, s.psi});
    recs[name] = {{"t0", rec.t0}, {"dt", rec.dt}, {"states", states}};
  }
  j["recordings"] = recs;
  json agents = json::array();
  for (const auto& a : cfg.agents) {
    json aj = {{"id", a.id},
               {"kind", to_string(a.spec.kind)},
               {"role", to_string(a.spec.role)},
               {"target", to_string(a.spec.target)},
               {"interacting", a.interacting},
               {"noise", a.noise},
               {"front_guard", a.spec.front_guard},
               {"state", state_json(a.initial)},
               {"params", params_json(a.spec.params)},
               {"idm", idm_json(a.spec.idm)},
               {"guard", idm_json(a.spec.guard)}};
    if (!a.spec.recording.empty()) aj["recording"] = a.spec.recording;
    agents.push_back(aj);
  }
  j["agents"] = agents;
  return j.dump(2);
}

}  // namespace lfgc
