#include "lfgc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lfgc/savitzky_golay.hpp"
#include "lfgc/selection.hpp"

namespace lfgc {

using nlohmann::json;

namespace {

std::string join(const std::string& head, const std::vector<std::string>& lines) {
  std::string out = head;
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  in >> out;
  return in && in.peek() == std::char_traits<char>::eof() && std::isfinite(out);
}

struct Row {
  std::size_t row = 0;  // 1-based line number in the file
  long long frame = 0;
  TrackFrame f;
  double length = 0.0;
  double width = 0.0;
};

}  // namespace

DatasetError::DatasetError(std::vector<std::string> diagnostics)
    : std::runtime_error(join("dataset error", diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

SchemaMap parse_schema_map(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DatasetError({std::string("schema map: malformed JSON: ") + e.what()});
  }
  if (!j.is_object()) throw DatasetError({"schema map: expected an object"});
  SchemaMap m;
  std::vector<std::string> issues;
  const std::map<std::string, std::string*> columns = {
      {"vehicle_id", &m.vehicle_id}, {"frame_id", &m.frame_id}, {"time", &m.time},
      {"local_x", &m.local_x},       {"local_y", &m.local_y},   {"velocity", &m.velocity},
      {"length", &m.length},         {"width", &m.width},       {"lane_id", &m.lane_id}};
  const std::map<std::string, double*> numbers = {{"time_scale", &m.time_scale},
                                                  {"frame_period", &m.frame_period},
                                                  {"lateral_origin", &m.lateral_origin},
                                                  {"lateral_sign", &m.lateral_sign}};
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "columns") {
        for (const auto& [col, name] : value.items()) {
          const auto it = columns.find(col);
          if (it == columns.end()) {
            issues.push_back("columns." + col + ": unknown column role");
          } else {
            *it->second = name.get<std::string>();
          }
        }
      } else if (key == "units") {
        const std::string u = value.get<std::string>();
        if (u == "feet") {
          m.units = LengthUnit::feet;
        } else if (u == "meters") {
          m.units = LengthUnit::meters;
        } else {
          issues.push_back("units: expected \"feet\" or \"meters\", got \"" + u + "\"");
        }
      } else if (numbers.count(key)) {
        *numbers.at(key) = value.get<double>();
      } else if (key == "ramp_lane_ids") {
        m.ramp_lane_ids = value.get<std::vector<int>>();
      } else if (key == "target_lane_id") {
        m.target_lane_id = value.get<int>();
      } else if (key == "lane_centers") {
        m.road.lane_centers = value.get<std::vector<double>>();
      } else if (key == "lane_width") {
        m.road.lane_width = value.get<double>();
      } else if (key == "y_min") {
        m.road.y_min = value.get<double>();
      } else if (key == "y_max") {
        m.road.y_max = value.get<double>();
      } else if (key == "merge_lane_end_x") {
        m.road.merge_lane_end_x = value.get<double>();
      } else {
        issues.push_back(key + ": unknown field");
      }
    } catch (const json::exception& e) {
      issues.push_back(key + ": " + e.what());
    }
  }
  if (!(m.time_scale > 0)) issues.push_back("time_scale: must be positive");
  if (!(m.frame_period > 0)) issues.push_back("frame_period: must be positive");
  if (m.lateral_sign != 1.0 && m.lateral_sign != -1.0) {
    issues.push_back("lateral_sign: must be 1 or -1");
  }
  try {
    m.road.validate();
  } catch (const std::exception& e) {
    issues.push_back(std::string("road: ") + e.what());
  }
  if (!issues.empty()) throw DatasetError(issues);
  return m;
}

SchemaMap load_schema_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError({"cannot open schema map " + path.string()});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema_map(buf.str());
}

LoadResult read_dataset(std::istream& in, const SchemaMap& schema) {
  LoadResult result;
  std::string line;
  if (!std::getline(in, line)) {
    result.diagnostics.push_back("warning: empty file, no tracks");
    return result;
  }
  const std::vector<std::string> header = split_csv(line);
  const std::vector<std::string> wanted = {schema.vehicle_id, schema.frame_id, schema.time,
                                           schema.local_x,    schema.local_y,  schema.velocity,
                                           schema.length,     schema.width,    schema.lane_id};
  std::vector<std::size_t> col;
  std::vector<std::string> missing;
  for (const auto& name : wanted) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      missing.push_back("row 1: missing column '" + name + "'");
    } else {
      col.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  if (!missing.empty()) throw DatasetError(missing);

  const double lf = schema.length_factor();
  std::map<int, std::vector<Row>> by_vehicle;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    double vals[9];
    bool ok = true;
    for (std::size_t k = 0; k < col.size(); ++k) {
      if (col[k] >= cells.size() || !parse_double(cells[col[k]], vals[k])) {
        result.diagnostics.push_back("row " + std::to_string(row_no) + ": bad or missing value in '" +
                                     wanted[k] + "'");
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    Row r;
    r.row = row_no;
    r.frame = static_cast<long long>(std::llround(vals[1]));
    r.f.time = vals[2] * schema.time_scale;
    r.f.y = schema.lateral_sign * (vals[3] - schema.lateral_origin) * lf;
    r.f.x = vals[4] * lf;
    r.f.v = vals[5] * lf;
    r.length = vals[6] * lf;
    r.width = vals[7] * lf;
    r.f.lane_id = static_cast<int>(std::lround(vals[8]));
    by_vehicle[static_cast<int>(std::lround(vals[0]))].push_back(r);
  }

  for (auto& [id, rows] : by_vehicle) {
    RecordedTrack track;
    track.id = id;
    track.length = rows.front().length;
    track.width = rows.front().width;
    for (const Row& r : rows) {
      if (!track.frames.empty()) {
        const double dt = r.f.time - track.frames.back().time;
        if (dt <= 0) {
          result.diagnostics.push_back("row " + std::to_string(r.row) + ": vehicle " +
                                       std::to_string(id) + " timestamp not increasing, row dropped");
          continue;
        }
        if (std::abs(dt - schema.frame_period) > 1e-3 * schema.frame_period) {
          result.diagnostics.push_back("row " + std::to_string(r.row) + ": vehicle " +
                                       std::to_string(id) + " frame gap of " + std::to_string(dt) +
                                       " s, track cut here");
          break;
        }
      }
      track.frames.push_back(r.f);
    }
    result.tracks.push_back(std::move(track));
  }
  return result;
}

LoadResult load_dataset(const std::filesystem::path& path, const SchemaMap& schema) {
  std::ifstream in(path);
  if (!in) throw DatasetError({"cannot open dataset " + path.string()});
  return read_dataset(in, schema);
}

void write_dataset(std::ostream& out, const std::vector<RecordedTrack>& tracks,
                   const SchemaMap& schema) {
  const double lf = schema.length_factor();
  out << schema.vehicle_id << ',' << schema.frame_id << ',' << schema.time << ','
      << schema.local_x << ',' << schema.local_y << ',' << schema.velocity << ','
      << schema.length << ',' << schema.width << ',' << schema.lane_id << '\n';
  out << std::setprecision(17);
  for (const auto& t : tracks) {
    for (const auto& f : t.frames) {
      const long long frame = std::llround(f.time / schema.frame_period);
      out << t.id << ',' << frame << ',' << f.time / schema.time_scale << ','
          << f.y / (schema.lateral_sign * lf) + schema.lateral_origin << ',' << f.x / lf << ','
          << f.v / lf << ',' << t.length / lf << ',' << t.width / lf << ',' << f.lane_id << '\n';
    }
  }
}

RecordedTrack smooth_track(const RecordedTrack& track, int window, int polyorder) {
  RecordedTrack out = track;
  if (window < 1 || window % 2 == 0 || polyorder >= window || polyorder < 1) {
    throw std::invalid_argument("smooth_track: window must be odd and exceed polyorder >= 1");
  }
  if (track.frames.size() < static_cast<std::size_t>(window)) {
    out.smoothing_skipped = true;
    return out;
  }
  std::vector<double> x, y;
  for (const auto& f : track.frames) {
    x.push_back(f.x);
    y.push_back(f.y);
  }
  const double dt = track.frames.size() > 1 ? track.frames[1].time - track.frames[0].time : 1.0;
  const auto xs = savgol_filter(x, window, polyorder);
  const auto ys = savgol_filter(y, window, polyorder);
  const auto xd = savgol_filter(x, window, polyorder, 1, dt);
  const auto yd = savgol_filter(y, window, polyorder, 1, dt);
  for (std::size_t i = 0; i < out.frames.size(); ++i) {
    out.frames[i].x = xs[i];
    out.frames[i].y = ys[i];
    out.frames[i].v = std::hypot(xd[i], yd[i]);
    out.frames[i].psi = std::atan2(yd[i], xd[i]);
  }
  out.smoothed = true;
  return out;
}

namespace {

VehicleState frame_state(const TrackFrame& f) { return {f.x, f.y, f.v, f.psi}; }

// Index of the frame at time t, or -1 when t is outside the track.
long frame_at(const RecordedTrack& t, double t_query, double period) {
  if (t.frames.empty()) return -1;
  const double u = (t_query - t.frames.front().time) / period;
  const long k = std::lround(u);
  if (k < 0 || k >= static_cast<long>(t.frames.size()) || std::abs(u - k) > 1e-6) return -1;
  return k;
}

}  // namespace

ExtractResult extract_merge_cases(const std::vector<RecordedTrack>& tracks,
                                  const SchemaMap& schema, const CaseOptions& options) {
  ExtractResult result;
  const std::set<int> ramps(schema.ramp_lane_ids.begin(), schema.ramp_lane_ids.end());
  std::vector<const RecordedTrack*> sorted;
  for (const auto& t : tracks) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const RecordedTrack* a, const RecordedTrack* b) { return a->id < b->id; });

  for (const RecordedTrack* ego : sorted) {
    if (ego->frames.empty()) continue;
    const bool bad_lane = std::any_of(ego->frames.begin(), ego->frames.end(),
                                      [](const TrackFrame& f) { return f.lane_id <= 0; });
    if (bad_lane) {
      result.diagnostics.push_back("vehicle " + std::to_string(ego->id) +
                                   ": missing lane ids, skipped");
      continue;
    }
    if (!ramps.count(ego->frames.front().lane_id)) continue;
    const auto reach = std::find_if(ego->frames.begin(), ego->frames.end(), [&](const TrackFrame& f) {
      return f.lane_id == schema.target_lane_id;
    });
    if (reach == ego->frames.end()) continue;

    MergeCase mc;
    mc.ego_id = ego->id;
    mc.start_time = ego->frames.front().time;
    mc.end_time = ego->frames.back().time;

    ScenarioConfig& cfg = mc.config;
    cfg.name = "case_" + std::to_string(ego->id);
    cfg.seed = options.seed;
    cfg.road = schema.road;
    cfg.planner = options.planner;
    cfg.beliefs = options.beliefs;
    cfg.selection.mode = SelectionMode::selection_box;
    cfg.ego_initial = frame_state(ego->frames.front());
    cfg.ego_initial.psi = 0.0;
    cfg.ego_params.length = ego->length;
    cfg.ego_params.width = ego->width;
    const double dt = cfg.planner.integration.dt;
    cfg.max_steps =
        static_cast<int>(std::ceil((mc.end_time - mc.start_time) / dt - 1e-9)) + options.extra_steps;

    for (const RecordedTrack* other : sorted) {
      if (other == ego || other->frames.empty()) continue;
      if (other->frames.back().time < mc.start_time) continue;
      if (other->frames.front().time > mc.end_time) continue;
      bool near = false;
      for (const auto& f : ego->frames) {
        const long k = frame_at(*other, f.time, schema.frame_period);
        if (k >= 0 && std::abs(other->frames[static_cast<std::size_t>(k)].x - f.x) <= options.neighborhood) {
          near = true;
          break;
        }
      }
      if (!near) continue;
      const std::string name = "track_" + std::to_string(other->id);
      Recording rec;
      rec.t0 = other->frames.front().time - mc.start_time;
      rec.dt = schema.frame_period;
      for (const auto& f : other->frames) rec.states.push_back(frame_state(f));
      cfg.recordings[name] = std::move(rec);
      AgentConfig a;
      a.id = other->id;
      a.spec.kind = AgentKind::replay;
      a.spec.recording = name;
      a.spec.params.length = other->length;
      a.spec.params.width = other->width;
      a.spec.params.v_max = std::max(a.spec.params.v_max, 60.0);
      a.initial = cfg.recordings[name].state_at(0.0);
      cfg.agents.push_back(std::move(a));
    }

    std::vector<CandidateVehicle> at_start;
    for (const auto& a : cfg.agents) {
      const Recording& r = cfg.recordings.at(a.spec.recording);
      if (r.active_at(0.0) && r.t_end() >= 0.0) at_start.push_back({a.id, r.state_at(0.0)});
    }
    mc.interacting_ids = select_interacting(cfg.ego_initial, at_start, cfg.road,
                                            cfg.selection.headway, cfg.selection.max_interacting);
    for (const auto& a : cfg.agents) {
      if (std::find(mc.interacting_ids.begin(), mc.interacting_ids.end(), a.id) ==
          mc.interacting_ids.end()) {
        mc.environment_ids.push_back(a.id);
      }
    }
    const auto issues = cfg.problems();
    if (!issues.empty()) {
      result.diagnostics.push_back("vehicle " + std::to_string(ego->id) + ": " + issues.front() +
                                   ", case skipped");
      continue;
    }
    result.cases.push_back(std::move(mc));
  }
  return result;
}

}  // namespace lfgc
