#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfgc/sim.hpp"

namespace lfgc {

enum class LengthUnit { feet, meters };

inline constexpr double kFeetToMeters = 0.3048;

// Column names and unit conventions of a trajectory CSV. Defaults follow the
// NGSIM US-101 release.
struct SchemaMap {
  std::string vehicle_id = "Vehicle_ID";
  std::string frame_id = "Frame_ID";
  std::string time = "Global_Time";
  std::string local_x = "Local_X";  // lateral
  std::string local_y = "Local_Y";  // along the road
  std::string velocity = "v_Vel";
  std::string length = "v_Length";
  std::string width = "v_Width";
  std::string lane_id = "Lane_ID";

  LengthUnit units = LengthUnit::feet;
  double time_scale = 0.001;    // file time units to seconds
  double frame_period = 0.1;    // s between consecutive frames

  // Road-frame lateral position y = lateral_sign * (Local_X - lateral_origin),
  // lateral_origin in file units.
  double lateral_origin = 66.0;
  double lateral_sign = -1.0;

  std::vector<int> ramp_lane_ids{6, 7};
  int target_lane_id = 5;

  // Road geometry of the replay scenarios, road frame, meters.
  RoadGeometry road{{0.0, 3.6576, 7.3152, 10.9728, 14.6304, 18.288}, 3.6576, -5.4864, 20.1168,
                    400.0, 0, 1};

  double length_factor() const { return units == LengthUnit::feet ? kFeetToMeters : 1.0; }
};

class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

// Throws DatasetError listing every unknown field or bad value.
SchemaMap parse_schema_map(const std::string& json_text);
SchemaMap load_schema_map(const std::filesystem::path& path);

struct TrackFrame {
  double time = 0.0;  // s
  double x = 0.0;     // m along the road
  double y = 0.0;     // m, road frame
  double v = 0.0;     // m/s
  double psi = 0.0;   // rad, set by smoothing
  int lane_id = 0;
};

struct RecordedTrack {
  int id = 0;
  std::vector<TrackFrame> frames;
  double length = 4.8;
  double width = 1.8;
  bool smoothed = false;
  bool smoothing_skipped = false;  // too short for the window
};

struct LoadResult {
  std::vector<RecordedTrack> tracks;  // sorted by id
  std::vector<std::string> diagnostics;
};

// Rows that cannot be used are dropped with a diagnostic naming the row; a
// track is cut at its first missing frame. Missing columns or an unreadable
// file throw DatasetError.
LoadResult read_dataset(std::istream& in, const SchemaMap& schema);
LoadResult load_dataset(const std::filesystem::path& path, const SchemaMap& schema = {});

// Writes tracks with the schema's columns and units.
void write_dataset(std::ostream& out, const std::vector<RecordedTrack>& tracks,
                   const SchemaMap& schema);

// Positions pass through a Savitzky-Golay filter; speed and heading come from
// the smoothed first derivatives.
RecordedTrack smooth_track(const RecordedTrack& track, int window = 21, int polyorder = 3);

struct MergeCase {
  int ego_id = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<int> interacting_ids;  // selected at the first frame
  std::vector<int> environment_ids;
  ScenarioConfig config;
};

struct CaseOptions {
  double neighborhood = 150.0;  // m; vehicles farther from the ego track are left out
  int extra_steps = 10;         // steps allowed beyond the recorded ego duration
  PlannerConfig planner;
  BeliefConfig beliefs;
  std::uint64_t seed = 0;
};

struct ExtractResult {
  std::vector<MergeCase> cases;  // sorted by ego id
  std::vector<std::string> diagnostics;
};

// One case per track that starts in a ramp lane and later reaches the target
// lane. The scenario replays every nearby track and re-selects the interacting
// vehicles each step.
ExtractResult extract_merge_cases(const std::vector<RecordedTrack>& tracks,
                                  const SchemaMap& schema, const CaseOptions& options = {});

}  // namespace lfgc
