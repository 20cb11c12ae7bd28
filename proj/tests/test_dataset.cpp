#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "lfgc/dataset.hpp"
#include "lfgc/savitzky_golay.hpp"
#include "lfgc/selection.hpp"

using namespace lfgc;

namespace {

const std::string kFixture = std::string(LFGC_TEST_DATA) + "/two_vehicles.csv";

// Least-squares polynomial through the window by the normal equations,
// evaluated (or differentiated once) at the center.
double lsq_center(const std::vector<double>& y, std::size_t center, int half, int order,
                  int deriv) {
  const int n = 2 * half + 1;
  Eigen::MatrixXd V(n, order + 1);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k <= order; ++k) V(i, k) = std::pow(i - half, k);
    b(i) = y[center - half + i];
  }
  const Eigen::VectorXd c = (V.transpose() * V).ldlt().solve(V.transpose() * b);
  return deriv == 0 ? c(0) : c(1);
}

double variance(const std::vector<double>& v) {
  double m = 0, s = 0;
  for (double x : v) m += x;
  m /= v.size();
  for (double x : v) s += (x - m) * (x - m);
  return s / v.size();
}

RecordedTrack straight_track(int id, int lane, double x0, double y, double v, int frames) {
  RecordedTrack t;
  t.id = id;
  for (int k = 0; k < frames; ++k) t.frames.push_back({0.1 * k, x0 + v * 0.1 * k, y, v, 0, lane});
  return t;
}

}  // namespace

TEST(SavitzkyGolay, CoefficientsMatchLeastSquares) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> y(41);
  for (auto& v : y) v = n(rng);
  for (int deriv : {0, 1}) {
    const Eigen::VectorXd c = savgol_coefficients(21, 3, deriv);
    double dot = 0;
    for (int i = 0; i < 21; ++i) dot += c(i) * y[10 + i];
    EXPECT_NEAR(dot, lsq_center(y, 20, 10, 3, deriv), 1e-10);
  }
}

TEST(SavitzkyGolay, CubicReproducedExactly) {
  std::vector<double> y;
  for (int i = 0; i < 60; ++i) {
    const double t = 0.1 * i;
    y.push_back(2.0 - 1.5 * t + 0.7 * t * t - 0.05 * t * t * t);
  }
  const auto s = savgol_filter(y, 21, 3);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(s[i], y[i], 1e-9) << i;
  const auto d = savgol_filter(y, 21, 3, 1, 0.1);
  for (std::size_t i = 10; i + 10 < y.size(); ++i) {
    const double t = 0.1 * i;
    EXPECT_NEAR(d[i], -1.5 + 1.4 * t - 0.15 * t * t, 1e-9);
  }
}

TEST(SavitzkyGolay, NoisyLineLosesVariance) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0, 0.3);
  std::vector<double> y, noise_in, noise_out;
  for (int i = 0; i < 200; ++i) y.push_back(0.5 * i + n(rng));
  const auto s = savgol_filter(y, 21, 3);
  for (std::size_t i = 10; i + 10 < y.size(); ++i) {
    noise_in.push_back(y[i] - 0.5 * i);
    noise_out.push_back(s[i] - 0.5 * i);
    EXPECT_NEAR(s[i], lsq_center(y, i, 10, 3, 0), 1e-9);
  }
  EXPECT_LT(variance(noise_out), variance(noise_in));
}

TEST(SavitzkyGolay, RejectsBadWindow) {
  std::vector<double> y(30, 1.0);
  EXPECT_THROW(savgol_filter(y, 20, 3), std::invalid_argument);
  EXPECT_THROW(savgol_filter(y, 3, 3), std::invalid_argument);
}

TEST(Dataset, FeetToMeters) {
  EXPECT_DOUBLE_EQ(10 * kFeetToMeters, 3.048);
  std::istringstream in(
      "Vehicle_ID,Frame_ID,Global_Time,Local_X,Local_Y,v_Vel,v_Length,v_Width,Lane_ID\n"
      "1,1,0,66,10,10,16,6,6\n");
  const LoadResult r = read_dataset(in, SchemaMap{});
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_DOUBLE_EQ(r.tracks[0].frames[0].x, 3.048);
  EXPECT_DOUBLE_EQ(r.tracks[0].frames[0].v, 3.048);
  EXPECT_DOUBLE_EQ(r.tracks[0].frames[0].y, 0.0);
}

TEST(Dataset, EmptyFileWarns) {
  std::istringstream in("");
  const LoadResult r = read_dataset(in, SchemaMap{});
  EXPECT_TRUE(r.tracks.empty());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_NE(r.diagnostics[0].find("warning"), std::string::npos);
}

TEST(Dataset, MissingColumnThrows) {
  std::istringstream in("Vehicle_ID,Frame_ID\n1,1\n");
  try {
    read_dataset(in, SchemaMap{});
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(e.diagnostics().front().find("row 1: missing column"), std::string::npos);
  }
}

TEST(Dataset, BadRowsDiagnosedByRow) {
  std::istringstream in(
      "Vehicle_ID,Frame_ID,Global_Time,Local_X,Local_Y,v_Vel,v_Length,v_Width,Lane_ID\n"
      "1,1,0,66,10,10,16,6,6\n"
      "1,2,100,66,x,10,16,6,6\n"
      "1,2,100,66,11,10,16,6,6\n"
      "1,3,100,66,12,10,16,6,6\n"
      "1,5,300,66,13,10,16,6,6\n");
  const LoadResult r = read_dataset(in, SchemaMap{});
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_EQ(r.tracks[0].frames.size(), 2u);
  ASSERT_EQ(r.diagnostics.size(), 3u);
  EXPECT_EQ(r.diagnostics[0].rfind("row 3:", 0), 0u);
  EXPECT_EQ(r.diagnostics[1].rfind("row 5:", 0), 0u);
  EXPECT_EQ(r.diagnostics[2].rfind("row 6:", 0), 0u);
}

TEST(Dataset, FixtureTracks) {
  const LoadResult r = load_dataset(kFixture);
  EXPECT_TRUE(r.diagnostics.empty());
  ASSERT_EQ(r.tracks.size(), 2u);
  EXPECT_EQ(r.tracks[0].id, 1);
  EXPECT_EQ(r.tracks[0].frames.size(), 80u);
  EXPECT_EQ(r.tracks[1].frames.size(), 80u);
  EXPECT_NEAR(r.tracks[0].frames[1].time - r.tracks[0].frames[0].time, 0.1, 1e-6);
  EXPECT_DOUBLE_EQ(r.tracks[1].length, 16.0 * kFeetToMeters);
  EXPECT_NEAR(r.tracks[1].frames[0].y, 12.0 * kFeetToMeters, 1e-12);
}

TEST(Dataset, SmoothKeepsLengthAndTimes) {
  const LoadResult r = load_dataset(kFixture);
  for (const auto& t : r.tracks) {
    const RecordedTrack s = smooth_track(t);
    EXPECT_TRUE(s.smoothed);
    ASSERT_EQ(s.frames.size(), t.frames.size());
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      EXPECT_EQ(s.frames[i].time, t.frames[i].time);
      EXPECT_EQ(s.frames[i].lane_id, t.frames[i].lane_id);
    }
  }
  const RecordedTrack target = smooth_track(r.tracks[1]);
  // constant-speed straight track: speed from the smoothed derivative
  EXPECT_NEAR(target.frames[40].v, 55.0 * kFeetToMeters, 1e-4);  // csv rounding
  EXPECT_NEAR(target.frames[40].psi, 0.0, 1e-9);
  RecordedTrack shorty = r.tracks[0];
  shorty.frames.resize(10);
  EXPECT_TRUE(smooth_track(shorty).smoothing_skipped);
}

TEST(Dataset, WriteLoadRoundTrip) {
  LoadResult r = load_dataset(kFixture);
  std::vector<RecordedTrack> smoothed;
  for (const auto& t : r.tracks) smoothed.push_back(smooth_track(t));
  std::stringstream buf;
  write_dataset(buf, smoothed, SchemaMap{});
  const LoadResult back = read_dataset(buf, SchemaMap{});
  ASSERT_EQ(back.tracks.size(), smoothed.size());
  for (std::size_t k = 0; k < smoothed.size(); ++k) {
    ASSERT_EQ(back.tracks[k].frames.size(), smoothed[k].frames.size());
    for (std::size_t i = 0; i < smoothed[k].frames.size(); ++i) {
      EXPECT_NEAR(back.tracks[k].frames[i].x, smoothed[k].frames[i].x, 1e-9);
      EXPECT_NEAR(back.tracks[k].frames[i].y, smoothed[k].frames[i].y, 1e-9);
      EXPECT_NEAR(back.tracks[k].frames[i].time, smoothed[k].frames[i].time, 1e-6);
    }
  }
}

TEST(Dataset, SchemaMapRemapsColumnsAndUnits) {
  const SchemaMap m = parse_schema_map(
      R"({"columns": {"vehicle_id": "id"}, "units": "meters", "ramp_lane_ids": [7]})");
  EXPECT_EQ(m.vehicle_id, "id");
  EXPECT_EQ(m.length_factor(), 1.0);
  EXPECT_EQ(m.ramp_lane_ids, std::vector<int>{7});
  EXPECT_THROW(parse_schema_map(R"({"units": "cubits"})"), DatasetError);
  EXPECT_THROW(parse_schema_map(R"({"colour": 1})"), DatasetError);
}

TEST(Selection, BoxArithmetic) {
  const RoadGeometry road;
  const VehicleState ego{100, 0, 10, 0};
  const std::vector<CandidateVehicle> v{{1, {115, 3.6, 10, 0}}, {2, {125, 3.6, 10, 0}}};
  // front edge at 100 + 2 * 10 = 120
  EXPECT_EQ(select_interacting(ego, v, road), std::vector<int>{1});
}

TEST(Selection, EmptyTargetLane) {
  const RoadGeometry road;
  const std::vector<CandidateVehicle> v{{1, {90, 0.0, 10, 0}}};
  EXPECT_TRUE(select_interacting({100, 0, 10, 0}, v, road).empty());
}

TEST(Selection, AtMostThreeNearestFirst) {
  const RoadGeometry road;
  const std::vector<CandidateVehicle> v{
      {4, {60, 3.6, 10, 0}}, {1, {110, 3.6, 10, 0}}, {3, {80, 3.6, 10, 0}}, {2, {95, 3.6, 10, 0}}};
  const auto ids = select_interacting({100, 0, 10, 0}, v, road);
  EXPECT_EQ(ids, (std::vector<int>{1, 2, 3}));
}

TEST(Selection, OrderedBehindEdgeInTargetLane) {
  const RoadGeometry road;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(0, 200), y(-1, 5);
  for (int n = 0; n < 200; ++n) {
    std::vector<CandidateVehicle> v;
    for (int k = 0; k < 8; ++k) v.push_back({k + 1, {x(rng), y(rng), 10, 0}});
    const VehicleState ego{100, 0, 15, 0};
    const auto ids = select_interacting(ego, v, road);
    EXPECT_LE(ids.size(), 3u);
    double prev = 1e9;
    for (int id : ids) {
      const VehicleState& s = v[static_cast<std::size_t>(id - 1)].state;
      EXPECT_EQ(road.lane_of(s.y), road.target_lane);
      EXPECT_LE(s.x, ego.x + 2 * ego.v);
      EXPECT_LT(s.x, prev);
      prev = s.x;
    }
  }
}

TEST(Extract, OneScriptedMerge) {
  LoadResult r = load_dataset(kFixture);
  std::vector<RecordedTrack> tracks;
  for (const auto& t : r.tracks) tracks.push_back(smooth_track(t));
  const ExtractResult ex = extract_merge_cases(tracks, SchemaMap{});
  ASSERT_EQ(ex.cases.size(), 1u);
  const MergeCase& c = ex.cases[0];
  EXPECT_EQ(c.ego_id, 1);
  EXPECT_EQ(c.interacting_ids, std::vector<int>{2});
  EXPECT_TRUE(c.environment_ids.empty());
  EXPECT_EQ(c.config.selection.mode, SelectionMode::selection_box);
  EXPECT_NO_THROW(c.config.validate());

  // iteration order does not matter
  std::vector<RecordedTrack> reversed(tracks.rbegin(), tracks.rend());
  const ExtractResult ex2 = extract_merge_cases(reversed, SchemaMap{});
  ASSERT_EQ(ex2.cases.size(), 1u);
  EXPECT_EQ(scenario_to_json(ex2.cases[0].config), scenario_to_json(c.config));
}

TEST(Extract, NoRampActivity) {
  const std::vector<RecordedTrack> tracks{straight_track(1, 5, 0, 3.6576, 20, 50),
                                          straight_track(2, 4, 30, 7.3152, 20, 50)};
  EXPECT_TRUE(extract_merge_cases(tracks, SchemaMap{}).cases.empty());
}

TEST(Extract, MissingLaneIdsSkipped) {
  const std::vector<RecordedTrack> tracks{straight_track(1, 0, 0, 0, 20, 50)};
  const ExtractResult ex = extract_merge_cases(tracks, SchemaMap{});
  EXPECT_TRUE(ex.cases.empty());
  ASSERT_EQ(ex.diagnostics.size(), 1u);
  EXPECT_NE(ex.diagnostics[0].find("vehicle 1"), std::string::npos);
}

TEST(Extract, CaseRunsClosedLoop) {
  LoadResult r = load_dataset(kFixture);
  std::vector<RecordedTrack> tracks;
  for (const auto& t : r.tracks) tracks.push_back(smooth_track(t));
  ScenarioConfig cfg = extract_merge_cases(tracks, SchemaMap{}).cases.at(0).config;
  cfg.log_timing = false;
  const EpisodeResult res = run_scenario(cfg);
  EXPECT_EQ(res.outcome.cls, OutcomeClass::success) << res.outcome.detail;
}
