#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lfgc/dataset.hpp"
#include "lfgc/sim.hpp"

namespace fs = std::filesystem;
using namespace lfgc;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<int> horizon;
  std::optional<double> dt;
  bool no_timing = false;

  void apply(ScenarioConfig& cfg, std::size_t index) const {
    if (seed) cfg.seed = *seed + index;
    if (epsilon) cfg.planner.epsilon = *epsilon;
    if (horizon) cfg.planner.horizon = *horizon;
    if (dt) cfg.planner.integration.dt = *dt;
    if (no_timing) cfg.log_timing = false;
  }
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out || !(out << text)) throw IoError("cannot write " + p.string());
}

std::string safe_name(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s.empty() ? "episode" : s;
}

// Directories contribute their *.json files, *.json paths are scenarios, and
// any other file lists one scenario path per line.
std::vector<fs::path> expand_scenarios(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (p.extension() == ".json") {
      out.push_back(p);
    } else {
      std::istringstream lines(read_file(p));
      std::string line;
      while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#') continue;
        fs::path entry(line);
        out.push_back(entry.is_relative() ? p.parent_path() / entry : entry);
      }
    }
  }
  return out;
}

int run_batch(std::vector<ScenarioConfig> cfgs, const fs::path& out_dir, unsigned workers,
              const std::string& label) {
  fs::create_directories(out_dir);
  const BatchSummary summary =
      batch_run(cfgs, workers, [&](std::size_t i, const EpisodeResult& r) {
        write_file(out_dir / (safe_name(cfgs[i].name) + ".jsonl"), r.log.to_jsonl());
        std::cout << cfgs[i].name << ": " << to_string(r.outcome.cls) << " (" << r.outcome.detail
                  << ")\n";
      });
  for (const auto& e : summary.episodes) {
    if (!e.outcome) std::cerr << e.name << ": error: " << e.error << "\n";
  }
  const std::string table = format_summary_table(summary, label);
  write_file(out_dir / "summary.txt", table);
  write_file(out_dir / "summary.json", summary_to_json(summary, label));
  std::cout << "\n" << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-follower game controller for highway forced merges"};
  app.require_subcommand(1);

  Overrides ov;
  std::string out_dir = "out";
  unsigned workers = 0;
  app.add_option("--seed", ov.seed, "Override the scenario seed (batch: seed + index)");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--epsilon", ov.epsilon, "Override the chance-constraint epsilon");
  app.add_option("--horizon", ov.horizon, "Override the planning horizon (steps)");
  app.add_option("--dt", ov.dt, "Override the sampling period (s)");
  app.add_option("--workers", workers, "Concurrent episodes (0 = hardware threads)");
  app.add_flag("--no-timing", ov.no_timing, "Omit planning times from the event logs");

  auto* run = app.add_subcommand("run", "Run one scenario");
  std::string scenario_path;
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  auto* batch = app.add_subcommand("batch", "Run scenarios from directories or list files");
  std::vector<std::string> batch_inputs;
  std::string label = "LFGC";
  batch->add_option("inputs", batch_inputs, "Directories, scenario files or list files")->required();
  batch->add_option("--label", label, "Column label of the summary table");

  auto* replay = app.add_subcommand("replay", "Replay merge cases found in a trajectory CSV");
  std::string dataset_path, schema_path;
  int window = 21;
  std::size_t limit = 0;
  replay->add_option("dataset", dataset_path, "Trajectory CSV")->required();
  replay->add_option("--schema", schema_path, "Schema map JSON");
  replay->add_option("--window", window, "Savitzky-Golay window length")->capture_default_str();
  replay->add_option("--limit", limit, "Replay at most this many cases (0 = all)");

  auto* report = app.add_subcommand("report", "Classify stored event logs and summarize them");
  std::vector<std::string> log_paths;
  report->add_option("logs", log_paths, "JSONL event logs")->required();
  report->add_option("--label", label, "Column label of the summary table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ScenarioConfig cfg = load_scenario(scenario_path);
      ov.apply(cfg, 0);
      const EpisodeResult r = run_scenario(cfg);
      const fs::path log_path = fs::path(out_dir) / (safe_name(cfg.name) + ".jsonl");
      write_file(log_path, r.log.to_jsonl());
      std::cout << cfg.name << ": " << to_string(r.outcome.cls) << " (" << r.outcome.detail << ")";
      if (r.outcome.cls == OutcomeClass::success) {
        std::cout << " ahead=" << (r.outcome.ahead_id ? std::to_string(*r.outcome.ahead_id) : "none")
                  << " behind="
                  << (r.outcome.behind_id ? std::to_string(*r.outcome.behind_id) : "none");
      }
      std::cout << "\nlog: " << log_path.string() << "\n";
      return 0;
    }
    if (*batch) {
      std::vector<ScenarioConfig> cfgs;
      std::vector<std::string> issues;
      const auto paths = expand_scenarios(batch_inputs);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        try {
          cfgs.push_back(load_scenario(paths[i]));
          ov.apply(cfgs.back(), i);
        } catch (const ScenarioError& e) {
          issues.insert(issues.end(), e.issues().begin(), e.issues().end());
        }
      }
      if (!issues.empty()) throw ScenarioError(issues);
      if (cfgs.empty()) throw IoError("batch: no scenarios found");
      return run_batch(std::move(cfgs), out_dir, workers, label);
    }
    if (*replay) {
      const SchemaMap schema = schema_path.empty() ? SchemaMap{} : load_schema_map(schema_path);
      LoadResult loaded = load_dataset(dataset_path, schema);
      for (const auto& d : loaded.diagnostics) std::cerr << dataset_path << ": " << d << "\n";
      std::vector<RecordedTrack> tracks;
      for (const auto& t : loaded.tracks) tracks.push_back(smooth_track(t, window));
      CaseOptions opts;
      if (ov.seed) opts.seed = *ov.seed;
      ExtractResult cases = extract_merge_cases(tracks, schema, opts);
      for (const auto& d : cases.diagnostics) std::cerr << dataset_path << ": " << d << "\n";
      std::cout << "found " << cases.cases.size() << " merge cases\n";
      if (cases.cases.empty()) return 0;
      std::vector<ScenarioConfig> cfgs;
      for (std::size_t i = 0; i < cases.cases.size() && (limit == 0 || i < limit); ++i) {
        cfgs.push_back(cases.cases[i].config);
        ov.apply(cfgs.back(), i);
      }
      return run_batch(std::move(cfgs), out_dir, workers, "LFGC");
    }
    if (*report) {
      BatchSummary summary;
      for (const auto& p : log_paths) {
        const EventLog log = EventLog::from_jsonl(read_file(p));
        EpisodeResult r{classify_outcome(log, log.header.road), log};
        add_episode(summary, summarize_episode(log.header.scenario, r));
        if (log.live_outcome && log.live_outcome->cls != r.outcome.cls) {
          std::cerr << p << ": warning: stored outcome " << to_string(log.live_outcome->cls)
                    << " differs from re-classification " << to_string(r.outcome.cls) << "\n";
        }
      }
      const std::string table = format_summary_table(summary, label);
      std::cout << table;
      if (app.get_option("--out")->count() > 0) {
        write_file(fs::path(out_dir) / "summary.txt", table);
        write_file(fs::path(out_dir) / "summary.json", summary_to_json(summary, label));
      }
      return 0;
    }
  } catch (const ScenarioError& e) {
    for (const auto& i : e.issues()) std::cerr << "error: " << i << "\n";
    return 3;
  } catch (const DatasetError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "error: " << d << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
