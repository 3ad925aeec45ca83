// Scenario runner and analysis CLI.
//
//   ftna run <scenario-file> [--seed N] [--duration S] [--paced] [--out DIR] [--frames]
//   ftna analyze <log> [--plots DIR]
//   ftna protocol-dump <frames-file>
//
// run exits 0 iff the run finished without invariant violations and without
// an unexpected handover.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ftna/harness.hpp"
#include "ftna/wire.hpp"

namespace {

int cmd_run(const std::string& scenario_path, std::int64_t seed_override,
            double duration_override, bool paced, std::string out_dir,
            bool record_frames) {
  ftna::Scenario scenario;
  try {
    scenario = ftna::parse_scenario_file(scenario_path);
  } catch (const ftna::ScenarioParseError& e) {
    std::cerr << scenario_path << ":" << e.line << ": " << e.what() << "\n";
    return 2;
  }
  if (seed_override >= 0) {
    scenario.seed = static_cast<std::uint64_t>(seed_override);
  }
  if (duration_override > 0.0) {
    scenario.duration = duration_override;
  }
  if (out_dir.empty()) {
    out_dir = "out_" + scenario.name;
  }
  std::filesystem::create_directories(out_dir);

  ftna::RunOptions options;
  options.paced = paced;
  if (record_frames) {
    options.frames_path = (std::filesystem::path(out_dir) / "frames.bin").string();
  }

  const ftna::RunResult result = ftna::run_scenario(scenario, options);

  const std::string log_path = (std::filesystem::path(out_dir) / "log.csv").string();
  ftna::write_log(result.rows, log_path);
  {
    std::ofstream report_file(std::filesystem::path(out_dir) / "report.txt");
    ftna::write_report(result.report, report_file);
  }

  std::cout << "scenario: " << scenario.name << " (seed " << scenario.seed
            << ", " << scenario.duration << " s)\n";
  std::cout << "log: " << log_path << "\n";
  ftna::write_report(result.report, std::cout);

  if (result.invariant_violation) {
    std::cerr << "invariant violation: " << result.violation << "\n";
    return 1;
  }
  if (result.report.handover_events > 0 && !scenario.expect_handover) {
    std::cerr << "unexpected handover (" << result.report.handover_events
              << " events)\n";
    return 1;
  }
  return 0;
}

int cmd_analyze(const std::string& log_path, const std::string& plots_dir) {
  try {
    const ftna::AnalyzeResult res = ftna::analyze(log_path, plots_dir);
    ftna::write_report(res.report, std::cout);
    std::cout << "replay = " << (res.replay_ok ? "identical" : "MISMATCH") << "\n";
    for (const std::string& f : res.plot_files) {
      std::cout << "plot: " << f << "\n";
    }
    return res.replay_ok ? 0 : 1;
  } catch (const ftna::LogParseError& e) {
    std::cerr << log_path << ":" << e.line << " (byte " << e.byte_offset
              << "): " << e.what() << "\n";
    return 2;
  }
}

int cmd_protocol_dump(const std::string& path) {
  std::vector<ftna::FrameRecord> records;
  try {
    records = ftna::read_frame_dump(path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  for (const ftna::FrameRecord& rec : records) {
    std::printf("t=%.3f ch=%u len=%zu ", rec.t, rec.channel, rec.frame.size());
    const ftna::DecodeResult res = ftna::decode(rec.frame);
    if (!res.message) {
      std::printf("decode=%s\n", ftna::to_string(res.error));
      continue;
    }
    std::visit(
        [](const auto& msg) {
          using T = std::decay_t<decltype(msg)>;
          if constexpr (std::is_same_v<T, ftna::TrajectoryMsg>) {
            std::printf("trajectory seq=%u ts=%.3f gear=%d points=%zu\n", msg.seq,
                        msg.timestamp, static_cast<int>(msg.gear), msg.points.size());
          } else if constexpr (std::is_same_v<T, ftna::LocalizationMsg>) {
            std::printf("localization seq=%u ts=%.3f pos=(%.3f, %.3f) v=%.3f\n",
                        msg.seq, msg.timestamp, msg.x, msg.y, msg.v);
          } else if constexpr (std::is_same_v<T, ftna::ControlCommand>) {
            std::printf("command seq=%u ts=%.3f a=%.3f steer=%.3f mode=%u%s\n",
                        msg.seq, msg.timestamp, msg.accel_cmd, msg.steer_wheel_cmd,
                        msg.mode, msg.direct_actuation ? " direct" : "");
          } else if constexpr (std::is_same_v<T, ftna::HmiCommand>) {
            std::printf("hmi seq=%u ts=%.3f command=%u\n", msg.seq, msg.timestamp,
                        msg.command);
          } else {
            std::printf("status seq=%u ts=%.3f fsm=%u mode=%u d=%.3f\n", msg.seq,
                        msg.timestamp, msg.fsm, msg.mode, msg.d);
          }
        },
        *res.message);
  }
  std::printf("%zu frames\n", records.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory tracking control bench: scenario runner and analyzer"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::int64_t seed = -1;
  double duration = -1.0;
  bool paced = false;
  std::string out_dir;
  bool frames = false;
  CLI::App* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--duration", duration, "Override the duration [s]");
  run->add_flag("--paced", paced, "Pace cycles against the wall clock");
  run->add_option("--out", out_dir, "Output directory (default out_<name>)");
  run->add_flag("--frames", frames, "Record every sent frame to frames.bin");

  std::string log_path;
  std::string plots_dir;
  CLI::App* analyze = app.add_subcommand("analyze", "Recompute a report from a log");
  analyze->add_option("log", log_path, "Log file from a run")->required();
  analyze->add_option("--plots", plots_dir, "Also write SVG plots to this directory");

  std::string dump_path;
  CLI::App* dump = app.add_subcommand("protocol-dump", "Decode a recorded frame dump");
  dump->add_option("file", dump_path, "frames.bin from a run")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(scenario_path, seed, duration, paced, out_dir, frames);
  }
  if (analyze->parsed()) {
    return cmd_analyze(log_path, plots_dir);
  }
  return cmd_protocol_dump(dump_path);
}
