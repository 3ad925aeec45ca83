// Scenario runner, deterministic clock, cycle recorder and post-run
// analyzer. All components tick off one simulated clock in 10 ms controller
// cycles and talk over loopback UDP, so a run is reproducible bit for bit
// from its seed.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftna/control.hpp"
#include "ftna/mocks.hpp"
#include "ftna/supervisor.hpp"

namespace ftna {

inline constexpr double kCycleDt = 0.01;  // controller cycle [s]

struct Scenario {
  std::string name = "scenario";
  ScenarioSpec mock{};
  double duration = 20.0;  // [s]
  std::uint64_t seed = 1;

  double engage_time = 0.0;      // HMI ENGAGE event [s]
  double disengage_time = -1.0;  // < 0: never
  double estop_time = -1.0;      // < 0: never
  double fault_time = -1.0;          // actuator fault injection, < 0: never
  double planner_silence_time = -1.0;  // planner stops emitting, < 0: never
  double loc_silence_time = -1.0;      // localization stops emitting, < 0: never

  double init_x = 0.0;
  double init_y = 0.0;
  double init_theta = 0.0;
  std::optional<double> init_speed;  // default: profile speed (0 in reverse)

  bool expect_handover = false;
};

struct ScenarioParseError : std::runtime_error {
  ScenarioParseError(const std::string& what, int line_arg)
      : std::runtime_error(what), line(line_arg) {}
  int line = 0;
};

// Line-based "key = value" format; '#' starts a comment. Unknown keys and
// unparsable values are errors carrying the offending line number.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

// Event marker bits for LogRow::flags.
inline constexpr unsigned kEvEngage = 1u << 0;
inline constexpr unsigned kEvFault = 1u << 1;
inline constexpr unsigned kEvTrajDrop = 1u << 2;
inline constexpr unsigned kEvLocDrop = 1u << 3;
inline constexpr unsigned kEvHandover = 1u << 4;
inline constexpr unsigned kEvTrajSent = 1u << 5;
inline constexpr unsigned kEvLocSent = 1u << 6;
inline constexpr unsigned kEvHmiSent = 1u << 7;

// One control cycle, fully reconstructable from the log line.
struct LogRow {
  double t = 0.0;
  int fsm = 0;
  int mode = 0;
  unsigned flags = 0;
  int loc_ok = 0;
  int traj_ok = 0;
  double loc_x = 0.0, loc_y = 0.0, loc_theta = 0.0, loc_v = 0.0;
  double ref_x = 0.0, ref_y = 0.0, ref_theta = 0.0, ref_kappa = 0.0;
  double ref_s = 0.0, ref_v = 0.0, ref_a = 0.0;
  int ref_mode = 0;
  double e_s = 0.0, d = 0.0, e_psi = 0.0, d_dot = 0.0, e_v = 0.0;
  double raw_accel = 0.0, raw_steer = 0.0;
  double cmd_accel = 0.0, cmd_steer = 0.0, throttle = 0.0, brake = 0.0;
  int direct = 0;
  int gear = 0;
  int cmd_sent = 0;
  double truth_x = 0.0, truth_y = 0.0, truth_theta = 0.0, truth_v = 0.0;
  double truth_delta = 0.0, truth_a = 0.0;

  bool actuating() const {
    return fsm == static_cast<int>(FsmState::kEngagedTrajectory) ||
           fsm == static_cast<int>(FsmState::kEngagedPath) ||
           fsm == static_cast<int>(FsmState::kDegradedStop);
  }
};

struct RunReport {
  double rms_d = 0.0;
  double max_d = 0.0;
  double rms_e_v = 0.0;
  std::optional<double> time_to_converge;  // first sustained |d| < 0.05 m
  int handover_events = 0;
  double final_pos_error = 0.0;      // [m]
  double final_heading_error = 0.0;  // [rad]
  int traj_sent = 0, traj_dropped = 0;
  int loc_sent = 0, loc_dropped = 0;
  int cmd_sent = 0, status_sent = 0, hmi_sent = 0;

  bool operator==(const RunReport&) const = default;
};

inline constexpr double kConvergenceBand = 0.05;  // [m]

struct PortConfig {
  std::uint16_t trajectory = 41001;    // planner -> controller
  std::uint16_t localization = 41002;  // locsrc -> controller
  std::uint16_t command = 41003;       // controller -> vehicle gateway
  std::uint16_t hmi = 41004;           // harness -> controller
  std::uint16_t status = 41005;        // controller -> harness

  static PortConfig ephemeral() { return PortConfig{0, 0, 0, 0, 0}; }
};

struct RunOptions {
  PortConfig ports{};
  ControlGains gains{};
  VehicleParams params{};
  SupervisorConfig supervisor{};
  bool paced = false;  // wall-clock pacing; default as fast as possible
  std::string frames_path;  // when set, every sent frame is recorded here
};

struct RunResult {
  std::vector<LogRow> rows;
  RunReport report;
  bool invariant_violation = false;
  std::string violation;  // offending cycle and check when violated
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

// --- Log file format: one header line with the column names, then one
// comma-separated row per cycle; reals carry 17 significant digits so a
// parsed log reproduces the run bit for bit. ---

struct LogParseError : std::runtime_error {
  LogParseError(const std::string& what, int line_arg, std::size_t offset)
      : std::runtime_error(what), line(line_arg), byte_offset(offset) {}
  int line = 0;
  std::size_t byte_offset = 0;
};

void write_log(const std::vector<LogRow>& rows, const std::string& path);
std::vector<LogRow> read_log(const std::string& path);

RunReport report_from_rows(const std::vector<LogRow>& rows);
void write_report(const RunReport& report, std::ostream& out);

// Re-runs the control law open loop on recorded inputs and checks the raw
// and limited command sequence is reproduced exactly.
bool replay_commands(const std::vector<LogRow>& rows, const ControlGains& gains,
                     const VehicleParams& params, const SupervisorConfig& sup,
                     std::string* mismatch = nullptr);

// Checks the absolute/rate limiter contract over consecutive actuating rows.
bool check_command_limits(const std::vector<LogRow>& rows,
                          const VehicleParams& params, std::string* violation);

struct AnalyzeResult {
  RunReport report;
  bool replay_ok = false;
  std::vector<std::string> plot_files;
};

// Recomputes the report from the log alone; when plots_dir is non-empty,
// also emits the SVG plot set there.
AnalyzeResult analyze(const std::string& log_path, const std::string& plots_dir = "");

// --- Frame dump ("pcap-like"): "FTNADUMP" magic, then records of
// f64 time | u8 channel (MsgType) | u32 length | frame bytes. ---

struct FrameRecord {
  double t = 0.0;
  std::uint8_t channel = 0;
  std::vector<std::uint8_t> frame;
};

void write_frame_dump(const std::vector<FrameRecord>& records, const std::string& path);
std::vector<FrameRecord> read_frame_dump(const std::string& path);

}  // namespace ftna
