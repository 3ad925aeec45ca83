#include "ftna/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "ftna/svg_plot.hpp"
#include "ftna/wire.hpp"

namespace ftna {

namespace {

constexpr const char* kColumns[] = {
    "t", "fsm", "mode", "flags", "loc_ok", "traj_ok",
    "loc_x", "loc_y", "loc_theta", "loc_v",
    "ref_x", "ref_y", "ref_theta", "ref_kappa", "ref_s", "ref_v", "ref_a", "ref_mode",
    "e_s", "d", "e_psi", "d_dot", "e_v",
    "raw_accel", "raw_steer",
    "cmd_accel", "cmd_steer", "throttle", "brake", "direct", "gear", "cmd_sent",
    "truth_x", "truth_y", "truth_theta", "truth_v", "truth_delta", "truth_a"};
constexpr std::size_t kColumnCount = sizeof(kColumns) / sizeof(kColumns[0]);

std::string header_line() {
  std::string line;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i != 0) {
      line += ',';
    }
    line += kColumns[i];
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value, int line) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ScenarioParseError("not a number: '" + value + "'", line);
  }
  return v;
}

bool parse_bool(const std::string& value, int line) {
  if (value == "true" || value == "1") {
    return true;
  }
  if (value == "false" || value == "0") {
    return false;
  }
  throw ScenarioParseError("not a boolean: '" + value + "'", line);
}

ScenarioShape parse_shape(const std::string& value, int line) {
  if (value == "straight") return ScenarioShape::kStraight;
  if (value == "arc") return ScenarioShape::kArc;
  if (value == "lane_change") return ScenarioShape::kLaneChange;
  if (value == "stop") return ScenarioShape::kStop;
  if (value == "reverse_straight") return ScenarioShape::kReverseStraight;
  throw ScenarioParseError("unknown shape: '" + value + "'", line);
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  Scenario sc;
  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = raw_line;
    const auto comment = line.find('#');
    if (comment != std::string::npos) {
      line.resize(comment);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScenarioParseError("expected 'key = value'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) {
      throw ScenarioParseError("missing value for '" + key + "'", line_no);
    }

    if (key == "name") sc.name = value;
    else if (key == "shape") sc.mock.shape = parse_shape(value, line_no);
    else if (key == "speed") sc.mock.speed = parse_double(value, line_no);
    else if (key == "arc_radius") sc.mock.arc_radius = parse_double(value, line_no);
    else if (key == "lane_offset") sc.mock.lane_offset = parse_double(value, line_no);
    else if (key == "lane_distance") sc.mock.lane_distance = parse_double(value, line_no);
    else if (key == "profile_decel") sc.mock.profile_decel = parse_double(value, line_no);
    else if (key == "replan_period") sc.mock.replan_period = parse_double(value, line_no);
    else if (key == "forward_horizon") sc.mock.forward_horizon = parse_double(value, line_no);
    else if (key == "backward_horizon") sc.mock.backward_horizon = parse_double(value, line_no);
    else if (key == "point_spacing") sc.mock.point_spacing = parse_double(value, line_no);
    else if (key == "mode_hint") sc.mock.mode_hint = static_cast<std::uint8_t>(parse_double(value, line_no));
    else if (key == "noise_xy") sc.mock.noise_xy = parse_double(value, line_no);
    else if (key == "noise_theta") sc.mock.noise_theta = parse_double(value, line_no);
    else if (key == "loc_dropout") sc.mock.loc_dropout = parse_double(value, line_no);
    else if (key == "loc_latency") sc.mock.loc_latency = parse_double(value, line_no);
    else if (key == "traj_drop") sc.mock.traj_drop = parse_double(value, line_no);
    else if (key == "duration") sc.duration = parse_double(value, line_no);
    else if (key == "seed") sc.seed = static_cast<std::uint64_t>(parse_double(value, line_no));
    else if (key == "engage_time") sc.engage_time = parse_double(value, line_no);
    else if (key == "disengage_time") sc.disengage_time = parse_double(value, line_no);
    else if (key == "estop_time") sc.estop_time = parse_double(value, line_no);
    else if (key == "fault_time") sc.fault_time = parse_double(value, line_no);
    else if (key == "planner_silence_time") sc.planner_silence_time = parse_double(value, line_no);
    else if (key == "loc_silence_time") sc.loc_silence_time = parse_double(value, line_no);
    else if (key == "init_x") sc.init_x = parse_double(value, line_no);
    else if (key == "init_y") sc.init_y = parse_double(value, line_no);
    else if (key == "init_theta") sc.init_theta = parse_double(value, line_no);
    else if (key == "init_speed") sc.init_speed = parse_double(value, line_no);
    else if (key == "expect_handover") sc.expect_handover = parse_bool(value, line_no);
    else throw ScenarioParseError("unknown key: '" + key + "'", line_no);
  }

  if (sc.duration <= 0.0) {
    throw ScenarioParseError("duration must be positive", line_no);
  }
  if (sc.mock.loc_dropout < 0.0 || sc.mock.loc_dropout >= 1.0 ||
      sc.mock.traj_drop < 0.0 || sc.mock.traj_drop >= 1.0) {
    throw ScenarioParseError("probabilities must lie in [0, 1)", line_no);
  }
  if (sc.mock.forward_horizon <= 0.0 || sc.mock.backward_horizon <= 0.0) {
    throw ScenarioParseError("horizons must be positive", line_no);
  }
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioParseError("cannot open scenario file: " + path, 0);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario_text(buf.str());
  if (sc.name == "scenario") {
    sc.name = std::filesystem::path(path).stem().string();
  }
  return sc;
}

namespace {

LogRow make_row(double t, unsigned flags, const Supervisor::Output& out,
                const PlantState& truth) {
  LogRow row;
  row.t = t;
  row.fsm = static_cast<int>(out.state);
  row.mode = out.directive.mode;
  row.flags = flags;
  row.loc_ok = out.loc_ok ? 1 : 0;
  row.traj_ok = out.traj_ok ? 1 : 0;
  if (out.used_localization) {
    row.loc_x = out.used_localization->x;
    row.loc_y = out.used_localization->y;
    row.loc_theta = out.used_localization->theta;
    row.loc_v = out.used_localization->v;
  }
  if (out.ref) {
    row.ref_x = out.ref->x;
    row.ref_y = out.ref->y;
    row.ref_theta = out.ref->theta;
    row.ref_kappa = out.ref->kappa;
    row.ref_s = out.ref->s;
    row.ref_v = out.ref->v;
    row.ref_a = out.ref->a;
    row.ref_mode = static_cast<int>(out.ref->source_mode);
  }
  if (out.errors) {
    row.e_s = out.errors->e_s;
    row.d = out.errors->d;
    row.e_psi = out.errors->e_psi;
    row.d_dot = out.errors->d_dot;
    row.e_v = out.errors->e_v;
  }
  row.raw_accel = out.raw.accel;
  row.raw_steer = out.raw.steer_wheel;
  if (out.command) {
    row.cmd_accel = out.command->accel_cmd;
    row.cmd_steer = out.command->steer_wheel_cmd;
    row.throttle = out.command->throttle;
    row.brake = out.command->brake;
    row.direct = out.command->direct_actuation ? 1 : 0;
    row.gear = out.command->gear_cmd;
    row.cmd_sent = 1;
  }
  row.truth_x = truth.x;
  row.truth_y = truth.y;
  row.truth_theta = truth.theta;
  row.truth_v = truth.v;
  row.truth_delta = truth.delta_road;
  row.truth_a = truth.a_act;
  return row;
}

bool actuating_state(FsmState s) {
  return s == FsmState::kEngagedTrajectory || s == FsmState::kEngagedPath ||
         s == FsmState::kDegradedStop;
}

bool check_row_limits(const LogRow* prev, const LogRow& r,
                      const VehicleParams& params, std::string* what) {
  constexpr double kEps = 1e-9;
  const auto fail = [&](const char* msg) {
    if (what) {
      *what = msg;
    }
    return false;
  };
  if (!r.cmd_sent) {
    return true;
  }
  if (r.cmd_accel > params.accel_max + kEps || r.cmd_accel < params.accel_min - kEps) {
    return fail("accel_cmd outside absolute limits");
  }
  if (std::abs(r.cmd_steer) > params.steer_wheel_max + kEps) {
    return fail("steer_wheel_cmd outside absolute limits");
  }
  if (r.throttle != 0.0 && r.brake != 0.0) {
    return fail("throttle and brake both nonzero");
  }
  // After any gap the limiter restarts from a neutral command.
  const bool prev_actuating = prev != nullptr && prev->cmd_sent;
  const double prev_accel = prev_actuating ? prev->cmd_accel : 0.0;
  const double prev_steer = prev_actuating ? prev->cmd_steer : 0.0;
  if (std::abs(r.cmd_accel - prev_accel) > params.accel_rate * kCycleDt + kEps) {
    return fail("accel_cmd rate limit violated");
  }
  if (std::abs(r.cmd_steer - prev_steer) > params.steer_wheel_rate * kCycleDt + kEps) {
    return fail("steer_wheel_cmd rate limit violated");
  }
  return true;
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const RunOptions& opt) {
  std::mt19937_64 rng(sc.seed);

  UdpSocket traj_rx(opt.ports.trajectory);
  UdpSocket loc_rx(opt.ports.localization);
  UdpSocket hmi_rx(opt.ports.hmi);
  UdpSocket cmd_rx(opt.ports.command);
  UdpSocket status_rx(opt.ports.status);
  UdpSocket tx;

  MockPlanner planner(sc.mock);
  MockLocalization locsrc(sc.mock, opt.params.wheelbase);
  Supervisor supervisor(opt.supervisor, opt.gains, opt.params);

  PlantState init;
  init.x = sc.init_x;
  init.y = sc.init_y;
  init.theta = wrap_angle(sc.init_theta);
  init.gear = planner.gear();
  if (sc.init_speed) {
    init.v = *sc.init_speed;
  } else {
    init.v = planner.gear() < 0 ? 0.0 : sc.mock.speed;
  }
  VehicleSim vehicle(init, ActuatorModel{}, opt.params);

  const bool record_frames = !opt.frames_path.empty();
  std::vector<FrameRecord> frames;

  double now = 0.0;
  const auto publish = [&](UdpSocket& dst, const auto& msg, MsgType type) {
    std::vector<std::uint8_t> bytes = encode(msg);
    tx.send_to(dst.port(), bytes);
    if (record_frames) {
      frames.push_back({now, static_cast<std::uint8_t>(type), std::move(bytes)});
    }
  };

  RunResult result;
  const int cycles = static_cast<int>(std::llround(sc.duration / kCycleDt));
  const int replan_cycles =
      std::max(1, static_cast<int>(std::llround(sc.mock.replan_period / kCycleDt)));
  result.rows.reserve(static_cast<std::size_t>(cycles));

  std::uint32_t hmi_seq = 0;
  bool prev_fault = false;
  bool engage_pending = sc.engage_time >= 0.0;
  FsmState prev_state = FsmState::kInactive;
  const auto wall_start = std::chrono::steady_clock::now();

  for (int k = 0; k < cycles; ++k) {
    now = k * kCycleDt;
    unsigned flags = 0;
    const PlantState truth = vehicle.state();

    // Scripted events fire on the first cycle at or past their time.
    const auto fires = [&](double event_time) {
      return event_time >= 0.0 && event_time <= now && event_time > now - kCycleDt;
    };
    const auto send_hmi = [&](std::uint8_t command) {
      HmiCommand hmi;
      hmi.seq = ++hmi_seq;
      hmi.timestamp = now;
      hmi.command = command;
      publish(hmi_rx, hmi, MsgType::kHmiCommand);
      flags |= kEvHmiSent;
    };
    // ENGAGE is held (re-sent every cycle) until the controller leaves
    // INACTIVE, so a dropped first plan only delays the engagement.
    if (engage_pending && now >= sc.engage_time) {
      send_hmi(kHmiEngage);
    }
    if (fires(sc.disengage_time)) send_hmi(kHmiDisengage);
    if (fires(sc.estop_time)) send_hmi(kHmiEmergencyStop);

    const bool fault_active = sc.fault_time >= 0.0 && now >= sc.fault_time;
    if (fault_active && !prev_fault) {
      flags |= kEvFault;
    }
    prev_fault = fault_active;
    vehicle.set_fault(fault_active);

    if (!(sc.loc_silence_time >= 0.0 && now >= sc.loc_silence_time)) {
      if (auto loc = locsrc.tick(truth, now, rng)) {
        publish(loc_rx, *loc, MsgType::kLocalization);
        flags |= kEvLocSent;
      } else {
        flags |= kEvLocDrop;
      }
    }

    if (k % replan_cycles == 0 &&
        !(sc.planner_silence_time >= 0.0 && now >= sc.planner_silence_time)) {
      const TrajectoryMsg plan = planner.gen_trajectory(now, truth);
      bool drop = false;
      if (sc.mock.traj_drop > 0.0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        drop = u(rng) < sc.mock.traj_drop;
      }
      if (drop) {
        flags |= kEvTrajDrop;
      } else {
        publish(traj_rx, plan, MsgType::kTrajectory);
        flags |= kEvTrajSent;
      }
    }

    Supervisor::Input cin;
    cin.now = now;
    cin.trajectory = recv_latest<TrajectoryMsg>(traj_rx);
    cin.localization = recv_latest<LocalizationMsg>(loc_rx);
    cin.hmi = recv_latest<HmiCommand>(hmi_rx);
    cin.actuator_fault = fault_active;
    const Supervisor::Output out = supervisor.cycle(cin);

    if (out.command) {
      publish(cmd_rx, *out.command, MsgType::kControlCommand);
    }
    publish(status_rx, out.status, MsgType::kControllerStatus);

    if (auto cmd = recv_latest<ControlCommand>(cmd_rx)) {
      vehicle.set_command(*cmd);
    }
    vehicle.step(kCycleDt);
    (void)recv_latest<ControllerStatusMsg>(status_rx);  // drain observability channel

    if (out.state != FsmState::kInactive) {
      engage_pending = false;
    }
    if (actuating_state(out.state) && !actuating_state(prev_state)) {
      flags |= kEvEngage;
    }
    if (out.state == FsmState::kHandover && prev_state != FsmState::kHandover) {
      flags |= kEvHandover;
    }
    prev_state = out.state;

    result.rows.push_back(make_row(now, flags, out, truth));

    const std::size_t n = result.rows.size();
    std::string what;
    if (!check_row_limits(n > 1 ? &result.rows[n - 2] : nullptr, result.rows[n - 1],
                          opt.params, &what)) {
      result.invariant_violation = true;
      result.violation = "cycle " + std::to_string(k) + ": " + what;
      break;
    }
    if (!actuating_state(out.state) && out.command) {
      result.invariant_violation = true;
      result.violation =
          "cycle " + std::to_string(k) + ": command emitted outside an actuating state";
      break;
    }

    if (opt.paced) {
      std::this_thread::sleep_until(
          wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>((k + 1) * kCycleDt)));
    }
  }

  result.report = report_from_rows(result.rows);
  if (record_frames) {
    write_frame_dump(frames, opt.frames_path);
  }
  return result;
}

void write_log(const std::vector<LogRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) {
    throw std::runtime_error("cannot open log for writing: " + path);
  }
  const std::string header = header_line();
  std::fprintf(f, "%s\n", header.c_str());
  for (const LogRow& r : rows) {
    std::fprintf(f,
                 "%.17g,%d,%d,%u,%d,%d,"
                 "%.17g,%.17g,%.17g,%.17g,"
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,"
                 "%.17g,%.17g,%.17g,%.17g,%.17g,"
                 "%.17g,%.17g,"
                 "%.17g,%.17g,%.17g,%.17g,%d,%d,%d,"
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 r.t, r.fsm, r.mode, r.flags, r.loc_ok, r.traj_ok,
                 r.loc_x, r.loc_y, r.loc_theta, r.loc_v,
                 r.ref_x, r.ref_y, r.ref_theta, r.ref_kappa, r.ref_s, r.ref_v,
                 r.ref_a, r.ref_mode,
                 r.e_s, r.d, r.e_psi, r.d_dot, r.e_v,
                 r.raw_accel, r.raw_steer,
                 r.cmd_accel, r.cmd_steer, r.throttle, r.brake, r.direct, r.gear,
                 r.cmd_sent,
                 r.truth_x, r.truth_y, r.truth_theta, r.truth_v, r.truth_delta,
                 r.truth_a);
  }
  std::fclose(f);
}

namespace {

struct FieldCursor {
  const std::string& line;
  int line_no;
  std::size_t line_offset;  // byte offset of the line start in the file
  std::size_t pos = 0;

  std::string next() {
    if (pos > line.size()) {
      throw LogParseError("row has too few fields", line_no, line_offset + pos);
    }
    const auto comma = line.find(',', pos);
    const auto end = comma == std::string::npos ? line.size() : comma;
    std::string field = line.substr(pos, end - pos);
    pos = comma == std::string::npos ? line.size() + 1 : comma + 1;
    return field;
  }

  double f() {
    const std::string field = next();
    const char* begin = field.c_str();
    char* endp = nullptr;
    const double v = std::strtod(begin, &endp);
    if (endp == begin || *endp != '\0') {
      throw LogParseError("bad numeric field '" + field + "'", line_no,
                          line_offset + pos);
    }
    return v;
  }

  int i() { return static_cast<int>(f()); }
  unsigned u() { return static_cast<unsigned>(f()); }

  void done() {
    if (pos <= line.size()) {
      throw LogParseError("row has too many fields", line_no, line_offset + pos);
    }
  }
};

}  // namespace

std::vector<LogRow> read_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LogParseError("cannot open log: " + path, 0, 0);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<LogRow> rows;
  std::size_t offset = 0;
  int line_no = 0;
  bool saw_header = false;
  const std::string expected_header = header_line();

  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    const bool missing_newline = end == std::string::npos;
    if (missing_newline) {
      end = text.size();
    }
    const std::string line = text.substr(offset, end - offset);
    ++line_no;

    if (!saw_header) {
      if (line != expected_header) {
        throw LogParseError("bad header line", line_no, offset);
      }
      saw_header = true;
    } else if (!line.empty()) {
      if (missing_newline) {
        throw LogParseError("log truncated mid-row", line_no, offset);
      }
      FieldCursor c{line, line_no, offset};
      LogRow r;
      r.t = c.f();
      r.fsm = c.i();
      r.mode = c.i();
      r.flags = c.u();
      r.loc_ok = c.i();
      r.traj_ok = c.i();
      r.loc_x = c.f();
      r.loc_y = c.f();
      r.loc_theta = c.f();
      r.loc_v = c.f();
      r.ref_x = c.f();
      r.ref_y = c.f();
      r.ref_theta = c.f();
      r.ref_kappa = c.f();
      r.ref_s = c.f();
      r.ref_v = c.f();
      r.ref_a = c.f();
      r.ref_mode = c.i();
      r.e_s = c.f();
      r.d = c.f();
      r.e_psi = c.f();
      r.d_dot = c.f();
      r.e_v = c.f();
      r.raw_accel = c.f();
      r.raw_steer = c.f();
      r.cmd_accel = c.f();
      r.cmd_steer = c.f();
      r.throttle = c.f();
      r.brake = c.f();
      r.direct = c.i();
      r.gear = c.i();
      r.cmd_sent = c.i();
      r.truth_x = c.f();
      r.truth_y = c.f();
      r.truth_theta = c.f();
      r.truth_v = c.f();
      r.truth_delta = c.f();
      r.truth_a = c.f();
      c.done();
      rows.push_back(r);
    }
    offset = end + 1;
  }
  if (!saw_header) {
    throw LogParseError("empty log", 0, 0);
  }
  return rows;
}

RunReport report_from_rows(const std::vector<LogRow>& rows) {
  RunReport rep;
  double sum_d2 = 0.0;
  double sum_ev2 = 0.0;
  int n = 0;
  double last_bad_t = -std::numeric_limits<double>::infinity();
  bool any_bad = false;
  const LogRow* first_actuating = nullptr;
  const LogRow* last_actuating = nullptr;

  for (const LogRow& r : rows) {
    if (r.flags & kEvHandover) {
      ++rep.handover_events;
    }
    if (r.flags & kEvTrajSent) ++rep.traj_sent;
    if (r.flags & kEvTrajDrop) ++rep.traj_dropped;
    if (r.flags & kEvLocSent) ++rep.loc_sent;
    if (r.flags & kEvLocDrop) ++rep.loc_dropped;
    if (r.flags & kEvHmiSent) ++rep.hmi_sent;
    rep.cmd_sent += r.cmd_sent;
    ++rep.status_sent;

    if (!r.actuating() || r.ref_mode == 0) {
      continue;
    }
    if (!first_actuating) {
      first_actuating = &r;
    }
    last_actuating = &r;
    sum_d2 += r.d * r.d;
    sum_ev2 += r.e_v * r.e_v;
    rep.max_d = std::max(rep.max_d, std::abs(r.d));
    ++n;
    if (std::abs(r.d) >= kConvergenceBand) {
      last_bad_t = r.t;
      any_bad = true;
    }
  }

  if (n > 0) {
    rep.rms_d = std::sqrt(sum_d2 / n);
    rep.rms_e_v = std::sqrt(sum_ev2 / n);
  }
  if (first_actuating) {
    if (!any_bad) {
      rep.time_to_converge = first_actuating->t;
    } else {
      for (const LogRow& r : rows) {
        if (r.actuating() && r.ref_mode != 0 && r.t > last_bad_t) {
          rep.time_to_converge = r.t;
          break;
        }
      }
    }
  }
  if (last_actuating) {
    const LogRow& r = *last_actuating;
    rep.final_pos_error = std::hypot(r.truth_x - r.ref_x, r.truth_y - r.ref_y);
    rep.final_heading_error = std::abs(wrap_angle(r.truth_theta - r.ref_theta));
  }
  return rep;
}

void write_report(const RunReport& rep, std::ostream& out) {
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  out << "rms_d = " << num(rep.rms_d) << "\n";
  out << "max_d = " << num(rep.max_d) << "\n";
  out << "rms_e_v = " << num(rep.rms_e_v) << "\n";
  out << "time_to_converge = "
      << (rep.time_to_converge ? num(*rep.time_to_converge) : "none") << "\n";
  out << "handover_events = " << rep.handover_events << "\n";
  out << "final_pos_error = " << num(rep.final_pos_error) << "\n";
  out << "final_heading_error = " << num(rep.final_heading_error) << "\n";
  out << "traj_sent = " << rep.traj_sent << "\n";
  out << "traj_dropped = " << rep.traj_dropped << "\n";
  out << "loc_sent = " << rep.loc_sent << "\n";
  out << "loc_dropped = " << rep.loc_dropped << "\n";
  out << "cmd_sent = " << rep.cmd_sent << "\n";
  out << "status_sent = " << rep.status_sent << "\n";
  out << "hmi_sent = " << rep.hmi_sent << "\n";
}

bool replay_commands(const std::vector<LogRow>& rows, const ControlGains& gains,
                     const VehicleParams& params, const SupervisorConfig& sup,
                     std::string* mismatch) {
  ControlCommand prev{};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LogRow& r = rows[i];
    if (!r.actuating() || !r.cmd_sent) {
      prev = ControlCommand{};
      continue;
    }
    LocalizationMsg loc;
    loc.x = r.loc_x;
    loc.y = r.loc_y;
    loc.theta = r.loc_theta;
    loc.v = r.loc_v;
    ReferencePoint ref;
    ref.x = r.ref_x;
    ref.y = r.ref_y;
    ref.theta = r.ref_theta;
    ref.kappa = r.ref_kappa;
    ref.s = r.ref_s;
    ref.v = r.ref_v;
    ref.a = r.ref_a;
    ref.source_mode = static_cast<RefMode>(r.ref_mode);
    const std::uint8_t mode =
        r.fsm == static_cast<int>(FsmState::kEngagedTrajectory) ? kModeTrajectory
        : r.fsm == static_cast<int>(FsmState::kEngagedPath)     ? kModePath
                                                                : kModeStopRamp;
    RawCommand raw;
    const ControlCommand cmd =
        control_step(loc, ref, mode, static_cast<std::int8_t>(r.gear), gains,
                     params, prev, sup.cycle_dt, &raw);
    const bool same = raw.accel == r.raw_accel && raw.steer_wheel == r.raw_steer &&
                      cmd.accel_cmd == r.cmd_accel &&
                      cmd.steer_wheel_cmd == r.cmd_steer &&
                      cmd.throttle == r.throttle && cmd.brake == r.brake &&
                      (cmd.direct_actuation ? 1 : 0) == r.direct;
    if (!same) {
      if (mismatch) {
        *mismatch = "row " + std::to_string(i) + " (t=" + std::to_string(r.t) +
                    "): replayed command differs";
      }
      return false;
    }
    prev = cmd;
  }
  return true;
}

bool check_command_limits(const std::vector<LogRow>& rows,
                          const VehicleParams& params, std::string* violation) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string what;
    if (!check_row_limits(i > 0 ? &rows[i - 1] : nullptr, rows[i], params, &what)) {
      if (violation) {
        *violation = "row " + std::to_string(i) + ": " + what;
      }
      return false;
    }
  }
  return true;
}

AnalyzeResult analyze(const std::string& log_path, const std::string& plots_dir) {
  AnalyzeResult res;
  const std::vector<LogRow> rows = read_log(log_path);
  res.report = report_from_rows(rows);
  res.replay_ok = replay_commands(rows, ControlGains{}, VehicleParams{},
                                  SupervisorConfig{}, nullptr);

  if (!plots_dir.empty()) {
    std::filesystem::create_directories(plots_dir);
    const auto emit = [&](const std::string& file, const std::string& title,
                          const std::string& xl, const std::string& yl,
                          const std::vector<PlotSeries>& series) {
      const std::string path = (std::filesystem::path(plots_dir) / file).string();
      write_svg_plot(path, title, xl, yl, series);
      res.plot_files.push_back(path);
    };

    PlotSeries ref_path{"reference", {}}, driven{"driven", {}};
    PlotSeries lat{"d", {}};
    PlotSeries v_truth{"v", {}}, v_ref{"v_ref", {}};
    PlotSeries acc_raw{"raw", {}}, acc_cmd{"limited", {}};
    PlotSeries steer_raw{"raw", {}}, steer_cmd{"limited", {}};
    for (const LogRow& r : rows) {
      driven.points.emplace_back(r.truth_x, r.truth_y);
      v_truth.points.emplace_back(r.t, r.truth_v);
      if (r.actuating() && r.ref_mode != 0) {
        ref_path.points.emplace_back(r.ref_x, r.ref_y);
        lat.points.emplace_back(r.t, r.d);
        v_ref.points.emplace_back(r.t, static_cast<double>(r.gear) * r.ref_v);
        acc_raw.points.emplace_back(r.t, r.raw_accel);
        acc_cmd.points.emplace_back(r.t, r.cmd_accel);
        steer_raw.points.emplace_back(r.t, r.raw_steer);
        steer_cmd.points.emplace_back(r.t, r.cmd_steer);
      }
    }
    emit("path.svg", "Path overlay", "x [m]", "y [m]", {ref_path, driven});
    emit("lateral_error.svg", "Lateral error", "t [s]", "d [m]", {lat});
    emit("speed.svg", "Speed tracking", "t [s]", "v [m/s]", {v_ref, v_truth});
    emit("accel_cmd.svg", "Acceleration command", "t [s]", "a [m/s^2]",
         {acc_raw, acc_cmd});
    emit("steer_cmd.svg", "Steering wheel command", "t [s]", "angle [rad]",
         {steer_raw, steer_cmd});
  }
  return res;
}

void write_frame_dump(const std::vector<FrameRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open frame dump for writing: " + path);
  }
  out.write("FTNADUMP", 8);
  for (const FrameRecord& rec : records) {
    const auto t_bits = std::bit_cast<std::uint64_t>(rec.t);
    std::uint8_t head[13];
    for (int i = 0; i < 8; ++i) {
      head[i] = static_cast<std::uint8_t>(t_bits >> (8 * i));
    }
    head[8] = rec.channel;
    const auto len = static_cast<std::uint32_t>(rec.frame.size());
    for (int i = 0; i < 4; ++i) {
      head[9 + i] = static_cast<std::uint8_t>(len >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(head), sizeof(head));
    out.write(reinterpret_cast<const char*>(rec.frame.data()),
              static_cast<std::streamsize>(rec.frame.size()));
  }
}

std::vector<FrameRecord> read_frame_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open frame dump: " + path);
  }
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (data.size() < 8 || std::memcmp(data.data(), "FTNADUMP", 8) != 0) {
    throw std::runtime_error("not a frame dump: " + path);
  }
  std::vector<FrameRecord> records;
  std::size_t pos = 8;
  while (pos < data.size()) {
    if (data.size() - pos < 13) {
      throw std::runtime_error("frame dump truncated at offset " + std::to_string(pos));
    }
    std::uint64_t t_bits = 0;
    for (int i = 0; i < 8; ++i) {
      t_bits |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
    }
    FrameRecord rec;
    rec.t = std::bit_cast<double>(t_bits);
    rec.channel = data[pos + 8];
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) {
      len |= static_cast<std::uint32_t>(data[pos + 9 + i]) << (8 * i);
    }
    pos += 13;
    if (data.size() - pos < len) {
      throw std::runtime_error("frame dump truncated at offset " + std::to_string(pos));
    }
    rec.frame.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                     data.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ftna
