#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/config.hpp"
#include "core/error.hpp"

namespace flores {

using nlohmann::json;

double positive_power(const TelemetryRecord& r) {
  double p = 0.0;
  for (int i = 0; i < kNumJoints; ++i)
    p += std::max(r.joint_torques[i] * r.joint_velocities[i], 0.0);
  return p;
}

double cot(const std::vector<TelemetryRecord>& window, double total_mass, double gravity,
           double speed_floor) {
  if (window.empty()) throw_invalid("cot: empty telemetry window");
  if (total_mass <= 0.0 || gravity <= 0.0) throw_invalid("cot: mass and gravity must be positive");
  double power_sum = 0.0;
  double speed_sum = 0.0;
  for (const auto& r : window) {
    power_sum += positive_power(r);
    speed_sum += r.base_speed_xy;
  }
  const double mean_speed = speed_sum / static_cast<double>(window.size());
  if (mean_speed < speed_floor)
    throw Error(ErrorCode::Runtime, "cot: mean speed below the defined floor; CoT undefined");
  const double mean_power = power_sum / static_cast<double>(window.size());
  return mean_power / (total_mass * gravity * mean_speed);
}

double HeadingPid::update(double target_heading, double heading, double dt) {
  const double error = wrap_angle(target_heading - heading);
  integral_ = std::clamp(integral_ + error * dt, -gains_.integral_limit, gains_.integral_limit);
  const double derivative = primed_ ? (error - prev_error_) / dt : 0.0;
  prev_error_ = error;
  primed_ = true;
  return gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative;
}

void HeadingPid::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  primed_ = false;
}

namespace {

json hardware_annotations(const std::string& protocol, double radius) {
  // hardware measurements from the paper, context only; the simulated robot
  // has different masses, motors, and terrain, so these are never asserted
  json a;
  a["hardware_not_reproducible"] = true;
  if (protocol == "straight") {
    a["context"] = "hardware straight-line CoT curves over 0.5-1.5 m/s; trend reference only";
  } else if (protocol == "lateral") {
    a["hardware_cot"] = {{"flores", 0.3614}, {"b2w", 0.6995}};
    a["context"] = "lateral walking at 0.5 m/s commanded speed";
  } else if (protocol == "circle") {
    const std::vector<std::pair<double, std::pair<double, double>>> table = {
        {0.5, {0.24, 0.646}}, {1.0, {0.18, 0.507}}, {1.5, {0.149, 0.418}}, {2.0, {0.139, 0.4}}};
    for (const auto& [r, pair] : table) {
      if (std::abs(r - radius) < 1e-9)
        a["hardware_cot"] = {{"flores", pair.first}, {"b2w", pair.second}};
    }
    if (!a.contains("hardware_cot")) a["non_paper_radius"] = true;
    a["context"] = "turning maneuvers at constant forward velocity 0.4 m/s";
  } else if (protocol == "course") {
    a["context"] = "hardware turning-point CoT for the hip-yaw design was roughly 70% of the "
                   "hip-roll baseline";
  }
  return a;
}

struct CoursePlan {
  std::vector<Vec2> waypoints;
  int num_turning_points = 0;
};

CoursePlan make_course(double leg) {
  // rectangular slalom; every interior waypoint is a 90-degree turn (A..G)
  CoursePlan plan;
  plan.waypoints = {Vec2(leg, 0),     Vec2(leg, leg),      Vec2(2 * leg, leg),
                    Vec2(2 * leg, 0), Vec2(3 * leg, 0),    Vec2(3 * leg, leg),
                    Vec2(4 * leg, leg), Vec2(4 * leg, 0)};
  plan.num_turning_points = 7;  // all but the final end point
  return plan;
}

}  // namespace

ExperimentReport run_protocol(const Controller& controller,
                              std::shared_ptr<const RobotModel> model,
                              std::shared_ptr<const Terrain> terrain, EnvConfig env_cfg,
                              const ProtocolConfig& cfg, uint64_t seed) {
  if (cfg.protocol != "straight" && cfg.protocol != "lateral" && cfg.protocol != "circle" &&
      cfg.protocol != "course")
    throw_invalid("unknown protocol: " + cfg.protocol);

  ExperimentReport report;
  report.protocol = cfg.protocol;
  report.morphology = to_string(model->morphology_tag);
  report.seed = seed;

  env_cfg.randomization_enabled = false;
  const double settle_plus_measure = cfg.settle + cfg.duration;
  double course_time_cap = 0.0;

  CoursePlan course;
  if (cfg.protocol == "straight") {
    const double distance = settle_plus_measure * std::abs(cfg.speed);
    env_cfg.spawn_position = Vec2(-0.5 * distance - 1.0, 0.0);
    env_cfg.spawn_yaw = 0.0;
  } else if (cfg.protocol == "lateral") {
    const double distance = settle_plus_measure * std::abs(cfg.lateral_speed);
    env_cfg.spawn_position = Vec2(0.0, -0.5 * distance - 1.0);
    env_cfg.spawn_yaw = 0.0;
  } else if (cfg.protocol == "circle") {
    env_cfg.spawn_position = Vec2(0.0, -cfg.radius);
    env_cfg.spawn_yaw = 0.0;  // tangent of the counter-clockwise circle
  } else {
    course = make_course(cfg.course_leg);
    env_cfg.spawn_position = Vec2(0.0, 0.0);
    env_cfg.spawn_yaw = 0.0;
    course_time_cap = 60.0 * std::max(1.0, cfg.course_leg / std::max(cfg.course_vx, 0.05));
  }
  env_cfg.episode_length_steps =
      std::max(env_cfg.episode_length_steps,
               static_cast<int>((cfg.protocol == "course" ? course_time_cap
                                                          : settle_plus_measure) /
                                env_cfg.control_dt) +
                   kHistorySteps + 2);

  Environment env(model, terrain, env_cfg, derive_seed(seed, "protocol"));
  env.override_command(Command{0, 0, 0});
  env.reset(seed);

  HeadingPid pid(cfg.pid);
  const double dt = env_cfg.control_dt;
  const double total_mass = env.total_mass();
  const double weight = total_mass * env_cfg.physics.gravity;

  size_t active_waypoint = 0;
  const int settle_ticks = static_cast<int>(cfg.settle / dt);
  const int measure_ticks = static_cast<int>(cfg.duration / dt);
  const int max_ticks = cfg.protocol == "course"
                            ? static_cast<int>(course_time_cap / dt)
                            : settle_ticks + measure_ticks;

  double tracking_error_sum = 0.0;
  double radial_dev_sum = 0.0;
  int measured = 0;

  for (int tick = 0; tick < max_ticks; ++tick) {
    const SimState& s = env.sim_state();
    const Mat3 R = s.base_orientation.toRotationMatrix();
    const double heading = std::atan2(R(1, 0), R(0, 0));

    Command cmd;
    if (cfg.protocol == "straight") {
      cmd = {cfg.speed, 0.0, 0.0};
    } else if (cfg.protocol == "lateral") {
      cmd = {0.0, cfg.lateral_speed, 0.0};
    } else if (cfg.protocol == "circle") {
      const double angle = std::atan2(s.base_position.y(), s.base_position.x());
      const double target_heading = angle + 0.5 * kPi;
      cmd = {cfg.circle_vx, 0.0, pid.update(target_heading, heading, dt)};
    } else {
      const Vec2 pos(s.base_position.x(), s.base_position.y());
      if (active_waypoint < course.waypoints.size() &&
          (course.waypoints[active_waypoint] - pos).norm() < cfg.waypoint_capture_radius) {
        if (active_waypoint + 1 <= static_cast<size_t>(course.num_turning_points))
          report.turn_ticks.push_back(tick);
        ++active_waypoint;
      }
      if (active_waypoint >= course.waypoints.size()) break;  // course complete
      const Vec2 to_wp = course.waypoints[active_waypoint] - pos;
      const double target_heading = std::atan2(to_wp.y(), to_wp.x());
      cmd = {cfg.course_vx, 0.0, pid.update(target_heading, heading, dt)};
    }
    env.override_command(cmd);

    StepOutput out;
    try {
      out = env.step(controller(env.state_vector()));
    } catch (const Error&) {
      report.completed = false;
      break;
    }

    const bool in_window = cfg.protocol == "course" || tick >= settle_ticks;
    if (in_window) {
      TelemetryRecord rec = make_record(s.time + dt, out.info, cmd);
      rec.base_position = env.sim_state().base_position;
      report.telemetry.push_back(rec);

      const double speed = rec.base_speed_xy;
      report.instant_cot.push_back(positive_power(rec) /
                                   (weight * std::max(speed, cfg.cot_speed_floor)));
      report.instant_time.push_back(rec.time);

      const double cmd_speed = std::hypot(cmd.vx, cmd.vy);
      tracking_error_sum += std::abs(cmd_speed - speed);
      if (cfg.protocol == "circle")
        radial_dev_sum += std::abs(
            std::hypot(env.sim_state().base_position.x(), env.sim_state().base_position.y()) -
            cfg.radius);
      ++measured;
    }

    if (out.terminated) {
      report.completed = false;
      break;
    }
    if (out.truncated) break;
  }

  if (measured > 0) {
    report.mean_tracking_error = tracking_error_sum / measured;
    report.mean_radial_deviation =
        cfg.protocol == "circle" ? radial_dev_sum / measured : 0.0;
    double speed_sum = 0.0;
    for (const auto& r : report.telemetry) speed_sum += r.base_speed_xy;
    report.mean_speed = speed_sum / static_cast<double>(report.telemetry.size());
  }
  report.path_held = cfg.protocol != "circle" ||
                     report.mean_radial_deviation <= cfg.radial_deviation_bound;
  try {
    report.aggregate_cot =
        cot(report.telemetry, total_mass, env_cfg.physics.gravity, cfg.cot_speed_floor);
    report.cot_defined = true;
  } catch (const Error&) {
    report.aggregate_cot = 0.0;
    report.cot_defined = false;
  }

  report.annotations = hardware_annotations(cfg.protocol, cfg.radius);
  report.config_echo = {
      {"protocol", cfg.protocol},
      {"speed", cfg.speed},
      {"lateral_speed", cfg.lateral_speed},
      {"radius", cfg.radius},
      {"circle_vx", cfg.circle_vx},
      {"course_vx", cfg.course_vx},
      {"course_leg", cfg.course_leg},
      {"duration", cfg.duration},
      {"settle", cfg.settle},
      {"cot_speed_floor", cfg.cot_speed_floor},
      {"seed", seed},
      {"build", kBuildId},
      {"env", env_config_to_json(env_cfg)},
  };
  return report;
}

std::vector<ExperimentReport> run_straight_line_sweep(
    const Controller& controller, std::shared_ptr<const RobotModel> model,
    std::shared_ptr<const Terrain> terrain, EnvConfig env_cfg, ProtocolConfig cfg,
    const std::vector<double>& speeds, uint64_t seed) {
  std::vector<ExperimentReport> reports;
  cfg.protocol = "straight";
  for (size_t i = 0; i < speeds.size(); ++i) {
    cfg.speed = speeds[i];
    reports.push_back(run_protocol(controller, model, terrain, env_cfg, cfg,
                                   derive_seed(seed, "sweep", i)));
  }
  return reports;
}

json report_to_json(const ExperimentReport& r) {
  json j;
  j["protocol"] = r.protocol;
  j["morphology"] = r.morphology;
  j["seed"] = r.seed;
  j["metrics"] = {
      {"aggregate_cot", r.aggregate_cot},
      {"cot_defined", r.cot_defined},
      {"mean_speed", r.mean_speed},
      {"mean_tracking_error", r.mean_tracking_error},
      {"mean_radial_deviation", r.mean_radial_deviation},
      {"path_held", r.path_held},
      {"completed", r.completed},
  };
  j["instant_cot"] = r.instant_cot;
  j["instant_time"] = r.instant_time;
  j["turn_ticks"] = r.turn_ticks;
  j["annotations"] = r.annotations;
  j["config_echo"] = r.config_echo;
  return j;
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  r.protocol = j.at("protocol").get<std::string>();
  r.morphology = j.at("morphology").get<std::string>();
  r.seed = j.at("seed").get<uint64_t>();
  const json& m = j.at("metrics");
  r.aggregate_cot = m.at("aggregate_cot").get<double>();
  r.cot_defined = m.at("cot_defined").get<bool>();
  r.mean_speed = m.at("mean_speed").get<double>();
  r.mean_tracking_error = m.at("mean_tracking_error").get<double>();
  r.mean_radial_deviation = m.at("mean_radial_deviation").get<double>();
  r.path_held = m.at("path_held").get<bool>();
  r.completed = m.at("completed").get<bool>();
  r.instant_cot = j.value("instant_cot", std::vector<double>{});
  r.instant_time = j.value("instant_time", std::vector<double>{});
  r.turn_ticks = j.value("turn_ticks", std::vector<int>{});
  r.annotations = j.value("annotations", json::object());
  r.config_echo = j.value("config_echo", json::object());
  return r;
}

json compare_reports(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.protocol != b.protocol)
    throw_invalid("compare: reports come from different protocols (" + a.protocol + " vs " +
                  b.protocol + ")");
  json j;
  j["protocol"] = a.protocol;
  j["a"] = {{"morphology", a.morphology}, {"seed", a.seed}, {"cot", a.aggregate_cot},
            {"cot_defined", a.cot_defined}, {"completed", a.completed}};
  j["b"] = {{"morphology", b.morphology}, {"seed", b.seed}, {"cot", b.aggregate_cot},
            {"cot_defined", b.cot_defined}, {"completed", b.completed}};
  if (a.cot_defined && b.cot_defined && b.aggregate_cot > 0.0)
    j["cot_ratio_a_over_b"] = a.aggregate_cot / b.aggregate_cot;
  j["build"] = kBuildId;
  return j;
}

bool spikes_near_turns(const std::vector<double>& series, const std::vector<int>& turn_ticks,
                       int window_ticks, int smooth_ticks) {
  if (series.empty() || turn_ticks.empty()) return false;
  const int n = static_cast<int>(series.size());
  std::vector<double> smooth(series.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - smooth_ticks / 2);
    const int hi = std::min(n - 1, i + smooth_ticks / 2);
    double sum = 0.0;
    for (int k = lo; k <= hi; ++k) sum += series[static_cast<size_t>(k)];
    smooth[static_cast<size_t>(i)] = sum / (hi - lo + 1);
  }
  for (int turn : turn_ticks) {
    bool found = false;
    for (int i = std::max(1, turn - window_ticks);
         i <= std::min(n - 2, turn + window_ticks) && !found; ++i) {
      if (smooth[static_cast<size_t>(i)] > smooth[static_cast<size_t>(i - 1)] &&
          smooth[static_cast<size_t>(i)] >= smooth[static_cast<size_t>(i + 1)])
        found = true;
    }
    if (!found) return false;
  }
  return true;
}

void write_cot_series_csv(const std::string& path, const ExperimentReport& report) {
  std::ofstream out(path);
  if (!out) throw_io("cannot open CoT series CSV for writing: " + path);
  out << "time,instant_cot,is_turn_tick\n";
  std::vector<bool> turn(report.instant_cot.size(), false);
  for (int t : report.turn_ticks)
    if (t >= 0 && static_cast<size_t>(t) < turn.size()) turn[static_cast<size_t>(t)] = true;
  char buf[80];
  for (size_t i = 0; i < report.instant_cot.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", report.instant_time[i],
                  report.instant_cot[i], turn[i] ? 1 : 0);
    out << buf;
  }
}

}  // namespace flores
