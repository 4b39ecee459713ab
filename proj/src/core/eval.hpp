#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/env.hpp"
#include "core/telemetry.hpp"

namespace flores {

// mechanical cost of transport over a telemetry window:
// sum over joints of the positive part of tau * qd, averaged over the window,
// divided by m g times the mean horizontal base speed
double cot(const std::vector<TelemetryRecord>& window, double total_mass, double gravity,
           double speed_floor = 0.05);

// per-record positive mechanical power (the CoT numerator before averaging)
double positive_power(const TelemetryRecord& record);

struct PidGains {
  double kp = 2.0;
  double ki = 0.1;
  double kd = 0.0;
  double integral_limit = 0.5;
};

// yaw-rate command from a wrapped heading error
class HeadingPid {
 public:
  explicit HeadingPid(PidGains gains) : gains_(gains) {}
  double update(double target_heading, double heading, double dt);
  void reset();

 private:
  PidGains gains_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool primed_ = false;
};

using Controller = std::function<ActionVector(const StateVec&)>;

struct ProtocolConfig {
  std::string protocol;  // straight | lateral | circle | course
  double speed = 1.0;          // straight-line command, m/s
  double lateral_speed = 0.5;  // lateral command, m/s
  double radius = 1.0;         // circle radius, m
  double circle_vx = 0.4;      // constant forward command while turning
  double course_vx = 0.4;
  double course_leg = 2.0;     // m between turning points
  double duration = 10.0;      // measured window, s
  double settle = 2.0;         // excluded warm-up, s
  double cot_speed_floor = 0.05;
  double radial_deviation_bound = 0.5;  // "path not held" beyond this
  double waypoint_capture_radius = 0.35;
  PidGains pid;
};

struct ExperimentReport {
  std::string protocol;
  std::string morphology;
  uint64_t seed = 0;
  double aggregate_cot = 0.0;
  bool cot_defined = false;
  double mean_speed = 0.0;
  double mean_tracking_error = 0.0;   // commanded vs realized planar speed
  double mean_radial_deviation = 0.0; // circle only
  bool path_held = true;
  bool completed = true;              // false after a fall/termination
  std::vector<double> instant_cot;    // per control tick
  std::vector<double> instant_time;
  std::vector<int> turn_ticks;        // course protocol: waypoint switches
  std::vector<TelemetryRecord> telemetry;
  nlohmann::json annotations;         // paper hardware context, never asserted
  nlohmann::json config_echo;
};

ExperimentReport run_protocol(const Controller& controller,
                              std::shared_ptr<const RobotModel> model,
                              std::shared_ptr<const Terrain> terrain, EnvConfig env_cfg,
                              const ProtocolConfig& cfg, uint64_t seed);

// straight-line sweep over the paper's speed range on one terrain kind
std::vector<ExperimentReport> run_straight_line_sweep(
    const Controller& controller, std::shared_ptr<const RobotModel> model,
    std::shared_ptr<const Terrain> terrain, EnvConfig env_cfg, ProtocolConfig cfg,
    const std::vector<double>& speeds, uint64_t seed);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

// paired protocol-by-protocol comparison; rejects mismatched protocols
nlohmann::json compare_reports(const ExperimentReport& a, const ExperimentReport& b);

// smoothed local maxima near given ticks (course-protocol spike check)
bool spikes_near_turns(const std::vector<double>& series, const std::vector<int>& turn_ticks,
                       int window_ticks, int smooth_ticks = 25);

void write_cot_series_csv(const std::string& path, const ExperimentReport& report);

}  // namespace flores
