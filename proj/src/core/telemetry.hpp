#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/env.hpp"
#include "core/types.hpp"

namespace flores {

// one record per control tick
struct TelemetryRecord {
  double time = 0.0;
  Vec16 joint_torques = Vec16::Zero();      // substep-averaged, N*m
  Vec16 joint_velocities = Vec16::Zero();   // substep-averaged, rad/s
  Vec3 base_position = Vec3::Zero();
  double base_speed_xy = 0.0;               // |v^b_xy|, m/s
  double heading = 0.0;                     // rad
  Command command;
  std::array<bool, 4> wheel_contact = {false, false, false, false};
};

TelemetryRecord make_record(double time, const StepInfo& info, const Command& cmd);

// fixed column order: time, 16 torques, 16 joint velocities, base x/y/z,
// speed, heading, vx_cmd, vy_cmd, wz_cmd, 4 contact flags
void write_telemetry_csv(const std::string& path, const std::vector<TelemetryRecord>& records);
std::vector<TelemetryRecord> read_telemetry_csv(const std::string& path);

}  // namespace flores
