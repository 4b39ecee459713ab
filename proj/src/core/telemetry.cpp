#include "core/telemetry.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace flores {

TelemetryRecord make_record(double time, const StepInfo& info, const Command& cmd) {
  TelemetryRecord r;
  r.time = time;
  r.joint_torques = info.mean_torque;
  r.joint_velocities = info.mean_joint_velocities;
  r.base_position = Vec3::Zero();  // caller fills from sim state
  r.base_speed_xy = std::hypot(info.base_velocity_body.x(), info.base_velocity_body.y());
  r.heading = info.heading;
  r.command = cmd;
  r.wheel_contact = info.wheel_contact;
  return r;
}

void write_telemetry_csv(const std::string& path, const std::vector<TelemetryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw_io("cannot open telemetry CSV for writing: " + path);
  out << "time";
  for (int i = 0; i < kNumJoints; ++i) out << ",tau" << i;
  for (int i = 0; i < kNumJoints; ++i) out << ",qd" << i;
  out << ",base_x,base_y,base_z,speed,heading,vx_cmd,vy_cmd,wz_cmd"
      << ",contact_fl,contact_fr,contact_rl,contact_rr\n";
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    out << buf;
  };
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.time);
    out << buf;
    for (int i = 0; i < kNumJoints; ++i) emit(r.joint_torques[i]);
    for (int i = 0; i < kNumJoints; ++i) emit(r.joint_velocities[i]);
    emit(r.base_position.x());
    emit(r.base_position.y());
    emit(r.base_position.z());
    emit(r.base_speed_xy);
    emit(r.heading);
    emit(r.command.vx);
    emit(r.command.vy);
    emit(r.command.wz);
    for (int i = 0; i < 4; ++i) out << "," << (r.wheel_contact[static_cast<size_t>(i)] ? 1 : 0);
    out << "\n";
  }
  if (!out) throw_io("telemetry CSV write failed: " + path);
}

std::vector<TelemetryRecord> read_telemetry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open telemetry CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw_format("telemetry CSV is empty: " + path);

  std::vector<TelemetryRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    const size_t expected = 1 + 16 + 16 + 3 + 2 + 3 + 4;
    if (v.size() != expected) throw_format("telemetry CSV row has wrong arity: " + path);
    TelemetryRecord r;
    size_t k = 0;
    r.time = v[k++];
    for (int i = 0; i < kNumJoints; ++i) r.joint_torques[i] = v[k++];
    for (int i = 0; i < kNumJoints; ++i) r.joint_velocities[i] = v[k++];
    r.base_position = Vec3(v[k], v[k + 1], v[k + 2]);
    k += 3;
    r.base_speed_xy = v[k++];
    r.heading = v[k++];
    r.command.vx = v[k++];
    r.command.vy = v[k++];
    r.command.wz = v[k++];
    for (int i = 0; i < 4; ++i) r.wheel_contact[static_cast<size_t>(i)] = v[k++] != 0.0;
    records.push_back(r);
  }
  return records;
}

}  // namespace flores
