#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace flores {

enum class JointKind { RevolutePosition, WheelVelocity };

enum class MorphologyTag { Flores, Baseline, Custom };

std::string to_string(MorphologyTag tag);

// Fixed rigid transform from the parent frame to the joint frame.
struct FrameOffset {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();
};

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::RevolutePosition;
  Vec3 axis = Vec3::UnitZ();                      // unit vector in the joint frame
  std::optional<Vec2> position_limits;            // [lo, hi] rad; absent for wheels
  double torque_limit = 0.0;                      // N*m
  double velocity_limit = 0.0;                    // rad/s
  double default_angle = 0.0;                     // rad
  std::string parent;                             // parent link name, or parent joint name
                                                  // when two joints chain with no link between
  std::string child_link;                         // link rigidly attached past this joint;
                                                  // empty when the joint chains into another joint
  FrameOffset frame_offset;
};

struct BoxGeometry {
  Vec3 half_extents = Vec3::Zero();
};
struct CapsuleGeometry {
  double radius = 0.0;
  double half_length = 0.0;  // along local -z from the link origin
};
struct WheelCylinderGeometry {
  double radius = 0.0;
  double width = 0.0;  // along the local y (spin) axis
};

enum class GeometryKind { Box, Capsule, WheelCylinder };

struct CollisionGeometry {
  GeometryKind kind = GeometryKind::Box;
  BoxGeometry box;
  CapsuleGeometry capsule;
  WheelCylinderGeometry wheel;
};

struct LinkSpec {
  std::string name;
  double mass = 0.0;       // kg
  Vec3 com = Vec3::Zero(); // m, in the link frame
  Mat3 inertia = Mat3::Zero();  // kg*m^2 about the com, link frame axes
  CollisionGeometry collision_geometry;
};

struct RobotModel {
  std::vector<LinkSpec> links;    // 13 mass-bearing links for the quadruped models
  std::vector<JointSpec> joints;  // 16 actuated joints, tree rooted at the floating base
  std::vector<std::string> joint_order;  // canonical 16-slot ordering
  MorphologyTag morphology_tag = MorphologyTag::Custom;
  bool fixed_base = false;  // test fixtures only; locomotion models float

  double total_mass() const;
  const LinkSpec* find_link(const std::string& name) const;
  const JointSpec* find_joint(const std::string& name) const;
  int joint_index(const std::string& name) const;  // position in joint_order, -1 if absent

  Vec16 default_joint_positions() const;
  // default angles of the 12 position-controlled joints, in joint_order
  Vec12 default_leg_positions() const;
  std::vector<int> wheel_joint_indices() const;
  std::vector<int> leg_joint_indices() const;
};

// Every scalar here is an estimate, not a paper value; all are overridable
// through the morphology parameter file. Lengths m, masses kg, angles rad.
struct MorphologyParams {
  double torso_mass = 12.0;
  Vec3 torso_size = Vec3(0.60, 0.30, 0.14);  // box full extents
  double thigh_mass = 1.2;
  double shank_mass = 0.8;
  double wheel_mass = 1.0;
  double thigh_length = 0.21;
  double shank_length = 0.21;
  double leg_radius = 0.03;       // capsule radius for thigh/shank
  double wheel_radius = 0.10;
  double wheel_width = 0.04;
  double hip_x = 0.28;                  // fore/aft hip placement, +- on x
  double rear_hip_half_spacing = 0.10;  // lateral, m
  double front_hip_half_spacing = 0.12; // flores only; wider for steering clearance
  double hip_bracket_offset = 0.06;     // hip joint to hip-pitch joint, lateral

  double hip_yaw_limit_lo = deg2rad(-35.0);   // front-left; mirrored for front-right
  double hip_yaw_limit_hi = deg2rad(100.0);
  double hip_roll_limit = deg2rad(45.0);      // symmetric +-
  double hip_pitch_limit_lo = deg2rad(-70.0);
  double hip_pitch_limit_hi = deg2rad(160.0);
  double knee_limit_lo = deg2rad(-155.0);
  double knee_limit_hi = deg2rad(-20.0);

  double default_hip = 0.0;
  double default_hip_pitch = deg2rad(45.0);
  double default_knee = deg2rad(-90.0);

  double leg_torque_limit = 32.0;   // N*m, continuous
  double wheel_torque_limit = 8.0;  // N*m, continuous
  double leg_velocity_limit = 20.0;   // rad/s
  double wheel_velocity_limit = 50.0; // rad/s
};

struct Violation {
  std::string where;  // joint/link/model element
  std::string what;
};

RobotModel build_flores(const MorphologyParams& params);
RobotModel build_baseline(const MorphologyParams& params);

std::vector<Violation> validate(const RobotModel& model);

// Field-by-field structural comparison; returns "path: a vs b" descriptors.
std::vector<std::string> diff_models(const RobotModel& a, const RobotModel& b);

}  // namespace flores
