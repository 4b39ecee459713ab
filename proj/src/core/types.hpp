#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace flores {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr int kNumJoints = 16;      // 4 legs x [hip, hip-pitch, knee-pitch, wheel]
inline constexpr int kNumLegJoints = 12;   // all position-controlled joints
inline constexpr int kNumLegs = 4;
inline constexpr int kObsDim = 53;
inline constexpr int kHistorySteps = 12;
inline constexpr int kStateDim = kObsDim * (1 + kHistorySteps);  // 689

using Vec16 = Eigen::Matrix<double, kNumJoints, 1>;
using Vec12 = Eigen::Matrix<double, kNumLegJoints, 1>;

enum class LegIndex { FL = 0, FR = 1, RL = 2, RR = 3 };

// slot within a leg, matching the canonical joint ordering
enum class JointSlot { Hip = 0, HipPitch = 1, KneePitch = 2, Wheel = 3 };

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline double wrap_angle(double a) {
  // wraps to (-pi, pi]
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

}  // namespace flores
