#pragma once

#include "core/types.hpp"

// Featherstone spatial-vector algebra. 6-vectors are [angular; linear].
// A transform {E, r} maps motion vectors from frame A to frame B, where E
// rotates A coordinates into B coordinates and r is the origin of B expressed
// in A.

namespace flores::spatial {

struct Transform {
  Mat3 E = Mat3::Identity();
  Vec3 r = Vec3::Zero();

  Vec6 apply_motion(const Vec6& v) const {
    Vec6 out;
    const Vec3 w = v.head<3>();
    out.head<3>() = E * w;
    out.tail<3>() = E * (v.tail<3>() - r.cross(w));
    return out;
  }

  // inverse motion map (B -> A)
  Vec6 apply_motion_inverse(const Vec6& v) const {
    Vec6 out;
    const Vec3 w = E.transpose() * v.head<3>();
    out.head<3>() = w;
    out.tail<3>() = E.transpose() * v.tail<3>() + r.cross(w);
    return out;
  }

  // force map from B back to A (X^T f)
  Vec6 apply_force_transpose(const Vec6& f) const {
    Vec6 out;
    const Vec3 fl = E.transpose() * f.tail<3>();
    out.head<3>() = E.transpose() * f.head<3>() + r.cross(fl);
    out.tail<3>() = fl;
    return out;
  }

  // composition: (*this) after other, i.e. A -> B -> C with other: A->B
  Transform compose(const Transform& other) const {
    Transform out;
    out.E = E * other.E;
    out.r = other.r + other.E.transpose() * r;
    return out;
  }

  Mat6 matrix() const {
    Mat6 X = Mat6::Zero();
    X.topLeftCorner<3, 3>() = E;
    X.bottomRightCorner<3, 3>() = E;
    Mat3 rx;
    rx << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
    X.bottomLeftCorner<3, 3>() = -E * rx;
    return X;
  }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// motion x motion
inline Vec6 cross_motion(const Vec6& v, const Vec6& u) {
  Vec6 out;
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  const Vec3 uw = u.head<3>(), ul = u.tail<3>();
  out.head<3>() = w.cross(uw);
  out.tail<3>() = w.cross(ul) + vl.cross(uw);
  return out;
}

// motion x force
inline Vec6 cross_force(const Vec6& v, const Vec6& f) {
  Vec6 out;
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  const Vec3 n = f.head<3>(), fl = f.tail<3>();
  out.head<3>() = w.cross(n) + vl.cross(fl);
  out.tail<3>() = w.cross(fl);
  return out;
}

// rigid-body spatial inertia about the body-frame origin
inline Mat6 body_inertia(double mass, const Vec3& com, const Mat3& inertia_about_com) {
  Mat6 I = Mat6::Zero();
  const Mat3 cx = skew(com);
  I.topLeftCorner<3, 3>() = inertia_about_com + mass * cx * cx.transpose();
  I.topRightCorner<3, 3>() = mass * cx;
  I.bottomLeftCorner<3, 3>() = mass * cx.transpose();
  I.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return I;
}

inline Quat integrate_quaternion(const Quat& q, const Vec3& omega_body, double dt) {
  const double angle = omega_body.norm() * dt;
  if (angle < 1e-12) {
    Quat dq(1.0, 0.5 * omega_body.x() * dt, 0.5 * omega_body.y() * dt,
            0.5 * omega_body.z() * dt);
    return (q * dq).normalized();
  }
  const Vec3 axis = omega_body.normalized();
  Quat dq(Eigen::AngleAxisd(angle, axis));
  return (q * dq).normalized();
}

}  // namespace flores::spatial
