#include "core/morphology.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace flores {

namespace {

const char* kLegPrefix[kNumLegs] = {"fl", "fr", "rl", "rr"};
const char* kSlotSuffix[4] = {"hip", "hip_pitch", "knee_pitch", "wheel"};

Mat3 box_inertia(double m, const Vec3& size) {
  Mat3 I = Mat3::Zero();
  I(0, 0) = m / 12.0 * (size.y() * size.y() + size.z() * size.z());
  I(1, 1) = m / 12.0 * (size.x() * size.x() + size.z() * size.z());
  I(2, 2) = m / 12.0 * (size.x() * size.x() + size.y() * size.y());
  return I;
}

// slender rod along z plus a small hub term so the axial moment stays positive
Mat3 rod_inertia(double m, double length, double radius) {
  Mat3 I = Mat3::Zero();
  double trans = m * (length * length / 12.0 + radius * radius / 4.0);
  I(0, 0) = I(1, 1) = trans;
  I(2, 2) = 0.5 * m * radius * radius;
  return I;
}

// solid cylinder, spin axis y
Mat3 wheel_inertia(double m, double radius, double width) {
  Mat3 I = Mat3::Zero();
  I(1, 1) = 0.5 * m * radius * radius;
  I(0, 0) = I(2, 2) = m * (3.0 * radius * radius + width * width) / 12.0;
  return I;
}

void check_params(const MorphologyParams& p, bool flores_front) {
  std::vector<std::string> bad;
  auto positive = [&](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) bad.push_back(field);
  };
  positive(p.torso_mass, "torso_mass");
  positive(p.thigh_mass, "thigh_mass");
  positive(p.shank_mass, "shank_mass");
  positive(p.wheel_mass, "wheel_mass");
  positive(p.thigh_length, "thigh_length");
  positive(p.shank_length, "shank_length");
  positive(p.leg_radius, "leg_radius");
  positive(p.wheel_radius, "wheel_radius");
  positive(p.wheel_width, "wheel_width");
  positive(p.leg_torque_limit, "leg_torque_limit");
  positive(p.wheel_torque_limit, "wheel_torque_limit");
  positive(p.leg_velocity_limit, "leg_velocity_limit");
  positive(p.wheel_velocity_limit, "wheel_velocity_limit");
  positive(p.rear_hip_half_spacing, "rear_hip_half_spacing");
  if (p.torso_size.minCoeff() <= 0.0) bad.push_back("torso_size");
  if (p.hip_yaw_limit_lo >= p.hip_yaw_limit_hi) bad.push_back("hip_yaw_limits");
  if (p.hip_roll_limit <= 0.0) bad.push_back("hip_roll_limit");
  if (p.hip_pitch_limit_lo >= p.hip_pitch_limit_hi) bad.push_back("hip_pitch_limits");
  if (p.knee_limit_lo >= p.knee_limit_hi) bad.push_back("knee_limits");
  if (p.default_hip_pitch < p.hip_pitch_limit_lo || p.default_hip_pitch > p.hip_pitch_limit_hi)
    bad.push_back("default_hip_pitch");
  if (p.default_knee < p.knee_limit_lo || p.default_knee > p.knee_limit_hi)
    bad.push_back("default_knee");
  if (flores_front && !(p.front_hip_half_spacing > p.rear_hip_half_spacing))
    bad.push_back("front_hip_half_spacing (must exceed rear spacing)");
  if (!bad.empty()) {
    std::ostringstream os;
    os << "invalid morphology parameters:";
    for (const auto& f : bad) os << " " << f;
    throw_invalid(os.str());
  }
}

RobotModel build_quadruped(const MorphologyParams& p, MorphologyTag tag) {
  const bool flores_front = tag == MorphologyTag::Flores;
  check_params(p, flores_front);

  RobotModel m;
  m.morphology_tag = tag;

  LinkSpec torso;
  torso.name = "torso";
  torso.mass = p.torso_mass;
  torso.com = Vec3::Zero();
  torso.inertia = box_inertia(p.torso_mass, p.torso_size);
  torso.collision_geometry.kind = GeometryKind::Box;
  torso.collision_geometry.box.half_extents = 0.5 * p.torso_size;
  m.links.push_back(torso);

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const std::string lp = kLegPrefix[leg];
    const bool front = leg < 2;
    const bool left = (leg % 2) == 0;
    const double side = left ? 1.0 : -1.0;
    const double half_spacing =
        (front && flores_front) ? p.front_hip_half_spacing : p.rear_hip_half_spacing;

    JointSpec hip;
    hip.name = lp + "_hip";
    hip.kind = JointKind::RevolutePosition;
    hip.parent = "torso";
    hip.child_link = "";  // chains straight into the hip-pitch joint
    hip.frame_offset.translation = Vec3(front ? p.hip_x : -p.hip_x, side * half_spacing, 0.0);
    hip.torque_limit = p.leg_torque_limit;
    hip.velocity_limit = p.leg_velocity_limit;
    hip.default_angle = p.default_hip;
    if (front && flores_front) {
      hip.axis = Vec3::UnitZ();  // steering yaw
      hip.position_limits = left ? Vec2(p.hip_yaw_limit_lo, p.hip_yaw_limit_hi)
                                 : Vec2(-p.hip_yaw_limit_hi, -p.hip_yaw_limit_lo);
    } else {
      hip.axis = Vec3::UnitX();  // roll
      hip.position_limits = Vec2(-p.hip_roll_limit, p.hip_roll_limit);
    }
    m.joints.push_back(hip);

    JointSpec hip_pitch;
    hip_pitch.name = lp + "_hip_pitch";
    hip_pitch.kind = JointKind::RevolutePosition;
    hip_pitch.parent = hip.name;
    hip_pitch.child_link = lp + "_thigh";
    hip_pitch.frame_offset.translation = Vec3(0.0, side * p.hip_bracket_offset, 0.0);
    hip_pitch.axis = Vec3::UnitY();
    hip_pitch.position_limits = Vec2(p.hip_pitch_limit_lo, p.hip_pitch_limit_hi);
    hip_pitch.torque_limit = p.leg_torque_limit;
    hip_pitch.velocity_limit = p.leg_velocity_limit;
    hip_pitch.default_angle = p.default_hip_pitch;
    m.joints.push_back(hip_pitch);

    LinkSpec thigh;
    thigh.name = lp + "_thigh";
    thigh.mass = p.thigh_mass;
    thigh.com = Vec3(0.0, 0.0, -0.5 * p.thigh_length);
    thigh.inertia = rod_inertia(p.thigh_mass, p.thigh_length, p.leg_radius);
    thigh.collision_geometry.kind = GeometryKind::Capsule;
    thigh.collision_geometry.capsule = {p.leg_radius, 0.5 * p.thigh_length};
    m.links.push_back(thigh);

    JointSpec knee;
    knee.name = lp + "_knee_pitch";
    knee.kind = JointKind::RevolutePosition;
    knee.parent = thigh.name;
    knee.child_link = lp + "_shank";
    knee.frame_offset.translation = Vec3(0.0, 0.0, -p.thigh_length);
    knee.axis = Vec3::UnitY();
    knee.position_limits = Vec2(p.knee_limit_lo, p.knee_limit_hi);
    knee.torque_limit = p.leg_torque_limit;
    knee.velocity_limit = p.leg_velocity_limit;
    knee.default_angle = p.default_knee;
    m.joints.push_back(knee);

    LinkSpec shank;
    shank.name = lp + "_shank";
    shank.mass = p.shank_mass;
    shank.com = Vec3(0.0, 0.0, -0.5 * p.shank_length);
    shank.inertia = rod_inertia(p.shank_mass, p.shank_length, p.leg_radius);
    shank.collision_geometry.kind = GeometryKind::Capsule;
    shank.collision_geometry.capsule = {p.leg_radius, 0.5 * p.shank_length};
    m.links.push_back(shank);

    JointSpec wheel;
    wheel.name = lp + "_wheel";
    wheel.kind = JointKind::WheelVelocity;
    wheel.parent = shank.name;
    wheel.child_link = lp + "_wheel_link";
    wheel.frame_offset.translation = Vec3(0.0, 0.0, -p.shank_length);
    wheel.axis = Vec3::UnitY();
    wheel.torque_limit = p.wheel_torque_limit;
    wheel.velocity_limit = p.wheel_velocity_limit;
    wheel.default_angle = 0.0;
    m.joints.push_back(wheel);

    LinkSpec wheel_link;
    wheel_link.name = lp + "_wheel_link";
    wheel_link.mass = p.wheel_mass;
    wheel_link.com = Vec3::Zero();
    wheel_link.inertia = wheel_inertia(p.wheel_mass, p.wheel_radius, p.wheel_width);
    wheel_link.collision_geometry.kind = GeometryKind::WheelCylinder;
    wheel_link.collision_geometry.wheel = {p.wheel_radius, p.wheel_width};
    m.links.push_back(wheel_link);
  }

  for (const auto& j : m.joints) m.joint_order.push_back(j.name);
  return m;
}

bool is_unit(const Vec3& v, double tol) { return std::abs(v.norm() - 1.0) <= tol; }

}  // namespace

std::string to_string(MorphologyTag tag) {
  switch (tag) {
    case MorphologyTag::Flores: return "flores";
    case MorphologyTag::Baseline: return "baseline";
    case MorphologyTag::Custom: return "custom";
  }
  return "custom";
}

double RobotModel::total_mass() const {
  double m = 0.0;
  for (const auto& l : links) m += l.mass;
  return m;
}

const LinkSpec* RobotModel::find_link(const std::string& name) const {
  for (const auto& l : links)
    if (l.name == name) return &l;
  return nullptr;
}

const JointSpec* RobotModel::find_joint(const std::string& name) const {
  for (const auto& j : joints)
    if (j.name == name) return &j;
  return nullptr;
}

int RobotModel::joint_index(const std::string& name) const {
  for (size_t i = 0; i < joint_order.size(); ++i)
    if (joint_order[i] == name) return static_cast<int>(i);
  return -1;
}

Vec16 RobotModel::default_joint_positions() const {
  Vec16 q = Vec16::Zero();
  for (int i = 0; i < std::min<int>(kNumJoints, static_cast<int>(joints.size())); ++i)
    q[i] = joints[i].default_angle;
  return q;
}

Vec12 RobotModel::default_leg_positions() const {
  Vec12 q = Vec12::Zero();
  int k = 0;
  for (const auto& j : joints)
    if (j.kind == JointKind::RevolutePosition && k < kNumLegJoints) q[k++] = j.default_angle;
  return q;
}

std::vector<int> RobotModel::wheel_joint_indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < joints.size(); ++i)
    if (joints[i].kind == JointKind::WheelVelocity) idx.push_back(static_cast<int>(i));
  return idx;
}

std::vector<int> RobotModel::leg_joint_indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < joints.size(); ++i)
    if (joints[i].kind == JointKind::RevolutePosition) idx.push_back(static_cast<int>(i));
  return idx;
}

RobotModel build_flores(const MorphologyParams& params) {
  return build_quadruped(params, MorphologyTag::Flores);
}

RobotModel build_baseline(const MorphologyParams& params) {
  return build_quadruped(params, MorphologyTag::Baseline);
}

std::vector<Violation> validate(const RobotModel& model) {
  std::vector<Violation> v;
  constexpr double kAxisTol = 1e-9;

  std::set<std::string> link_names;
  for (const auto& l : model.links) {
    if (!link_names.insert(l.name).second) v.push_back({l.name, "duplicate link name"});
    if (!(l.mass > 0.0)) v.push_back({l.name, "mass must be positive"});
    if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      v.push_back({l.name, "inertia must be symmetric"});
    else {
      Eigen::SelfAdjointEigenSolver<Mat3> es(l.inertia);
      if (es.eigenvalues().minCoeff() <= 0.0)
        v.push_back({l.name, "inertia must be positive-definite"});
    }
    if (l.collision_geometry.kind == GeometryKind::WheelCylinder &&
        !(l.collision_geometry.wheel.radius > 0.0))
      v.push_back({l.name, "wheel radius must be positive"});
  }

  std::set<std::string> joint_names;
  for (const auto& j : model.joints) {
    if (!joint_names.insert(j.name).second) v.push_back({j.name, "duplicate joint name"});
    if (!is_unit(j.axis, kAxisTol)) v.push_back({j.name, "axis must have unit norm"});
    if (!(j.torque_limit > 0.0)) v.push_back({j.name, "torque limit must be positive"});
    if (j.kind == JointKind::WheelVelocity) {
      if (j.position_limits) v.push_back({j.name, "wheel joints must not have position limits"});
    } else if (j.position_limits) {
      if (!((*j.position_limits)[0] < (*j.position_limits)[1]))
        v.push_back({j.name, "position limit lo must be below hi"});
      else if (j.default_angle < (*j.position_limits)[0] ||
               j.default_angle > (*j.position_limits)[1])
        v.push_back({j.name, "default angle outside position limits"});
    }
    // tree structure: the parent must be the floating-base link or something
    // declared before this joint
    bool parent_ok = model.find_link(j.parent) != nullptr;
    if (!parent_ok) {
      for (const auto& other : model.joints) {
        if (&other == &j) break;
        if (other.name == j.parent) {
          parent_ok = true;
          break;
        }
      }
    }
    if (!parent_ok) v.push_back({j.name, "parent does not precede joint in the tree"});
    if (!j.child_link.empty() && model.find_link(j.child_link) == nullptr)
      v.push_back({j.name, "child link not found"});
  }

  if (model.morphology_tag != MorphologyTag::Custom) {
    if (model.joints.size() != kNumJoints)
      v.push_back({"model", "expected 16 actuated degrees of freedom"});
    if (model.joint_order.size() != model.joints.size())
      v.push_back({"model", "joint_order size mismatch"});
    for (size_t i = 0; i < model.joint_order.size() && i < model.joints.size(); ++i)
      if (model.joint_order[i] != model.joints[i].name)
        v.push_back({model.joint_order[i], "joint_order does not match joint declaration order"});
    if (model.joints.size() == kNumJoints) {
      for (int leg = 0; leg < kNumLegs; ++leg) {
        for (int s = 0; s < 4; ++s) {
          const std::string expected =
              std::string(kLegPrefix[leg]) + "_" + kSlotSuffix[s];
          if (model.joint_order[leg * 4 + s] != expected)
            v.push_back({model.joint_order[leg * 4 + s],
                         "expected slot " + expected + " in canonical ordering"});
        }
      }
    }
  }
  return v;
}

namespace {

std::string fmt_vec(const Vec3& v) {
  std::ostringstream os;
  os << "[" << v.x() << ", " << v.y() << ", " << v.z() << "]";
  return os.str();
}

void diff_scalar(std::vector<std::string>& out, const std::string& path, double a, double b) {
  if (a != b) {
    std::ostringstream os;
    os << path << ": " << a << " vs " << b;
    out.push_back(os.str());
  }
}

void diff_vec3(std::vector<std::string>& out, const std::string& path, const Vec3& a,
               const Vec3& b) {
  if ((a - b).norm() != 0.0) out.push_back(path + ": " + fmt_vec(a) + " vs " + fmt_vec(b));
}

}  // namespace

std::vector<std::string> diff_models(const RobotModel& a, const RobotModel& b) {
  std::vector<std::string> out;
  if (a.links.size() != b.links.size() || a.joints.size() != b.joints.size()) {
    out.push_back("structure: link/joint counts differ");
    return out;
  }
  for (size_t i = 0; i < a.links.size(); ++i) {
    const auto& la = a.links[i];
    const auto& lb = b.links[i];
    if (la.name != lb.name) out.push_back("link[" + std::to_string(i) + "].name");
    diff_scalar(out, "link " + la.name + ".mass", la.mass, lb.mass);
    diff_vec3(out, "link " + la.name + ".com", la.com, lb.com);
    if ((la.inertia - lb.inertia).cwiseAbs().maxCoeff() != 0.0)
      out.push_back("link " + la.name + ".inertia");
    if (la.collision_geometry.kind != lb.collision_geometry.kind)
      out.push_back("link " + la.name + ".collision_geometry.kind");
    diff_scalar(out, "link " + la.name + ".wheel.radius", la.collision_geometry.wheel.radius,
                lb.collision_geometry.wheel.radius);
    diff_scalar(out, "link " + la.name + ".wheel.width", la.collision_geometry.wheel.width,
                lb.collision_geometry.wheel.width);
  }
  for (size_t i = 0; i < a.joints.size(); ++i) {
    const auto& ja = a.joints[i];
    const auto& jb = b.joints[i];
    const std::string p = "joint " + ja.name;
    if (ja.name != jb.name) out.push_back("joint[" + std::to_string(i) + "].name");
    if (ja.kind != jb.kind) out.push_back(p + ".kind");
    diff_vec3(out, p + ".axis", ja.axis, jb.axis);
    if (ja.position_limits.has_value() != jb.position_limits.has_value())
      out.push_back(p + ".position_limits");
    else if (ja.position_limits && (*ja.position_limits - *jb.position_limits).norm() != 0.0)
      out.push_back(p + ".position_limits");
    diff_scalar(out, p + ".torque_limit", ja.torque_limit, jb.torque_limit);
    diff_scalar(out, p + ".velocity_limit", ja.velocity_limit, jb.velocity_limit);
    diff_scalar(out, p + ".default_angle", ja.default_angle, jb.default_angle);
    if (ja.parent != jb.parent) out.push_back(p + ".parent");
    if (ja.child_link != jb.child_link) out.push_back(p + ".child_link");
    diff_vec3(out, p + ".frame_offset.translation", ja.frame_offset.translation,
              jb.frame_offset.translation);
    if ((ja.frame_offset.rotation.coeffs() - jb.frame_offset.rotation.coeffs()).norm() != 0.0)
      out.push_back(p + ".frame_offset.rotation");
  }
  return out;
}

}  // namespace flores
