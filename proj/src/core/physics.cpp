#include "core/physics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

namespace flores {

using spatial::Transform;

bool SimState::all_finite() const {
  auto ok = [](const auto& v) { return v.allFinite(); };
  return ok(base_position) && ok(base_linear_velocity) && ok(base_angular_velocity) &&
         ok(joint_positions) && ok(joint_velocities) &&
         std::isfinite(base_orientation.w()) && std::isfinite(base_orientation.x()) &&
         std::isfinite(base_orientation.y()) && std::isfinite(base_orientation.z()) &&
         std::isfinite(time);
}

ArticulatedDynamics::ArticulatedDynamics(const RobotModel& model) {
  fixed_base_ = model.fixed_base;
  num_joints_ = static_cast<int>(model.joints.size());

  // base body carries the root link (first link by convention)
  if (model.links.empty()) throw_invalid("physics: model has no links");
  const LinkSpec& root = model.links.front();

  auto make_shapes = [](const LinkSpec& link) {
    std::vector<Shape> shapes;
    const auto& g = link.collision_geometry;
    switch (g.kind) {
      case GeometryKind::Box: {
        const Vec3 h = g.box.half_extents;
        const double r = 0.02;
        for (int sx : {-1, 1})
          for (int sy : {-1, 1})
            for (int sz : {-1, 1}) {
              Shape s;
              s.kind = Shape::Kind::Sphere;
              s.local_position = Vec3(sx * h.x(), sy * h.y(), sz * h.z());
              s.radius = r;
              s.effective_mass = std::max(link.mass / 8.0, 1e-3);
              shapes.push_back(s);
            }
        break;
      }
      case GeometryKind::Capsule: {
        for (double z : {0.0, -2.0 * g.capsule.half_length}) {
          Shape s;
          s.kind = Shape::Kind::Sphere;
          s.local_position = Vec3(0, 0, z);
          s.radius = g.capsule.radius;
          s.effective_mass = std::max(link.mass / 2.0, 1e-3);
          shapes.push_back(s);
        }
        break;
      }
      case GeometryKind::WheelCylinder: {
        Shape s;
        s.kind = Shape::Kind::WheelRim;
        s.local_position = Vec3::Zero();
        s.radius = g.wheel.radius;
        // the softest tangential mode is the spin inertia seen at the rim
        const double spin_inertia = 0.5 * link.mass * g.wheel.radius * g.wheel.radius;
        s.effective_mass =
            std::max(spin_inertia / (g.wheel.radius * g.wheel.radius), 1e-3);
        shapes.push_back(s);
        break;
      }
    }
    return shapes;
  };

  Body base;
  base.parent = -1;
  base.mass = root.mass;
  base.com = root.com;
  base.inertia = spatial::body_inertia(root.mass, root.com, root.inertia);
  base.link_name = root.name;
  base.shapes = make_shapes(root);
  bodies_.push_back(base);

  // joints in declaration order; each owns one internal body
  for (int ji = 0; ji < num_joints_; ++ji) {
    const JointSpec& j = model.joints[ji];
    Body b;
    b.joint_slot = ji;
    b.joint_kind = j.kind;
    b.axis = j.axis.normalized();
    b.offset_R = j.frame_offset.rotation.toRotationMatrix();
    b.offset_t = j.frame_offset.translation;
    b.is_wheel = j.kind == JointKind::WheelVelocity;
    b.has_limits = j.position_limits.has_value();
    if (b.has_limits) b.limits = *j.position_limits;

    // parent: a link (torso or a body carrying it) or an earlier joint
    b.parent = -1;
    for (size_t bi = 0; bi < bodies_.size(); ++bi)
      if (!bodies_[bi].link_name.empty() && bodies_[bi].link_name == j.parent)
        b.parent = static_cast<int>(bi);
    if (b.parent < 0) {
      for (size_t bi = 1; bi < bodies_.size(); ++bi) {
        const int slot = bodies_[bi].joint_slot;
        if (slot >= 0 && model.joints[slot].name == j.parent) b.parent = static_cast<int>(bi);
      }
    }
    if (b.parent < 0) throw_invalid("physics: joint " + j.name + " has unknown parent");

    if (!j.child_link.empty()) {
      const LinkSpec* link = model.find_link(j.child_link);
      if (!link) throw_invalid("physics: joint " + j.name + " child link missing");
      b.mass = link->mass;
      b.com = link->com;
      b.inertia = spatial::body_inertia(link->mass, link->com, link->inertia);
      b.link_name = link->name;
      b.shapes = make_shapes(*link);
    }
    bodies_.push_back(b);
  }

  total_mass_ = 0.0;
  for (const auto& b : bodies_) total_mass_ += b.mass;
}

SimState ArticulatedDynamics::make_default_state() const {
  SimState s;
  s.joint_positions = VecX::Zero(num_joints_);
  s.joint_velocities = VecX::Zero(num_joints_);
  return s;
}

int ArticulatedDynamics::body_of_link(const std::string& link_name) const {
  for (size_t i = 0; i < bodies_.size(); ++i)
    if (bodies_[i].link_name == link_name) return static_cast<int>(i);
  return -1;
}

void ArticulatedDynamics::compute_kinematics(const SimState& state,
                                             std::vector<Transform>& x_up,
                                             std::vector<BodyPose>& poses,
                                             std::vector<Vec6>& vel) const {
  const size_t n = bodies_.size();
  x_up.resize(n);
  poses.resize(n);
  vel.resize(n);

  poses[0].R = state.base_orientation.toRotationMatrix();
  poses[0].p = state.base_position;
  vel[0].head<3>() = state.base_angular_velocity;
  vel[0].tail<3>() = poses[0].R.transpose() * state.base_linear_velocity;
  if (fixed_base_) vel[0].setZero();

  for (size_t i = 1; i < n; ++i) {
    const Body& b = bodies_[i];
    const double q = state.joint_positions[b.joint_slot];
    const double qd = state.joint_velocities[b.joint_slot];
    const Mat3 joint_R = Eigen::AngleAxisd(q, b.axis).toRotationMatrix();
    Transform x;
    x.E = joint_R.transpose() * b.offset_R.transpose();
    x.r = b.offset_t;
    x_up[i] = x;

    const BodyPose& pp = poses[b.parent];
    poses[i].R = pp.R * b.offset_R * joint_R;
    poses[i].p = pp.p + pp.R * b.offset_t;

    Vec6 vj = Vec6::Zero();
    vj.head<3>() = b.axis * qd;
    vel[i] = x.apply_motion(vel[b.parent]) + vj;
  }
}

void ArticulatedDynamics::forward_kinematics(const SimState& state,
                                             std::vector<BodyPose>& poses) const {
  std::vector<Transform> x_up;
  std::vector<Vec6> vel;
  compute_kinematics(state, x_up, poses, vel);
}

void ArticulatedDynamics::contact_forces(const SimState&, const std::vector<BodyPose>& poses,
                                         const std::vector<Vec6>& vel, const Terrain* terrain,
                                         const PhysicsConfig& cfg, std::vector<Vec6>& f_ext,
                                         std::vector<ContactPoint>* contacts) const {
  if (!terrain) return;
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Body& b = bodies_[i];
    if (b.shapes.empty()) continue;
    const Mat3& R = poses[i].R;
    const Vec3& p = poses[i].p;
    for (const auto& shape : b.shapes) {
      Vec3 point;  // candidate contact point, world
      if (shape.kind == Shape::Kind::Sphere) {
        const Vec3 center = p + R * shape.local_position;
        const Vec3 n_probe = terrain->normal_at(center.x(), center.y());
        point = center - shape.radius * n_probe;
      } else {
        // lowest rim point of the wheel cylinder
        const Vec3 center = p + R * shape.local_position;
        const Vec3 axis_w = R.col(1);  // spin axis is local y
        const Vec3 n = terrain->normal_at(center.x(), center.y());
        Vec3 radial = -(n - n.dot(axis_w) * axis_w);
        const double rn = radial.norm();
        if (rn < 1e-9) continue;  // wheel lying flat on its side
        point = center + shape.radius * (radial / rn);
      }

      const double ground = terrain->height_at(point.x(), point.y());
      const double depth = ground - point.z();
      if (depth <= 0.0) continue;

      const Vec3 n = terrain->normal_at(point.x(), point.y());
      const Vec3 r_local = R.transpose() * (point - p);
      const Vec3 v_point = R * (vel[i].tail<3>() + vel[i].head<3>().cross(r_local));
      const double v_n = v_point.dot(n);
      double normal_force = cfg.contact_stiffness * depth - cfg.contact_damping * v_n;
      if (normal_force <= 0.0) continue;

      const Vec3 v_t = v_point - v_n * n;
      const double vt_norm = v_t.norm();
      const double mu = terrain->friction_at(point.x(), point.y()) * cfg.friction_scale;
      const double slope_cap =
          cfg.friction_stability_fraction * shape.effective_mass / cfg.substep_dt;
      const double coeff =
          std::min(mu * normal_force /
                       std::max(vt_norm, cfg.friction_regularization_velocity),
                   slope_cap);
      const Vec3 tangential = -coeff * v_t;

      const Vec3 force_w = normal_force * n + tangential;
      Vec6 f;
      const Vec3 f_body = R.transpose() * force_w;
      f.tail<3>() = f_body;
      f.head<3>() = r_local.cross(f_body);
      f_ext[i] += f;

      if (contacts) {
        ContactPoint cp;
        cp.link = b.link_name;
        cp.world_position = point;
        cp.normal = n;
        cp.normal_force = normal_force;
        cp.tangential_force = tangential;
        cp.body = static_cast<int>(i);
        contacts->push_back(cp);
      }
    }
  }
}

ArticulatedDynamics::Derivative ArticulatedDynamics::forward_dynamics(
    const SimState& state, const VecX& joint_torques, const Vec3& ext_force_world,
    const Vec3& ext_torque_world, const Terrain* terrain, const PhysicsConfig& cfg,
    std::vector<ContactPoint>* contacts) const {
  const size_t n = bodies_.size();
  std::vector<Transform> x_up;
  std::vector<BodyPose> poses;
  std::vector<Vec6> v;
  compute_kinematics(state, x_up, poses, v);

  // external forces per body, body coordinates: gravity, contacts, base wrench
  std::vector<Vec6> f_ext(n, Vec6::Zero());
  for (size_t i = 0; i < n; ++i) {
    const Body& b = bodies_[i];
    if (b.mass <= 0.0) continue;
    const Vec3 f_body = poses[i].R.transpose() * Vec3(0, 0, -b.mass * cfg.gravity);
    f_ext[i].head<3>() += b.com.cross(f_body);
    f_ext[i].tail<3>() += f_body;
  }
  contact_forces(state, poses, v, terrain, cfg, f_ext, contacts);
  {
    const Mat3 Rt = poses[0].R.transpose();
    f_ext[0].head<3>() += Rt * ext_torque_world;
    f_ext[0].tail<3>() += Rt * ext_force_world;
  }

  // articulated-body algorithm
  std::vector<Mat6> IA(n);
  std::vector<Vec6> pA(n), c(n), U(n);
  VecX D(static_cast<int>(n)), u(static_cast<int>(n));

  c[0].setZero();
  IA[0] = bodies_[0].inertia;
  pA[0] = spatial::cross_force(v[0], bodies_[0].inertia * v[0]) - f_ext[0];

  for (size_t i = 1; i < n; ++i) {
    const Body& b = bodies_[i];
    Vec6 vj = Vec6::Zero();
    vj.head<3>() = b.axis * state.joint_velocities[b.joint_slot];
    c[i] = spatial::cross_motion(v[i], vj);
    IA[i] = b.inertia;
    pA[i] = spatial::cross_force(v[i], b.inertia * v[i]) - f_ext[i];
  }

  // spring-damper stop torque past a position limit
  auto limit_torque = [&](const Body& b) {
    if (!b.has_limits) return 0.0;
    const double q = state.joint_positions[b.joint_slot];
    const double qd = state.joint_velocities[b.joint_slot];
    if (q > b.limits[1])
      return -cfg.limit_stiffness * (q - b.limits[1]) - cfg.limit_damping * std::max(qd, 0.0);
    if (q < b.limits[0])
      return -cfg.limit_stiffness * (q - b.limits[0]) - cfg.limit_damping * std::min(qd, 0.0);
    return 0.0;
  };

  Vec6 S;  // revolute subspace [axis; 0]
  for (size_t i = n; i-- > 1;) {
    const Body& b = bodies_[i];
    S.setZero();
    S.head<3>() = b.axis;
    U[i] = IA[i] * S;
    D[i] = S.dot(U[i]);
    if (D[i] < 1e-12) D[i] = 1e-12;  // zero-mass leaf guard
    u[i] = joint_torques[b.joint_slot] + limit_torque(b) - S.dot(pA[i]);

    const Mat6 Ia = IA[i] - U[i] * (U[i] / D[i]).transpose();
    const Vec6 pa = pA[i] + Ia * c[i] + U[i] * (u[i] / D[i]);
    const Mat6 X = x_up[i].matrix();
    IA[b.parent] += X.transpose() * Ia * X;
    pA[b.parent] += x_up[i].apply_force_transpose(pa);
  }

  Derivative d;
  d.joint_acc = VecX::Zero(num_joints_);
  std::vector<Vec6> a(n);
  if (fixed_base_) {
    a[0].setZero();
  } else {
    a[0] = IA[0].ldlt().solve(-pA[0]);
  }
  d.base_acc = a[0];

  for (size_t i = 1; i < n; ++i) {
    const Body& b = bodies_[i];
    const Vec6 ap = x_up[i].apply_motion(a[b.parent]) + c[i];
    S.setZero();
    S.head<3>() = b.axis;
    const double qdd = (u[i] - U[i].dot(ap)) / D[i];
    d.joint_acc[b.joint_slot] = qdd;
    a[i] = ap + S * qdd;
  }
  return d;
}

SimState ArticulatedDynamics::integrate_semi_implicit(const SimState& state, const Derivative& d,
                                                      double dt, double limit_hard_margin) const {
  SimState next = state;
  const Mat3 R = state.base_orientation.toRotationMatrix();

  if (!fixed_base_) {
    Vec6 v;
    v.head<3>() = state.base_angular_velocity;
    v.tail<3>() = R.transpose() * state.base_linear_velocity;
    v += dt * d.base_acc;
    next.base_angular_velocity = v.head<3>();
    next.base_linear_velocity = R * v.tail<3>();
    next.base_position = state.base_position + dt * next.base_linear_velocity;
    next.base_orientation =
        spatial::integrate_quaternion(state.base_orientation, next.base_angular_velocity, dt);
  }

  next.joint_velocities = state.joint_velocities + dt * d.joint_acc;
  next.joint_positions = state.joint_positions + dt * next.joint_velocities;

  // hard projection backstop well past the spring-damper stop
  const double margin = limit_hard_margin;
  for (size_t i = 1; i < bodies_.size(); ++i) {
    const Body& b = bodies_[i];
    if (!b.has_limits) continue;
    double& q = next.joint_positions[b.joint_slot];
    double& qd = next.joint_velocities[b.joint_slot];
    if (q < b.limits[0] - margin) {
      q = b.limits[0] - margin;
      qd = std::max(qd, 0.0);
    } else if (q > b.limits[1] + margin) {
      q = b.limits[1] + margin;
      qd = std::min(qd, 0.0);
    }
  }
  next.time = state.time + dt;
  return next;
}

SimState ArticulatedDynamics::step(const SimState& state, const VecX& joint_torques,
                                   const Vec3& ext_force_world, const Vec3& ext_torque_world,
                                   const Terrain* terrain, const PhysicsConfig& cfg,
                                   std::vector<ContactPoint>* contacts) const {
  if (joint_torques.size() != num_joints_)
    throw_invalid("physics: torque vector size mismatch");
  if (!joint_torques.allFinite()) throw_invalid("physics: non-finite joint torques");

  const double dt = cfg.substep_dt;
  SimState next;
  if (cfg.integrator == Integrator::SemiImplicitEuler) {
    const Derivative d =
        forward_dynamics(state, joint_torques, ext_force_world, ext_torque_world, terrain, cfg,
                         contacts);
    next = integrate_semi_implicit(state, d, dt, cfg.limit_hard_margin);
  } else {
    // midpoint rule, validation only; contact set reported from the first stage
    const Derivative k1 =
        forward_dynamics(state, joint_torques, ext_force_world, ext_torque_world, terrain, cfg,
                         contacts);
    SimState mid = state;
    const Mat3 R = state.base_orientation.toRotationMatrix();
    if (!fixed_base_) {
      Vec6 v;
      v.head<3>() = state.base_angular_velocity;
      v.tail<3>() = R.transpose() * state.base_linear_velocity;
      const Vec6 vmid = v + 0.5 * dt * k1.base_acc;
      mid.base_angular_velocity = vmid.head<3>();
      mid.base_linear_velocity = R * vmid.tail<3>();
      mid.base_position = state.base_position + 0.5 * dt * state.base_linear_velocity;
      mid.base_orientation = spatial::integrate_quaternion(state.base_orientation,
                                                           state.base_angular_velocity, 0.5 * dt);
    }
    mid.joint_velocities = state.joint_velocities + 0.5 * dt * k1.joint_acc;
    mid.joint_positions = state.joint_positions + 0.5 * dt * state.joint_velocities;
    mid.time = state.time + 0.5 * dt;

    const Derivative k2 = forward_dynamics(mid, joint_torques, ext_force_world, ext_torque_world,
                                           terrain, cfg, nullptr);
    next = state;
    if (!fixed_base_) {
      Vec6 v;
      v.head<3>() = state.base_angular_velocity;
      v.tail<3>() = R.transpose() * state.base_linear_velocity;
      v += dt * k2.base_acc;
      next.base_angular_velocity = v.head<3>();
      next.base_linear_velocity = R * v.tail<3>();
      next.base_position = state.base_position + dt * mid.base_linear_velocity;
      next.base_orientation = spatial::integrate_quaternion(state.base_orientation,
                                                            mid.base_angular_velocity, dt);
    }
    next.joint_velocities = state.joint_velocities + dt * k2.joint_acc;
    next.joint_positions = state.joint_positions + dt * mid.joint_velocities;
    next.time = state.time + dt;
  }

  next.base_orientation.normalize();
  if (!next.all_finite())
    throw DivergedError("physics: state diverged to non-finite values", state);
  return next;
}

double ArticulatedDynamics::min_contact_clearance(const SimState& state,
                                                  const Terrain& terrain) const {
  std::vector<Transform> x_up;
  std::vector<BodyPose> poses;
  std::vector<Vec6> vel;
  compute_kinematics(state, x_up, poses, vel);
  double min_clearance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < bodies_.size(); ++i) {
    for (const auto& shape : bodies_[i].shapes) {
      Vec3 point;
      const Vec3 center = poses[i].p + poses[i].R * shape.local_position;
      if (shape.kind == Shape::Kind::Sphere) {
        point = center - Vec3(0, 0, shape.radius);
      } else {
        const Vec3 axis_w = poses[i].R.col(1);
        const Vec3 n = terrain.normal_at(center.x(), center.y());
        Vec3 radial = -(n - n.dot(axis_w) * axis_w);
        if (radial.norm() < 1e-9) radial = -n;
        point = center + shape.radius * radial.normalized();
      }
      const double clearance = point.z() - terrain.height_at(point.x(), point.y());
      min_clearance = std::min(min_clearance, clearance);
    }
  }
  return min_clearance;
}

double ArticulatedDynamics::kinetic_energy(const SimState& state) const {
  std::vector<Transform> x_up;
  std::vector<BodyPose> poses;
  std::vector<Vec6> vel;
  compute_kinematics(state, x_up, poses, vel);
  double e = 0.0;
  for (size_t i = 0; i < bodies_.size(); ++i)
    e += 0.5 * vel[i].dot(bodies_[i].inertia * vel[i]);
  return e;
}

double ArticulatedDynamics::potential_energy(const SimState& state, double gravity) const {
  std::vector<BodyPose> poses;
  forward_kinematics(state, poses);
  double e = 0.0;
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Vec3 com_w = poses[i].p + poses[i].R * bodies_[i].com;
    e += bodies_[i].mass * gravity * com_w.z();
  }
  return e;
}

Vec3 ArticulatedDynamics::linear_momentum(const SimState& state) const {
  std::vector<Transform> x_up;
  std::vector<BodyPose> poses;
  std::vector<Vec6> vel;
  compute_kinematics(state, x_up, poses, vel);
  Vec3 p = Vec3::Zero();
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Vec6 h = bodies_[i].inertia * vel[i];
    p += poses[i].R * h.tail<3>();
  }
  return p;
}

SimState step_dynamics(const ArticulatedDynamics& dynamics, const SimState& state,
                       const VecX& joint_torques, const Vec3& ext_force_world,
                       const Vec3& ext_torque_world, const Terrain* terrain,
                       const PhysicsConfig& cfg, std::vector<ContactPoint>* contacts) {
  return dynamics.step(state, joint_torques, ext_force_world, ext_torque_world, terrain, cfg,
                       contacts);
}

}  // namespace flores
