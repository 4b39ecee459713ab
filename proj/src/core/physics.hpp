#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/morphology.hpp"
#include "core/spatial.hpp"
#include "core/terrain.hpp"
#include "core/types.hpp"

namespace flores {

struct SimState {
  Vec3 base_position = Vec3::Zero();           // world, m
  Quat base_orientation = Quat::Identity();    // body -> world
  VecX joint_positions;                        // rad, canonical joint order
  Vec3 base_linear_velocity = Vec3::Zero();    // world, m/s
  Vec3 base_angular_velocity = Vec3::Zero();   // body frame, rad/s
  VecX joint_velocities;                       // rad/s
  double time = 0.0;

  bool all_finite() const;
};

struct ContactPoint {
  std::string link;
  Vec3 world_position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double normal_force = 0.0;        // N, >= 0
  Vec3 tangential_force = Vec3::Zero();
  int body = -1;                    // internal body index
};

enum class Integrator { SemiImplicitEuler, Rk2 };

struct PhysicsConfig {
  double gravity = 9.81;          // m/s^2, acting along -z
  double substep_dt = 0.0025;     // 8 substeps per 0.02 s control tick
  double contact_stiffness = 20000.0;   // N/m
  double contact_damping = 500.0;       // N*s/m
  double friction_regularization_velocity = 0.05;  // m/s
  double friction_stability_fraction = 0.9;  // bound on tangential force slope
  double friction_scale = 1.0;    // multiplies per-cell terrain friction
  double limit_stiffness = 500.0;  // N*m/rad restoring torque past a joint limit
  double limit_damping = 5.0;
  double limit_hard_margin = 0.1;  // rad; position projection backstop
  Integrator integrator = Integrator::SemiImplicitEuler;
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, SimState last_valid)
      : Error(ErrorCode::Diverged, what), last_valid_state(std::move(last_valid)) {}
  SimState last_valid_state;
};

// Forward dynamics for a kinematic tree compiled from a RobotModel. The
// quadruped models compile to 17 internal bodies: the hip joint owns a
// zero-mass bracket body chaining into the hip-pitch joint.
class ArticulatedDynamics {
 public:
  explicit ArticulatedDynamics(const RobotModel& model);

  int num_joints() const { return num_joints_; }
  double total_mass() const { return total_mass_; }
  bool fixed_base() const { return fixed_base_; }

  SimState make_default_state() const;

  // one substep; contacts (if non-null) receive the contact set used
  SimState step(const SimState& state, const VecX& joint_torques, const Vec3& ext_force_world,
                const Vec3& ext_torque_world, const Terrain* terrain, const PhysicsConfig& cfg,
                std::vector<ContactPoint>* contacts = nullptr) const;

  struct BodyPose {
    Mat3 R;  // body -> world
    Vec3 p;  // origin, world
  };
  void forward_kinematics(const SimState& state, std::vector<BodyPose>& poses) const;

  // smallest vertical clearance of any collision point over the terrain
  double min_contact_clearance(const SimState& state, const Terrain& terrain) const;

  // diagnostics
  double kinetic_energy(const SimState& state) const;
  double potential_energy(const SimState& state, double gravity) const;
  Vec3 linear_momentum(const SimState& state) const;

  // body index carrying a named link; -1 if absent
  int body_of_link(const std::string& link_name) const;
  int base_body() const { return 0; }
  bool body_is_wheel(int body) const { return bodies_[body].is_wheel; }
  int body_joint_slot(int body) const { return bodies_[body].joint_slot; }

 private:
  struct Shape {
    enum class Kind { Sphere, WheelRim } kind = Kind::Sphere;
    Vec3 local_position = Vec3::Zero();
    double radius = 0.0;
    double effective_mass = 1.0;  // tangential stability bound
  };

  struct Body {
    int parent = -1;
    int joint_slot = -1;  // canonical joint index; -1 for the base
    JointKind joint_kind = JointKind::RevolutePosition;
    Vec3 axis = Vec3::UnitZ();
    Mat3 offset_R = Mat3::Identity();  // parent frame -> joint frame rotation
    Vec3 offset_t = Vec3::Zero();
    Mat6 inertia = Mat6::Zero();
    double mass = 0.0;
    Vec3 com = Vec3::Zero();
    std::string link_name;
    bool is_wheel = false;
    bool has_limits = false;
    Vec2 limits = Vec2::Zero();
    std::vector<Shape> shapes;
  };

  struct Derivative {
    Vec6 base_acc = Vec6::Zero();  // base body coords
    VecX joint_acc;
  };

  void compute_kinematics(const SimState& state, std::vector<spatial::Transform>& x_up,
                          std::vector<BodyPose>& poses, std::vector<Vec6>& vel) const;
  void contact_forces(const SimState& state, const std::vector<BodyPose>& poses,
                      const std::vector<Vec6>& vel, const Terrain* terrain,
                      const PhysicsConfig& cfg, std::vector<Vec6>& f_ext,
                      std::vector<ContactPoint>* contacts) const;
  Derivative forward_dynamics(const SimState& state, const VecX& joint_torques,
                              const Vec3& ext_force_world, const Vec3& ext_torque_world,
                              const Terrain* terrain, const PhysicsConfig& cfg,
                              std::vector<ContactPoint>* contacts) const;
  SimState integrate_semi_implicit(const SimState& state, const Derivative& d, double dt,
                                   double limit_hard_margin) const;

  std::vector<Body> bodies_;
  int num_joints_ = 0;
  double total_mass_ = 0.0;
  bool fixed_base_ = false;
};

// spec-level convenience wrapper
SimState step_dynamics(const ArticulatedDynamics& dynamics, const SimState& state,
                       const VecX& joint_torques, const Vec3& ext_force_world,
                       const Vec3& ext_torque_world, const Terrain* terrain,
                       const PhysicsConfig& cfg, std::vector<ContactPoint>* contacts = nullptr);

}  // namespace flores
