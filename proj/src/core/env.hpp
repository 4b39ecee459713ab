#pragma once

#include <array>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/morphology.hpp"
#include "core/physics.hpp"
#include "core/rng.hpp"
#include "core/terrain.hpp"
#include "core/types.hpp"

namespace flores {

struct Command {
  double vx = 0.0;  // m/s, body longitudinal
  double vy = 0.0;  // m/s, body lateral
  double wz = 0.0;  // rad/s, yaw rate
};

using ObsVec = Eigen::Matrix<double, kObsDim, 1>;
using StateVec = Eigen::Matrix<double, kStateDim, 1>;

// fixed 53-entry layout
struct Observation {
  static constexpr int kAngVel = 0;       // 3
  static constexpr int kGravity = 3;      // 3
  static constexpr int kCommand = 6;      // 3
  static constexpr int kJointPosErr = 9;  // 12, wheels excluded
  static constexpr int kJointVel = 21;    // 16
  static constexpr int kPrevAction = 37;  // 16

  ObsVec data = ObsVec::Zero();
};

// 16 entries in canonical joint order; wheel slots hold velocity actions
struct ActionVector {
  Vec16 data = Vec16::Zero();

  Vec12 legs(const RobotModel& model) const;
  Eigen::Vector4d wheels(const RobotModel& model) const;
};

struct RewardParams {
  double sigma1 = 0.25;  // m/s
  double sigma2 = 0.25;  // rad/s
  double sigma3 = 0.05;  // m
  double sigma4 = 1.0;   // rad^2
  double sigma5 = 1.0;   // rad^2
  double target_height = 0.40;   // h_d, m
  double near_zero_lin = 0.1;    // m/s
  double near_zero_ang = 0.1;    // rad/s
  // ablation switch: branch the tracking rewards on the error magnitude
  // (the table's literal reading) instead of the command magnitude
  bool near_zero_on_error = false;

  double w_track_lin_vel = 8.0;
  double w_track_ang_vel = 4.0;
  double w_z_lin_vel = -0.1;
  double w_xy_ang_vel = -0.05;
  double w_orientation = -0.2;
  double w_base_height = 2.0;
  double w_static_pose = 5.0;
  double w_dynamic_pose = 1.0;
  double w_joint_acc = -2.5e-7;
  double w_joint_power = -5e-5;
  double w_torque = -5e-5;
  double w_action_rate = -0.01;
  double w_smoothness = -0.01;
};

inline constexpr int kNumRewardTerms = 13;
extern const std::array<const char*, kNumRewardTerms> kRewardTermNames;

struct RewardTerm {
  double raw = 0.0;
  double weight = 0.0;
  double weighted = 0.0;
};

struct RewardBreakdown {
  std::array<RewardTerm, kNumRewardTerms> terms;
  double total = 0.0;

  const RewardTerm& operator[](int i) const { return terms[static_cast<size_t>(i)]; }
};

// everything the per-step reward depends on, in one bag so the computation is
// a pure function that synthetic tests can drive directly
struct RewardContext {
  Command cmd;
  Vec3 base_velocity_body = Vec3::Zero();
  Vec3 base_angular_velocity_body = Vec3::Zero();
  double base_z_velocity_world = 0.0;
  Vec3 gravity_body = Vec3(0, 0, -1);  // unit
  double base_height = 0.0;            // above terrain
  Vec12 leg_positions = Vec12::Zero();
  Vec12 leg_default_positions = Vec12::Zero();
  Vec16 joint_velocities = Vec16::Zero();       // end of tick
  Vec16 prev_joint_velocities = Vec16::Zero();  // end of previous tick
  Vec16 mean_torque = Vec16::Zero();            // substep average over the tick
  Vec16 mean_joint_velocities = Vec16::Zero();
  Vec16 action = Vec16::Zero();
  Vec16 prev_action = Vec16::Zero();
  Vec16 prev_prev_action = Vec16::Zero();
  double control_dt = 0.02;
};

RewardBreakdown compute_reward(const RewardContext& ctx, const RewardParams& params);

struct RandomizationRanges {
  Vec2 payload_mass = Vec2(2.0, 6.0);            // kg, additive to the torso
  Vec2 com_displacement = Vec2(-0.2, 0.2);       // m, additive, per axis
  Vec2 friction = Vec2(0.6, 2.0);                // absolute coefficient
  Vec2 motor_strength = Vec2(0.8, 1.2);          // scale, per joint
  Vec2 kp = Vec2(0.9, 1.1);                      // scale
  Vec2 kd = Vec2(0.9, 1.1);                      // scale
  Vec2 initial_joint_position = Vec2(0.8, 1.2);  // scale, per leg joint
  Vec2 disturbance_force = Vec2(-30.0, 30.0);    // N, additive base force, per axis
  Vec2 push_velocity = Vec2(-1.0, 1.0);          // m/s, additive impulse
  int observation_delay_max = 4;                 // control steps
};

struct DomainRandomizationDraw {
  double payload_mass_add = 0.0;
  Vec3 com_displacement = Vec3::Zero();
  double friction_coefficient = 1.0;
  Vec16 motor_strength_scale = Vec16::Ones();
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  Vec12 initial_joint_position_scale = Vec12::Ones();
  Vec3 disturbance_force = Vec3::Zero();
  Vec2 push_velocity_xy = Vec2::Zero();
  int observation_delay_steps = 0;
};

DomainRandomizationDraw sample_randomization(const RandomizationRanges& ranges, Rng& rng);
DomainRandomizationDraw identity_randomization();
// payload and COM displacement fold into the torso link of a model copy
RobotModel apply_randomization(const RobotModel& model, const DomainRandomizationDraw& draw);

struct TerminationConfig {
  double tilt = 1.0;          // rad
  double base_height = 0.15;  // m above terrain
  bool base_contact = true;
};

struct EnvConfig {
  double control_dt = 0.02;  // 50 Hz policy rate
  int substeps = 8;
  double action_scale = 0.25;          // k, rad per unit leg action
  double wheel_velocity_scale = 10.0;  // rad/s per unit wheel action
  double kp = 40.0;                    // leg position gains
  double kd = 1.0;
  double kd_wheel = 0.5;  // wheel velocity servo gain
  int episode_length_steps = 1000;
  int command_resample_steps = 250;
  double near_zero_command_prob = 0.2;
  int push_interval_steps = 350;
  int placement_max_retries = 10;
  Vec2 spawn_position = Vec2::Zero();  // arena x/y at reset
  double spawn_yaw = 0.0;              // rad
  TerminationConfig termination;
  Vec2 cmd_vx_range = Vec2(-1.5, 1.5);
  Vec2 cmd_vy_range = Vec2(-0.8, 0.8);
  Vec2 cmd_wz_range = Vec2(-2.0, 2.0);
  bool randomization_enabled = true;
  RandomizationRanges randomization;
  RewardParams reward;
  PhysicsConfig physics;

  void check() const;  // throws on invariant violations
};

struct StepInfo {
  Vec16 mean_torque = Vec16::Zero();
  Vec16 mean_joint_velocities = Vec16::Zero();
  Vec3 base_velocity_world = Vec3::Zero();  // privileged, critic/encoder target
  Vec3 base_velocity_body = Vec3::Zero();
  double base_height = 0.0;
  double heading = 0.0;
  std::array<bool, 4> wheel_contact = {false, false, false, false};
  bool base_contact = false;
  bool diverged = false;
  int action_clamp_events = 0;
  ObsVec current_observation = ObsVec::Zero();  // undelayed, for encoder targets
};

struct StepOutput {
  StateVec state = StateVec::Zero();
  RewardBreakdown reward;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

class Environment {
 public:
  Environment(std::shared_ptr<const RobotModel> model, std::shared_ptr<const Terrain> terrain,
              EnvConfig cfg, uint64_t seed);

  // places the robot, applies a fresh randomization draw, refills history
  const StateVec& reset();
  const StateVec& reset(uint64_t seed);

  StepOutput step(const ActionVector& action);

  static constexpr int observation_dim() { return kObsDim; }
  static constexpr int state_dim() { return kStateDim; }
  static constexpr int action_dim() { return kNumJoints; }

  Observation assemble_observation(const SimState& state, bool delayed) const;

  // per-substep torques for the current actuation targets; exposed for tests
  Vec16 actuation_torques(const SimState& state) const;

  const SimState& sim_state() const { return sim_; }
  void set_sim_state(const SimState& s) { sim_ = s; }  // tooling/tests
  const Vec16& leg_position_targets() const { return q_des_; }
  const Vec16& wheel_velocity_targets() const { return omega_des_; }
  const Command& command() const { return command_; }
  void override_command(const Command& cmd);  // protocol-driven control
  const DomainRandomizationDraw& draw() const { return draw_; }
  const RobotModel& model() const { return *model_; }
  const ArticulatedDynamics& dynamics() const { return *dyn_; }
  const Terrain& terrain() const { return *terrain_; }
  const EnvConfig& config() const { return cfg_; }
  double total_mass() const { return dyn_->total_mass(); }
  bool terminated() const { return done_; }
  int episode_step() const { return episode_step_; }
  const StateVec& state_vector() const { return state_vec_; }
  double base_height_above_terrain() const;

 private:
  void apply_draw();
  void place_on_terrain();
  Command sample_command();
  void rebuild_state_vector(const Observation& current);
  ObsVec delayed_observation() const;

  std::shared_ptr<const RobotModel> base_model_;
  std::shared_ptr<const Terrain> terrain_;
  EnvConfig cfg_;
  Rng rng_;
  uint64_t episode_counter_ = 0;

  std::unique_ptr<RobotModel> model_;  // randomized copy
  std::unique_ptr<ArticulatedDynamics> dyn_;
  PhysicsConfig physics_;  // per-episode effective config
  DomainRandomizationDraw draw_;
  double kp_eff_ = 0.0, kd_eff_ = 0.0, kd_wheel_eff_ = 0.0;

  SimState sim_;
  Command command_;
  bool command_override_ = false;
  bool done_ = true;
  int episode_step_ = 0;
  int next_push_step_ = 0;

  Vec16 q_des_ = Vec16::Zero();     // leg position targets (wheel slots unused)
  Vec16 omega_des_ = Vec16::Zero(); // wheel velocity targets (leg slots unused)
  Vec16 prev_action_ = Vec16::Zero();
  Vec16 prev_prev_action_ = Vec16::Zero();
  Vec16 prev_tick_joint_velocities_ = Vec16::Zero();

  std::deque<ObsVec> history_;        // 12 most recent past observations
  std::deque<ObsVec> delay_buffer_;   // emitted-observation delay line
  StateVec state_vec_ = StateVec::Zero();
};

}  // namespace flores
