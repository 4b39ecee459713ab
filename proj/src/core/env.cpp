#include "core/env.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace flores {

const std::array<const char*, kNumRewardTerms> kRewardTermNames = {
    "tracking_lin_vel", "tracking_ang_vel", "z_lin_vel",   "xy_ang_vel",  "orientation",
    "base_height",      "static_pose",      "dynamic_pose", "joint_acc",  "joint_power",
    "torques",          "action_rate",      "smoothness"};

Vec12 ActionVector::legs(const RobotModel& model) const {
  Vec12 out;
  int k = 0;
  for (int i = 0; i < kNumJoints; ++i)
    if (model.joints[i].kind == JointKind::RevolutePosition) out[k++] = data[i];
  return out;
}

Eigen::Vector4d ActionVector::wheels(const RobotModel& model) const {
  Eigen::Vector4d out;
  int k = 0;
  for (int i = 0; i < kNumJoints; ++i)
    if (model.joints[i].kind == JointKind::WheelVelocity) out[k++] = data[i];
  return out;
}

RewardBreakdown compute_reward(const RewardContext& ctx, const RewardParams& p) {
  RewardBreakdown out;

  const Vec2 cmd_xy(ctx.cmd.vx, ctx.cmd.vy);
  const Vec2 v_xy(ctx.base_velocity_body.x(), ctx.base_velocity_body.y());
  const double e_v = (cmd_xy - v_xy).norm();
  const double e_w = std::abs(ctx.cmd.wz - ctx.base_angular_velocity_body.z());

  const bool cmd_lin_near_zero = cmd_xy.norm() < p.near_zero_lin;
  const bool cmd_ang_near_zero = std::abs(ctx.cmd.wz) < p.near_zero_ang;
  const bool lin_branch = p.near_zero_on_error ? e_v < p.near_zero_lin : cmd_lin_near_zero;
  const bool ang_branch = p.near_zero_on_error ? e_w < p.near_zero_ang : cmd_ang_near_zero;

  // standing indicator: commanded to stand and actually (nearly) still
  const bool robot_still = v_xy.norm() < p.near_zero_lin &&
                           std::abs(ctx.base_angular_velocity_body.z()) < p.near_zero_ang;
  const double standing = (cmd_lin_near_zero && cmd_ang_near_zero && robot_still) ? 1.0 : 0.0;

  const Vec12 pose_err = ctx.leg_positions - ctx.leg_default_positions;
  const double pose_err_sq = pose_err.squaredNorm();

  const Vec16 joint_acc =
      (ctx.joint_velocities - ctx.prev_joint_velocities) / ctx.control_dt;

  int i = 0;
  auto emit = [&](double raw, double weight) {
    out.terms[i].raw = raw;
    out.terms[i].weight = weight;
    out.terms[i].weighted = raw * weight;
    out.total += out.terms[i].weighted;
    ++i;
  };

  emit(lin_branch ? -e_v : std::exp(-e_v / p.sigma1), p.w_track_lin_vel);
  emit(ang_branch ? -e_w : std::exp(-e_w / p.sigma2), p.w_track_ang_vel);
  emit(ctx.base_z_velocity_world * ctx.base_z_velocity_world, p.w_z_lin_vel);
  emit(ctx.base_angular_velocity_body.x() * ctx.base_angular_velocity_body.x() +
           ctx.base_angular_velocity_body.y() * ctx.base_angular_velocity_body.y(),
       p.w_xy_ang_vel);
  emit(ctx.gravity_body.x() * ctx.gravity_body.x() +
           ctx.gravity_body.y() * ctx.gravity_body.y(),
       p.w_orientation);
  emit(std::exp(-std::abs(ctx.base_height - p.target_height) / p.sigma3), p.w_base_height);
  emit(standing * std::exp(-pose_err_sq / p.sigma4), p.w_static_pose);
  emit(std::exp(-pose_err_sq / p.sigma5), p.w_dynamic_pose);
  emit(joint_acc.squaredNorm(), p.w_joint_acc);
  emit(ctx.mean_torque.cwiseAbs().dot(ctx.mean_joint_velocities.cwiseAbs()), p.w_joint_power);
  emit(ctx.mean_torque.squaredNorm(), p.w_torque);
  emit((ctx.prev_action - ctx.action).squaredNorm(), p.w_action_rate);
  emit((ctx.action - 2.0 * ctx.prev_action + ctx.prev_prev_action).squaredNorm(),
       p.w_smoothness);

  return out;
}

namespace {

void check_range(const Vec2& r, const char* name) {
  if (r[0] > r[1]) throw_invalid(std::string("randomization range ") + name + ": lo > hi");
}

}  // namespace

DomainRandomizationDraw sample_randomization(const RandomizationRanges& r, Rng& rng) {
  check_range(r.payload_mass, "payload_mass");
  check_range(r.com_displacement, "com_displacement");
  check_range(r.friction, "friction");
  check_range(r.motor_strength, "motor_strength");
  check_range(r.kp, "kp");
  check_range(r.kd, "kd");
  check_range(r.initial_joint_position, "initial_joint_position");
  check_range(r.disturbance_force, "disturbance_force");
  check_range(r.push_velocity, "push_velocity");
  if (r.observation_delay_max < 0) throw_invalid("randomization range observation_delay: negative");

  DomainRandomizationDraw d;
  d.payload_mass_add = rng.uniform(r.payload_mass[0], r.payload_mass[1]);
  for (int i = 0; i < 3; ++i)
    d.com_displacement[i] = rng.uniform(r.com_displacement[0], r.com_displacement[1]);
  d.friction_coefficient = rng.uniform(r.friction[0], r.friction[1]);
  for (int i = 0; i < kNumJoints; ++i)
    d.motor_strength_scale[i] = rng.uniform(r.motor_strength[0], r.motor_strength[1]);
  d.kp_scale = rng.uniform(r.kp[0], r.kp[1]);
  d.kd_scale = rng.uniform(r.kd[0], r.kd[1]);
  for (int i = 0; i < kNumLegJoints; ++i)
    d.initial_joint_position_scale[i] =
        rng.uniform(r.initial_joint_position[0], r.initial_joint_position[1]);
  for (int i = 0; i < 3; ++i)
    d.disturbance_force[i] = rng.uniform(r.disturbance_force[0], r.disturbance_force[1]);
  for (int i = 0; i < 2; ++i)
    d.push_velocity_xy[i] = rng.uniform(r.push_velocity[0], r.push_velocity[1]);
  d.observation_delay_steps =
      static_cast<int>(rng.uniform_int_range(0, r.observation_delay_max));
  return d;
}

DomainRandomizationDraw identity_randomization() { return DomainRandomizationDraw{}; }

RobotModel apply_randomization(const RobotModel& model, const DomainRandomizationDraw& draw) {
  RobotModel out = model;
  if (out.links.empty()) throw_invalid("apply_randomization: model has no links");
  out.links[0].mass += draw.payload_mass_add;
  out.links[0].com += draw.com_displacement;
  return out;
}

void EnvConfig::check() const {
  if (control_dt <= 0.0) throw_invalid("env config: control_dt must be positive");
  if (substeps < 1) throw_invalid("env config: substeps must be >= 1");
  if (std::abs(substeps * physics.substep_dt - control_dt) > 1e-12)
    throw_invalid("env config: substep_dt must divide the control period exactly");
  if (action_scale <= 0.0) throw_invalid("env config: action_scale must be positive");
  if (wheel_velocity_scale <= 0.0) throw_invalid("env config: wheel scale must be positive");
  if (episode_length_steps <= kHistorySteps)
    throw_invalid("env config: episode length must exceed the history length");
  if (command_resample_steps < 1) throw_invalid("env config: command_resample_steps >= 1");
}

Environment::Environment(std::shared_ptr<const RobotModel> model,
                         std::shared_ptr<const Terrain> terrain, EnvConfig cfg, uint64_t seed)
    : base_model_(std::move(model)), terrain_(std::move(terrain)), cfg_(std::move(cfg)),
      rng_(derive_seed(seed, "env")) {
  cfg_.check();
  if (!base_model_ || !terrain_) throw_invalid("environment: model and terrain required");
  if (static_cast<int>(base_model_->joints.size()) != kNumJoints)
    throw_invalid("environment: the locomotion environment needs the 16-joint model");
  reset();
}

const StateVec& Environment::reset(uint64_t seed) {
  rng_.reseed(derive_seed(seed, "env-reset"));
  episode_counter_ = 0;
  return reset();
}

const StateVec& Environment::reset() {
  ++episode_counter_;
  draw_ = cfg_.randomization_enabled ? sample_randomization(cfg_.randomization, rng_)
                                     : identity_randomization();
  apply_draw();
  place_on_terrain();

  prev_action_.setZero();
  prev_prev_action_.setZero();
  prev_tick_joint_velocities_.setZero();
  q_des_.setZero();
  omega_des_.setZero();
  episode_step_ = 0;
  done_ = false;
  next_push_step_ = cfg_.push_interval_steps > 0 ? cfg_.push_interval_steps : -1;
  if (!command_override_) command_ = sample_command();

  const Observation first = assemble_observation(sim_, false);
  delay_buffer_.assign(static_cast<size_t>(cfg_.randomization.observation_delay_max) + 1,
                       first.data);
  history_.assign(kHistorySteps, first.data);
  rebuild_state_vector(first);
  return state_vec_;
}

void Environment::apply_draw() {
  model_ = std::make_unique<RobotModel>(apply_randomization(*base_model_, draw_));
  dyn_ = std::make_unique<ArticulatedDynamics>(*model_);
  physics_ = cfg_.physics;
  physics_.friction_scale = draw_.friction_coefficient;
  kp_eff_ = cfg_.kp * draw_.kp_scale;
  kd_eff_ = cfg_.kd * draw_.kd_scale;
  kd_wheel_eff_ = cfg_.kd_wheel * draw_.kd_scale;
}

void Environment::place_on_terrain() {
  sim_ = dyn_->make_default_state();
  Vec16 q = model_->default_joint_positions();
  int leg = 0;
  for (int i = 0; i < kNumJoints; ++i)
    if (model_->joints[i].kind == JointKind::RevolutePosition)
      q[i] *= draw_.initial_joint_position_scale[leg++];
  // scaled starting angles still respect the joint limits
  for (int i = 0; i < kNumJoints; ++i)
    if (model_->joints[i].position_limits)
      q[i] = std::clamp(q[i], (*model_->joints[i].position_limits)[0],
                        (*model_->joints[i].position_limits)[1]);
  sim_.joint_positions = q;
  sim_.base_position = Vec3(cfg_.spawn_position.x(), cfg_.spawn_position.y(), 0.0);
  sim_.base_orientation = Quat(Eigen::AngleAxisd(cfg_.spawn_yaw, Vec3::UnitZ()));

  double clearance = dyn_->min_contact_clearance(sim_, *terrain_);
  sim_.base_position.z() = -clearance + 0.002;
  int retries = 0;
  while (dyn_->min_contact_clearance(sim_, *terrain_) < -0.01) {
    if (++retries > cfg_.placement_max_retries)
      throw Error(ErrorCode::Runtime, "environment: could not place robot on terrain");
    sim_.base_position.z() += 0.05;
  }
  sim_.time = 0.0;
}

Command Environment::sample_command() {
  if (rng_.uniform01() < cfg_.near_zero_command_prob) return Command{0.0, 0.0, 0.0};
  Command c;
  c.vx = rng_.uniform(cfg_.cmd_vx_range[0], cfg_.cmd_vx_range[1]);
  c.vy = rng_.uniform(cfg_.cmd_vy_range[0], cfg_.cmd_vy_range[1]);
  c.wz = rng_.uniform(cfg_.cmd_wz_range[0], cfg_.cmd_wz_range[1]);
  return c;
}

void Environment::override_command(const Command& cmd) {
  command_override_ = true;
  command_ = cmd;
}

Observation Environment::assemble_observation(const SimState& state, bool delayed) const {
  if (delayed) {
    Observation o;
    o.data = delayed_observation();
    return o;
  }
  Observation o;
  const Mat3 R = state.base_orientation.toRotationMatrix();
  o.data.segment<3>(Observation::kAngVel) = state.base_angular_velocity;
  o.data.segment<3>(Observation::kGravity) = R.transpose() * Vec3(0, 0, -1);
  o.data[Observation::kCommand + 0] = command_.vx;
  o.data[Observation::kCommand + 1] = command_.vy;
  o.data[Observation::kCommand + 2] = command_.wz;
  int k = 0;
  for (int i = 0; i < kNumJoints; ++i)
    if (model_->joints[i].kind == JointKind::RevolutePosition)
      o.data[Observation::kJointPosErr + k++] =
          state.joint_positions[i] - model_->joints[i].default_angle;
  o.data.segment<kNumJoints>(Observation::kJointVel) = state.joint_velocities;
  o.data.segment<kNumJoints>(Observation::kPrevAction) = prev_action_;
  return o;
}

ObsVec Environment::delayed_observation() const {
  const int delay = std::min<int>(draw_.observation_delay_steps,
                                  static_cast<int>(delay_buffer_.size()) - 1);
  return delay_buffer_[delay_buffer_.size() - 1 - static_cast<size_t>(delay)];
}

Vec16 Environment::actuation_torques(const SimState& state) const {
  Vec16 tau = Vec16::Zero();
  for (int i = 0; i < kNumJoints; ++i) {
    const auto& joint = model_->joints[i];
    const double limit = joint.torque_limit * draw_.motor_strength_scale[i];
    double t;
    if (joint.kind == JointKind::RevolutePosition) {
      t = kp_eff_ * (q_des_[i] - state.joint_positions[i]) -
          kd_eff_ * state.joint_velocities[i];
    } else {
      t = kd_wheel_eff_ * (omega_des_[i] - state.joint_velocities[i]);
    }
    tau[i] = std::clamp(t, -limit, limit);
  }
  return tau;
}

void Environment::rebuild_state_vector(const Observation& current) {
  state_vec_.segment<kObsDim>(0) = current.data;
  for (int h = 0; h < kHistorySteps; ++h)
    state_vec_.segment<kObsDim>(kObsDim * (1 + h)) = history_[static_cast<size_t>(h)];
  history_.push_back(current.data);
  if (history_.size() > kHistorySteps) history_.pop_front();
}

StepOutput Environment::step(const ActionVector& action) {
  if (done_) throw_invalid("environment: step() after termination; call reset()");
  if (!action.data.allFinite()) throw_invalid("environment: non-finite action");

  StepOutput out;

  // actuation targets from the action, clamped to the feasible range
  int clamps = 0;
  for (int i = 0; i < kNumJoints; ++i) {
    const auto& joint = model_->joints[i];
    if (joint.kind == JointKind::RevolutePosition) {
      double target = joint.default_angle + cfg_.action_scale * action.data[i];
      if (joint.position_limits) {
        const double lo = (*joint.position_limits)[0], hi = (*joint.position_limits)[1];
        const double clamped = std::clamp(target, lo, hi);
        if (clamped != target) ++clamps;
        target = clamped;
      }
      q_des_[i] = target;
    } else {
      double target = cfg_.wheel_velocity_scale * action.data[i];
      const double clamped = std::clamp(target, -joint.velocity_limit, joint.velocity_limit);
      if (clamped != target) ++clamps;
      omega_des_[i] = clamped;
    }
  }
  out.info.action_clamp_events = clamps;

  // scheduled push: additive velocity impulse
  if (cfg_.randomization_enabled && episode_step_ == next_push_step_) {
    sim_.base_linear_velocity.x() += draw_.push_velocity_xy.x();
    sim_.base_linear_velocity.y() += draw_.push_velocity_xy.y();
    next_push_step_ += cfg_.push_interval_steps;
  }

  const Vec3 disturbance =
      cfg_.randomization_enabled ? draw_.disturbance_force : Vec3::Zero();

  Vec16 tau_sum = Vec16::Zero();
  Vec16 qd_sum = Vec16::Zero();
  std::vector<ContactPoint> contacts;
  bool diverged = false;
  for (int sub = 0; sub < cfg_.substeps; ++sub) {
    const Vec16 tau = actuation_torques(sim_);
    tau_sum += tau;
    qd_sum += sim_.joint_velocities;
    contacts.clear();
    try {
      sim_ = dyn_->step(sim_, tau, disturbance, Vec3::Zero(), terrain_.get(), physics_,
                        &contacts);
    } catch (const DivergedError& e) {
      sim_ = e.last_valid_state;
      diverged = true;
      break;
    }
  }

  const double inv_n = 1.0 / cfg_.substeps;
  out.info.mean_torque = tau_sum * inv_n;
  out.info.mean_joint_velocities = qd_sum * inv_n;

  const Mat3 R = sim_.base_orientation.toRotationMatrix();
  out.info.base_velocity_world = sim_.base_linear_velocity;
  out.info.base_velocity_body = R.transpose() * sim_.base_linear_velocity;
  out.info.base_height = base_height_above_terrain();
  out.info.heading = std::atan2(R(1, 0), R(0, 0));
  out.info.diverged = diverged;
  for (const auto& c : contacts) {
    const int slot = dyn_->body_joint_slot(c.body);
    if (slot >= 0 && dyn_->body_is_wheel(c.body))
      out.info.wheel_contact[static_cast<size_t>(slot / 4)] = true;
    if (c.body == dyn_->base_body()) out.info.base_contact = true;
  }

  ++episode_step_;

  if (diverged) {
    done_ = true;
    out.terminated = true;
    out.state = state_vec_;
    out.info.current_observation = state_vec_.segment<kObsDim>(0);
    return out;
  }

  // reward for the transition, then roll the action history forward
  RewardContext ctx;
  ctx.cmd = command_;
  ctx.base_velocity_body = out.info.base_velocity_body;
  ctx.base_angular_velocity_body = sim_.base_angular_velocity;
  ctx.base_z_velocity_world = sim_.base_linear_velocity.z();
  ctx.gravity_body = R.transpose() * Vec3(0, 0, -1);
  ctx.base_height = out.info.base_height;
  int k = 0;
  for (int i = 0; i < kNumJoints; ++i)
    if (model_->joints[i].kind == JointKind::RevolutePosition) {
      ctx.leg_positions[k] = sim_.joint_positions[i];
      ctx.leg_default_positions[k] = model_->joints[i].default_angle;
      ++k;
    }
  ctx.joint_velocities = sim_.joint_velocities;
  ctx.prev_joint_velocities = prev_tick_joint_velocities_;
  ctx.mean_torque = out.info.mean_torque;
  ctx.mean_joint_velocities = out.info.mean_joint_velocities;
  ctx.action = action.data;
  ctx.prev_action = prev_action_;
  ctx.prev_prev_action = prev_prev_action_;
  ctx.control_dt = cfg_.control_dt;
  out.reward = compute_reward(ctx, cfg_.reward);

  prev_prev_action_ = prev_action_;
  prev_action_ = action.data;
  prev_tick_joint_velocities_ = sim_.joint_velocities;

  const Observation true_obs = assemble_observation(sim_, false);
  out.info.current_observation = true_obs.data;
  delay_buffer_.push_back(true_obs.data);
  if (delay_buffer_.size() >
      static_cast<size_t>(cfg_.randomization.observation_delay_max) + 1)
    delay_buffer_.pop_front();
  Observation emitted;
  emitted.data = cfg_.randomization_enabled ? delayed_observation() : true_obs.data;
  rebuild_state_vector(emitted);
  out.state = state_vec_;

  // termination
  const double tilt = std::acos(std::clamp(R(2, 2), -1.0, 1.0));
  if (tilt > cfg_.termination.tilt) out.terminated = true;
  if (out.info.base_height < cfg_.termination.base_height) out.terminated = true;
  if (cfg_.termination.base_contact && out.info.base_contact) out.terminated = true;
  if (episode_step_ >= cfg_.episode_length_steps) out.truncated = true;
  done_ = out.terminated || out.truncated;

  if (!command_override_ && !done_ && episode_step_ % cfg_.command_resample_steps == 0)
    command_ = sample_command();

  return out;
}

double Environment::base_height_above_terrain() const {
  return sim_.base_position.z() -
         terrain_->height_at(sim_.base_position.x(), sim_.base_position.y());
}

}  // namespace flores
