#include "core/config.hpp"

#include <fstream>

#include "core/error.hpp"

namespace flores {

using nlohmann::json;

namespace {

void get(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}
void get(const json& j, const char* key, int& out) {
  if (j.contains(key)) out = j.at(key).get<int>();
}
void get(const json& j, const char* key, bool& out) {
  if (j.contains(key)) out = j.at(key).get<bool>();
}
void get_deg(const json& j, const char* key, double& out_rad) {
  if (j.contains(key)) out_rad = deg2rad(j.at(key).get<double>());
}
void get_range(const json& j, const char* key, Vec2& out) {
  if (j.contains(key)) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw_format(std::string("range field ") + key);
    out = Vec2(a[0].get<double>(), a[1].get<double>());
  }
}
json range(const Vec2& v) { return json::array({v[0], v[1]}); }

void get_vec3(const json& j, const char* key, Vec3& out) {
  if (j.contains(key)) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) throw_format(std::string("vec3 field ") + key);
    out = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  }
}

}  // namespace

MorphologyParams morphology_params_from_json(const json& j) {
  MorphologyParams p;
  get(j, "torso_mass", p.torso_mass);
  get_vec3(j, "torso_size", p.torso_size);
  get(j, "thigh_mass", p.thigh_mass);
  get(j, "shank_mass", p.shank_mass);
  get(j, "wheel_mass", p.wheel_mass);
  get(j, "thigh_length", p.thigh_length);
  get(j, "shank_length", p.shank_length);
  get(j, "leg_radius", p.leg_radius);
  get(j, "wheel_radius", p.wheel_radius);
  get(j, "wheel_width", p.wheel_width);
  get(j, "hip_x", p.hip_x);
  get(j, "rear_hip_half_spacing", p.rear_hip_half_spacing);
  get(j, "front_hip_half_spacing", p.front_hip_half_spacing);
  get(j, "hip_bracket_offset", p.hip_bracket_offset);
  get_deg(j, "hip_yaw_limit_lo_deg", p.hip_yaw_limit_lo);
  get_deg(j, "hip_yaw_limit_hi_deg", p.hip_yaw_limit_hi);
  get_deg(j, "hip_roll_limit_deg", p.hip_roll_limit);
  get_deg(j, "hip_pitch_limit_lo_deg", p.hip_pitch_limit_lo);
  get_deg(j, "hip_pitch_limit_hi_deg", p.hip_pitch_limit_hi);
  get_deg(j, "knee_limit_lo_deg", p.knee_limit_lo);
  get_deg(j, "knee_limit_hi_deg", p.knee_limit_hi);
  get_deg(j, "default_hip_deg", p.default_hip);
  get_deg(j, "default_hip_pitch_deg", p.default_hip_pitch);
  get_deg(j, "default_knee_deg", p.default_knee);
  get(j, "leg_torque_limit", p.leg_torque_limit);
  get(j, "wheel_torque_limit", p.wheel_torque_limit);
  get(j, "leg_velocity_limit", p.leg_velocity_limit);
  get(j, "wheel_velocity_limit", p.wheel_velocity_limit);
  return p;
}

json morphology_params_to_json(const MorphologyParams& p) {
  json j;
  j["comment"] = "link masses and geometry are estimates, not from the paper";
  j["torso_mass"] = p.torso_mass;
  j["torso_size"] = {p.torso_size.x(), p.torso_size.y(), p.torso_size.z()};
  j["thigh_mass"] = p.thigh_mass;
  j["shank_mass"] = p.shank_mass;
  j["wheel_mass"] = p.wheel_mass;
  j["thigh_length"] = p.thigh_length;
  j["shank_length"] = p.shank_length;
  j["leg_radius"] = p.leg_radius;
  j["wheel_radius"] = p.wheel_radius;
  j["wheel_width"] = p.wheel_width;
  j["hip_x"] = p.hip_x;
  j["rear_hip_half_spacing"] = p.rear_hip_half_spacing;
  j["front_hip_half_spacing"] = p.front_hip_half_spacing;
  j["hip_bracket_offset"] = p.hip_bracket_offset;
  j["hip_yaw_limit_lo_deg"] = rad2deg(p.hip_yaw_limit_lo);
  j["hip_yaw_limit_hi_deg"] = rad2deg(p.hip_yaw_limit_hi);
  j["hip_roll_limit_deg"] = rad2deg(p.hip_roll_limit);
  j["hip_pitch_limit_lo_deg"] = rad2deg(p.hip_pitch_limit_lo);
  j["hip_pitch_limit_hi_deg"] = rad2deg(p.hip_pitch_limit_hi);
  j["knee_limit_lo_deg"] = rad2deg(p.knee_limit_lo);
  j["knee_limit_hi_deg"] = rad2deg(p.knee_limit_hi);
  j["default_hip_deg"] = rad2deg(p.default_hip);
  j["default_hip_pitch_deg"] = rad2deg(p.default_hip_pitch);
  j["default_knee_deg"] = rad2deg(p.default_knee);
  j["leg_torque_limit"] = p.leg_torque_limit;
  j["wheel_torque_limit"] = p.wheel_torque_limit;
  j["leg_velocity_limit"] = p.leg_velocity_limit;
  j["wheel_velocity_limit"] = p.wheel_velocity_limit;
  return j;
}

TerrainKind terrain_kind_from_json(const json& j) {
  return terrain_kind_from_string(j.value("kind", "flat"));
}

TerrainParams terrain_params_from_json(const json& j) {
  TerrainParams p;
  get(j, "size_x", p.size_x);
  get(j, "size_y", p.size_y);
  get(j, "resolution", p.resolution);
  get_deg(j, "slope_angle_deg", p.slope_angle);
  get_deg(j, "slope_direction_deg", p.slope_direction);
  get(j, "stair_riser", p.stair_riser);
  get(j, "stair_tread", p.stair_tread);
  get(j, "stair_start_x", p.stair_start_x);
  get(j, "stair_count", p.stair_count);
  get(j, "block_size", p.block_size);
  get(j, "block_height_max", p.block_height_max);
  get(j, "patch_size", p.patch_size);
  get_range(j, "friction_range", p.friction_range);
  return p;
}

json terrain_to_json(TerrainKind kind, const TerrainParams& p, uint64_t seed) {
  json j;
  j["kind"] = to_string(kind);
  j["seed"] = seed;
  j["size_x"] = p.size_x;
  j["size_y"] = p.size_y;
  j["resolution"] = p.resolution;
  j["slope_angle_deg"] = rad2deg(p.slope_angle);
  j["slope_direction_deg"] = rad2deg(p.slope_direction);
  j["stair_riser"] = p.stair_riser;
  j["stair_tread"] = p.stair_tread;
  j["stair_start_x"] = p.stair_start_x;
  j["stair_count"] = p.stair_count;
  j["block_size"] = p.block_size;
  j["block_height_max"] = p.block_height_max;
  j["patch_size"] = p.patch_size;
  j["friction_range"] = range(p.friction_range);
  return j;
}

EnvConfig env_config_from_json(const json& j) {
  EnvConfig c;
  get(j, "control_dt", c.control_dt);
  get(j, "substeps", c.substeps);
  get(j, "action_scale", c.action_scale);
  get(j, "wheel_velocity_scale", c.wheel_velocity_scale);
  get(j, "kp", c.kp);
  get(j, "kd", c.kd);
  get(j, "kd_wheel", c.kd_wheel);
  get(j, "episode_length_steps", c.episode_length_steps);
  get(j, "command_resample_steps", c.command_resample_steps);
  get(j, "near_zero_command_prob", c.near_zero_command_prob);
  get(j, "push_interval_steps", c.push_interval_steps);
  get_range(j, "spawn_position", c.spawn_position);
  get_deg(j, "spawn_yaw_deg", c.spawn_yaw);
  get_deg(j, "termination_tilt_deg", c.termination.tilt);
  get(j, "termination_base_height", c.termination.base_height);
  get(j, "terminate_on_base_contact", c.termination.base_contact);
  get_range(j, "cmd_vx_range", c.cmd_vx_range);
  get_range(j, "cmd_vy_range", c.cmd_vy_range);
  get_range(j, "cmd_wz_range", c.cmd_wz_range);
  get(j, "randomization_enabled", c.randomization_enabled);

  if (j.contains("randomization")) {
    const json& r = j.at("randomization");
    get_range(r, "payload_mass", c.randomization.payload_mass);
    get_range(r, "com_displacement", c.randomization.com_displacement);
    get_range(r, "friction", c.randomization.friction);
    get_range(r, "motor_strength", c.randomization.motor_strength);
    get_range(r, "kp", c.randomization.kp);
    get_range(r, "kd", c.randomization.kd);
    get_range(r, "initial_joint_position", c.randomization.initial_joint_position);
    get_range(r, "disturbance_force", c.randomization.disturbance_force);
    get_range(r, "push_velocity", c.randomization.push_velocity);
    get(r, "observation_delay_max", c.randomization.observation_delay_max);
  }
  if (j.contains("reward")) {
    const json& r = j.at("reward");
    RewardParams& p = c.reward;
    get(r, "sigma1", p.sigma1);
    get(r, "sigma2", p.sigma2);
    get(r, "sigma3", p.sigma3);
    get(r, "sigma4", p.sigma4);
    get(r, "sigma5", p.sigma5);
    get(r, "target_height", p.target_height);
    get(r, "near_zero_lin", p.near_zero_lin);
    get(r, "near_zero_ang", p.near_zero_ang);
    get(r, "near_zero_on_error", p.near_zero_on_error);
    if (r.contains("weights")) {
      const json& w = r.at("weights");
      get(w, "tracking_lin_vel", p.w_track_lin_vel);
      get(w, "tracking_ang_vel", p.w_track_ang_vel);
      get(w, "z_lin_vel", p.w_z_lin_vel);
      get(w, "xy_ang_vel", p.w_xy_ang_vel);
      get(w, "orientation", p.w_orientation);
      get(w, "base_height", p.w_base_height);
      get(w, "static_pose", p.w_static_pose);
      get(w, "dynamic_pose", p.w_dynamic_pose);
      get(w, "joint_acc", p.w_joint_acc);
      get(w, "joint_power", p.w_joint_power);
      get(w, "torques", p.w_torque);
      get(w, "action_rate", p.w_action_rate);
      get(w, "smoothness", p.w_smoothness);
    }
  }
  if (j.contains("physics")) {
    const json& ph = j.at("physics");
    PhysicsConfig& p = c.physics;
    get(ph, "gravity", p.gravity);
    get(ph, "substep_dt", p.substep_dt);
    get(ph, "contact_stiffness", p.contact_stiffness);
    get(ph, "contact_damping", p.contact_damping);
    get(ph, "friction_regularization_velocity", p.friction_regularization_velocity);
    get(ph, "friction_stability_fraction", p.friction_stability_fraction);
    get(ph, "limit_stiffness", p.limit_stiffness);
    get(ph, "limit_damping", p.limit_damping);
    get(ph, "limit_hard_margin", p.limit_hard_margin);
    if (ph.contains("integrator")) {
      const std::string s = ph.at("integrator").get<std::string>();
      if (s == "semi-implicit-euler") p.integrator = Integrator::SemiImplicitEuler;
      else if (s == "rk2") p.integrator = Integrator::Rk2;
      else throw_format("unknown integrator: " + s);
    }
  }
  return c;
}

json env_config_to_json(const EnvConfig& c) {
  json j;
  j["control_dt"] = c.control_dt;
  j["substeps"] = c.substeps;
  j["action_scale"] = c.action_scale;
  j["wheel_velocity_scale"] = c.wheel_velocity_scale;
  j["kp"] = c.kp;
  j["kd"] = c.kd;
  j["kd_wheel"] = c.kd_wheel;
  j["episode_length_steps"] = c.episode_length_steps;
  j["command_resample_steps"] = c.command_resample_steps;
  j["near_zero_command_prob"] = c.near_zero_command_prob;
  j["push_interval_steps"] = c.push_interval_steps;
  j["spawn_position"] = range(c.spawn_position);
  j["spawn_yaw_deg"] = rad2deg(c.spawn_yaw);
  j["termination_tilt_deg"] = rad2deg(c.termination.tilt);
  j["termination_base_height"] = c.termination.base_height;
  j["terminate_on_base_contact"] = c.termination.base_contact;
  j["cmd_vx_range"] = range(c.cmd_vx_range);
  j["cmd_vy_range"] = range(c.cmd_vy_range);
  j["cmd_wz_range"] = range(c.cmd_wz_range);
  j["randomization_enabled"] = c.randomization_enabled;
  j["randomization"] = {
      {"payload_mass", range(c.randomization.payload_mass)},
      {"com_displacement", range(c.randomization.com_displacement)},
      {"friction", range(c.randomization.friction)},
      {"motor_strength", range(c.randomization.motor_strength)},
      {"kp", range(c.randomization.kp)},
      {"kd", range(c.randomization.kd)},
      {"initial_joint_position", range(c.randomization.initial_joint_position)},
      {"disturbance_force", range(c.randomization.disturbance_force)},
      {"push_velocity", range(c.randomization.push_velocity)},
      {"observation_delay_max", c.randomization.observation_delay_max},
  };
  j["reward"] = {
      {"sigma1", c.reward.sigma1},
      {"sigma2", c.reward.sigma2},
      {"sigma3", c.reward.sigma3},
      {"sigma4", c.reward.sigma4},
      {"sigma5", c.reward.sigma5},
      {"target_height", c.reward.target_height},
      {"near_zero_lin", c.reward.near_zero_lin},
      {"near_zero_ang", c.reward.near_zero_ang},
      {"near_zero_on_error", c.reward.near_zero_on_error},
      {"weights",
       {{"tracking_lin_vel", c.reward.w_track_lin_vel},
        {"tracking_ang_vel", c.reward.w_track_ang_vel},
        {"z_lin_vel", c.reward.w_z_lin_vel},
        {"xy_ang_vel", c.reward.w_xy_ang_vel},
        {"orientation", c.reward.w_orientation},
        {"base_height", c.reward.w_base_height},
        {"static_pose", c.reward.w_static_pose},
        {"dynamic_pose", c.reward.w_dynamic_pose},
        {"joint_acc", c.reward.w_joint_acc},
        {"joint_power", c.reward.w_joint_power},
        {"torques", c.reward.w_torque},
        {"action_rate", c.reward.w_action_rate},
        {"smoothness", c.reward.w_smoothness}}},
  };
  j["physics"] = {
      {"gravity", c.physics.gravity},
      {"substep_dt", c.physics.substep_dt},
      {"contact_stiffness", c.physics.contact_stiffness},
      {"contact_damping", c.physics.contact_damping},
      {"friction_regularization_velocity", c.physics.friction_regularization_velocity},
      {"friction_stability_fraction", c.physics.friction_stability_fraction},
      {"limit_stiffness", c.physics.limit_stiffness},
      {"limit_damping", c.physics.limit_damping},
      {"limit_hard_margin", c.physics.limit_hard_margin},
      {"integrator",
       c.physics.integrator == Integrator::SemiImplicitEuler ? "semi-implicit-euler" : "rk2"},
  };
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  get(j, "num_envs", c.num_envs);
  get(j, "horizon", c.horizon);
  get(j, "iterations", c.iterations);
  get(j, "checkpoint_every", c.checkpoint_every);
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  get(j, "threads", c.threads);
  get(j, "init_log_std", c.init_log_std);
  get(j, "stop_at_tracking_reward", c.stop_at_tracking_reward);
  get(j, "eval_every", c.eval_every);
  get(j, "eval_episodes", c.eval_episodes);
  if (j.contains("ppo")) {
    const json& p = j.at("ppo");
    get(p, "clip_ratio", c.ppo.clip_ratio);
    get(p, "value_coef", c.ppo.value_coef);
    get(p, "entropy_coef", c.ppo.entropy_coef);
    get(p, "encoder_velocity_coef", c.ppo.encoder_velocity_coef);
    get(p, "encoder_latent_coef", c.ppo.encoder_latent_coef);
    get(p, "gamma", c.ppo.gamma);
    get(p, "gae_lambda", c.ppo.gae_lambda);
    get(p, "epochs", c.ppo.epochs);
    get(p, "minibatches", c.ppo.minibatches);
    get(p, "learning_rate", c.ppo.learning_rate);
    get(p, "grad_norm_clip", c.ppo.grad_norm_clip);
    get(p, "reward_scale", c.ppo.reward_scale);
  }
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  json j;
  j["num_envs"] = c.num_envs;
  j["horizon"] = c.horizon;
  j["iterations"] = c.iterations;
  j["checkpoint_every"] = c.checkpoint_every;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["init_log_std"] = c.init_log_std;
  j["stop_at_tracking_reward"] = c.stop_at_tracking_reward;
  j["eval_every"] = c.eval_every;
  j["eval_episodes"] = c.eval_episodes;
  j["ppo"] = {
      {"clip_ratio", c.ppo.clip_ratio},
      {"value_coef", c.ppo.value_coef},
      {"entropy_coef", c.ppo.entropy_coef},
      {"encoder_velocity_coef", c.ppo.encoder_velocity_coef},
      {"encoder_latent_coef", c.ppo.encoder_latent_coef},
      {"gamma", c.ppo.gamma},
      {"gae_lambda", c.ppo.gae_lambda},
      {"epochs", c.ppo.epochs},
      {"minibatches", c.ppo.minibatches},
      {"learning_rate", c.ppo.learning_rate},
      {"grad_norm_clip", c.ppo.grad_norm_clip},
      {"reward_scale", c.ppo.reward_scale},
  };
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw_format("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw_io("cannot open file for writing: " + path);
  out << j.dump(2) << "\n";
}

void apply_toy_tracking_preset(EnvConfig& env) {
  env.randomization_enabled = false;
  env.episode_length_steps = 400;
  env.command_resample_steps = 200;
  env.near_zero_command_prob = 0.0;
  env.cmd_vx_range = Vec2(-1.0, 1.0);
  env.cmd_vy_range = Vec2(0.0, 0.0);
  env.cmd_wz_range = Vec2(0.0, 0.0);
  RewardParams& r = env.reward;
  r.w_z_lin_vel = 0;
  r.w_xy_ang_vel = 0;
  r.w_orientation = 0;
  r.w_base_height = 0;
  r.w_static_pose = 0;
  r.w_dynamic_pose = 0;
  r.w_joint_acc = 0;
  r.w_joint_power = 0;
  r.w_torque = 0;
  r.w_action_rate = 0;
  r.w_smoothness = 0;
}

}  // namespace flores
