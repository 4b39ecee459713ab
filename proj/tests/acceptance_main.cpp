// Acceptance harness: runs every contract the library ships with and prints
// one [PASS]/[FAIL]/[SKIP] line per criterion. Criterion 8 (the morphology
// efficiency trend) trains for hours and only runs with --trend or
// FLORES_ACCEPT_TREND=1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/env.hpp"
#include "core/eval.hpp"
#include "core/morphology.hpp"
#include "core/ppo.hpp"
#include "core/runner.hpp"
#include "core/telemetry.hpp"
#include "core/terrain.hpp"
#include "flores/flores.h"

using namespace flores;

namespace {

struct Options {
  std::string cli_path;
  bool trend = false;
  std::set<int> only;
  uint64_t seed = 20240810;
};

std::shared_ptr<const RobotModel> flores_model_shared() {
  return std::make_shared<const RobotModel>(build_flores(MorphologyParams{}));
}
std::shared_ptr<const RobotModel> baseline_model_shared() {
  return std::make_shared<const RobotModel>(build_baseline(MorphologyParams{}));
}

// ---- criterion 1: dimension contracts ------------------------------------

bool criterion_dimensions(const Options& opt, std::string& detail) {
  auto terrain = make_terrain(TerrainKind::Discrete, TerrainParams{}, 3);
  EnvConfig cfg;
  cfg.randomization_enabled = true;
  Environment env(flores_model_shared(), terrain, cfg, opt.seed);
  Rng rng(derive_seed(opt.seed, "dims"));

  long checked = 0;
  for (int episode = 0; episode < 40 && checked < 1200; ++episode) {
    const StateVec& s0 = env.reset(derive_seed(opt.seed, "dims-episode", episode));
    if (s0.size() != 689) return false;
    for (int t = 0; t < 60; ++t) {
      ActionVector a;
      for (int i = 0; i < kNumJoints; ++i) a.data[i] = rng.uniform(-1.0, 1.0);
      const StepOutput out = env.step(a);
      if (out.state.size() != 689) return false;
      if (out.info.current_observation.size() != 53) return false;
      ++checked;
      if (out.terminated || out.truncated) break;
    }
  }
  std::ostringstream os;
  os << checked << " random episode steps, observation 53 / state 689 everywhere";
  detail = os.str();
  return checked >= 1000;
}

// ---- criterion 2: reward oracle -------------------------------------------

double oracle_term(int idx, const RewardContext& c, const RewardParams& p) {
  const double evx = c.cmd.vx - c.base_velocity_body.x();
  const double evy = c.cmd.vy - c.base_velocity_body.y();
  const double e_v = std::sqrt(evx * evx + evy * evy);
  const double e_w = std::abs(c.cmd.wz - c.base_angular_velocity_body.z());
  const double cmd_lin = std::hypot(c.cmd.vx, c.cmd.vy);
  const bool lin_near = p.near_zero_on_error ? e_v < p.near_zero_lin : cmd_lin < p.near_zero_lin;
  const bool ang_near =
      p.near_zero_on_error ? e_w < p.near_zero_ang : std::abs(c.cmd.wz) < p.near_zero_ang;
  const bool standing =
      cmd_lin < p.near_zero_lin && std::abs(c.cmd.wz) < p.near_zero_ang &&
      std::hypot(c.base_velocity_body.x(), c.base_velocity_body.y()) < p.near_zero_lin &&
      std::abs(c.base_angular_velocity_body.z()) < p.near_zero_ang;
  double pose_sq = 0.0;
  for (int i = 0; i < kNumLegJoints; ++i) {
    const double d = c.leg_positions[i] - c.leg_default_positions[i];
    pose_sq += d * d;
  }
  switch (idx) {
    case 0: return lin_near ? -e_v : std::exp(-e_v / p.sigma1);
    case 1: return ang_near ? -e_w : std::exp(-e_w / p.sigma2);
    case 2: return c.base_z_velocity_world * c.base_z_velocity_world;
    case 3:
      return c.base_angular_velocity_body.x() * c.base_angular_velocity_body.x() +
             c.base_angular_velocity_body.y() * c.base_angular_velocity_body.y();
    case 4:
      return c.gravity_body.x() * c.gravity_body.x() + c.gravity_body.y() * c.gravity_body.y();
    case 5: return std::exp(-std::abs(c.base_height - p.target_height) / p.sigma3);
    case 6: return (standing ? 1.0 : 0.0) * std::exp(-pose_sq / p.sigma4);
    case 7: return std::exp(-pose_sq / p.sigma5);
    case 8: {
      double s = 0.0;
      for (int i = 0; i < kNumJoints; ++i) {
        const double a = (c.joint_velocities[i] - c.prev_joint_velocities[i]) / c.control_dt;
        s += a * a;
      }
      return s;
    }
    case 9: {
      double s = 0.0;
      for (int i = 0; i < kNumJoints; ++i)
        s += std::abs(c.mean_torque[i]) * std::abs(c.mean_joint_velocities[i]);
      return s;
    }
    case 10: {
      double s = 0.0;
      for (int i = 0; i < kNumJoints; ++i) s += c.mean_torque[i] * c.mean_torque[i];
      return s;
    }
    case 11: {
      double s = 0.0;
      for (int i = 0; i < kNumJoints; ++i) {
        const double d = c.prev_action[i] - c.action[i];
        s += d * d;
      }
      return s;
    }
    case 12: {
      double s = 0.0;
      for (int i = 0; i < kNumJoints; ++i) {
        const double d = c.action[i] - 2.0 * c.prev_action[i] + c.prev_prev_action[i];
        s += d * d;
      }
      return s;
    }
  }
  return 0.0;
}

bool criterion_reward_oracle(const Options& opt, std::string& detail) {
  Rng rng(derive_seed(opt.seed, "reward"));
  RewardParams p;
  double max_err = 0.0;
  bool saw_near_zero = false, saw_moving_standing_zero = false, saw_exp_branch = false;
  for (int trial = 0; trial < 50; ++trial) {
    RewardContext c;
    const bool near_zero = trial % 3 == 0;
    if (near_zero) {
      c.cmd = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
      saw_near_zero = true;
    } else {
      c.cmd = {rng.uniform(0.3, 1.5), rng.uniform(-0.8, 0.8), rng.uniform(0.3, 2.0)};
      saw_exp_branch = true;
    }
    for (int i = 0; i < 3; ++i) {
      c.base_velocity_body[i] = rng.uniform(-1.0, 1.0);
      c.base_angular_velocity_body[i] = rng.uniform(-1.5, 1.5);
    }
    if (near_zero && trial % 6 == 0) saw_moving_standing_zero = true;  // moving robot, I = 0
    c.base_z_velocity_world = rng.uniform(-1.0, 1.0);
    c.gravity_body = Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), -1.0).normalized();
    c.base_height = rng.uniform(0.2, 0.6);
    for (int i = 0; i < kNumLegJoints; ++i) {
      c.leg_positions[i] = rng.uniform(-1.5, 1.5);
      c.leg_default_positions[i] = rng.uniform(-1.0, 1.0);
    }
    for (int i = 0; i < kNumJoints; ++i) {
      c.joint_velocities[i] = rng.uniform(-10.0, 10.0);
      c.prev_joint_velocities[i] = c.joint_velocities[i] + rng.uniform(-2.0, 2.0);
      c.mean_torque[i] = rng.uniform(-32.0, 32.0);
      c.mean_joint_velocities[i] = rng.uniform(-10.0, 10.0);
      c.action[i] = rng.uniform(-1.0, 1.0);
      c.prev_action[i] = rng.uniform(-1.0, 1.0);
      c.prev_prev_action[i] = rng.uniform(-1.0, 1.0);
    }
    const RewardBreakdown got = compute_reward(c, p);
    for (int k = 0; k < kNumRewardTerms; ++k)
      max_err = std::max(max_err, std::abs(got[k].raw - oracle_term(k, c, p)));
  }
  std::ostringstream os;
  os << "max |term - oracle| = " << max_err << " over 50 states (both branches covered)";
  detail = os.str();
  return max_err < 1e-9 && saw_near_zero && saw_exp_branch && saw_moving_standing_zero;
}

// ---- criterion 3: CoT oracle ----------------------------------------------

bool criterion_cot_oracle(const Options& opt, std::string& detail) {
  Rng rng(derive_seed(opt.seed, "cot"));
  double max_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng.uniform_int(150));
    std::vector<TelemetryRecord> w(static_cast<size_t>(n));
    for (auto& r : w) {
      for (int i = 0; i < kNumJoints; ++i) {
        r.joint_torques[i] = rng.uniform(-32, 32);
        r.joint_velocities[i] = rng.uniform(-20, 20);
      }
      r.base_speed_xy = rng.uniform(0.2, 1.5);
    }
    const double mass = rng.uniform(10, 40);
    double num = 0.0, speed = 0.0;
    for (const auto& r : w) {
      for (int i = 0; i < kNumJoints; ++i)
        num += std::max(r.joint_torques[i] * r.joint_velocities[i], 0.0);
      speed += r.base_speed_xy;
    }
    const double brute = (num / n) / (mass * 9.81 * (speed / n));
    const double got = cot(w, mass, 9.81);
    max_rel = std::max(max_rel, std::abs(got - brute) / std::abs(brute));
  }

  // adversarial clipping windows: appending negative-power records at the
  // same mean speed must never raise the CoT
  bool clipping_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TelemetryRecord> w(20);
    for (auto& r : w) {
      for (int i = 0; i < kNumJoints; ++i) {
        r.joint_torques[i] = rng.uniform(0, 10);
        r.joint_velocities[i] = rng.uniform(0, 5);
      }
      r.base_speed_xy = 1.0;
    }
    const double before = cot(w, 24.0, 9.81);
    TelemetryRecord bad;
    bad.base_speed_xy = 1.0;
    for (int i = 0; i < kNumJoints; ++i) {
      bad.joint_torques[i] = rng.uniform(0, 10);
      bad.joint_velocities[i] = -rng.uniform(0, 5);
    }
    w.push_back(bad);
    clipping_ok &= cot(w, 24.0, 9.81) <= before + 1e-15;
  }

  std::ostringstream os;
  os << "max relative error " << max_rel << " over 100 windows; clipping property "
     << (clipping_ok ? "holds" : "VIOLATED");
  detail = os.str();
  return max_rel <= 1e-12 && clipping_ok;
}

// ---- criterion 4: physics suites -------------------------------------------

bool criterion_physics(const Options&, std::string& detail) {
  std::ostringstream os;
  bool ok = true;
  const RobotModel model = build_flores(MorphologyParams{});
  ArticulatedDynamics dyn(model);
  PhysicsConfig cfg;

  {  // free fall
    SimState s = dyn.make_default_state();
    s.joint_positions = model.default_joint_positions();
    s.base_position = Vec3(0, 0, 100);
    const VecX tau = VecX::Zero(dyn.num_joints());
    for (int k = 0; k < static_cast<int>(std::lround(1.0 / cfg.substep_dt)); ++k)
      s = dyn.step(s, tau, Vec3::Zero(), Vec3::Zero(), nullptr, cfg);
    const double err = std::abs(s.base_linear_velocity.z() + 9.81);
    os << "free-fall dv err " << err;
    ok &= err < 1e-6;
  }
  {  // pendulum
    RobotModel pend;
    pend.fixed_base = true;
    LinkSpec anchor{"anchor", 1.0, Vec3::Zero(), Mat3::Identity() * 0.01, {}};
    LinkSpec bob{"bob", 1.0, Vec3(0, 0, -0.5), Mat3::Identity() * 1e-8, {}};
    pend.links = {anchor, bob};
    JointSpec j;
    j.name = "pivot";
    j.axis = Vec3::UnitY();
    j.parent = "anchor";
    j.child_link = "bob";
    j.torque_limit = 100;
    j.velocity_limit = 100;
    pend.joints = {j};
    pend.joint_order = {"pivot"};
    ArticulatedDynamics pdyn(pend);
    SimState s = pdyn.make_default_state();
    s.joint_positions[0] = 0.05;
    const VecX tau = VecX::Zero(1);
    std::vector<double> crossings;
    double prev = s.joint_positions[0];
    for (int k = 0; k < static_cast<int>(15.0 / cfg.substep_dt); ++k) {
      s = pdyn.step(s, tau, Vec3::Zero(), Vec3::Zero(), nullptr, cfg);
      if (prev < 0 && s.joint_positions[0] >= 0) crossings.push_back(s.time);
      prev = s.joint_positions[0];
    }
    const double period = (crossings.back() - crossings.front()) / (crossings.size() - 1);
    const double analytic = 2.0 * kPi * std::sqrt(0.5 / 9.81);
    const double rel = std::abs(period - analytic) / analytic;
    os << ", pendulum period err " << rel;
    ok &= rel < 0.02;
  }
  {  // static equilibrium
    auto terrain = make_terrain(TerrainKind::Flat, TerrainParams{}, 0);
    SimState s = dyn.make_default_state();
    s.joint_positions = model.default_joint_positions();
    const double clearance = dyn.min_contact_clearance(s, *terrain);
    s.base_position.z() = -clearance + 0.001;
    const VecX q_def = model.default_joint_positions();
    VecX tau(dyn.num_joints());
    std::vector<ContactPoint> contacts;
    for (int k = 0; k < static_cast<int>(2.5 / cfg.substep_dt); ++k) {
      for (int i = 0; i < dyn.num_joints(); ++i)
        tau[i] = model.joints[i].kind == JointKind::RevolutePosition
                     ? std::clamp(60.0 * (q_def[i] - s.joint_positions[i]) -
                                      1.5 * s.joint_velocities[i],
                                  -32.0, 32.0)
                     : std::clamp(-0.5 * s.joint_velocities[i], -8.0, 8.0);
      contacts.clear();
      s = dyn.step(s, tau, Vec3::Zero(), Vec3::Zero(), terrain.get(), cfg, &contacts);
    }
    double total_n = 0.0;
    for (const auto& c : contacts) total_n += c.normal_force;
    const double rel = std::abs(total_n - dyn.total_mass() * 9.81) / (dyn.total_mass() * 9.81);
    os << ", static normal-force err " << rel;
    ok &= rel < 0.01;
  }
  {  // momentum drift
    SimState s = dyn.make_default_state();
    s.joint_positions = model.default_joint_positions();
    s.base_position = Vec3(0, 0, 500);
    s.base_linear_velocity = Vec3(1.0, 0.3, 2.0);
    const Vec3 p0 = dyn.linear_momentum(s);
    const VecX tau = VecX::Zero(dyn.num_joints());
    for (int k = 0; k < static_cast<int>(1.0 / cfg.substep_dt); ++k)
      s = dyn.step(s, tau, Vec3::Zero(), Vec3::Zero(), nullptr, cfg);
    const Vec3 p1 = dyn.linear_momentum(s);
    const double drift = std::hypot(p1.x() - p0.x(), p1.y() - p0.y());
    os << ", momentum drift " << drift << " kg*m/s";
    ok &= drift < 1e-6;
  }
  detail = os.str();
  return ok;
}

// ---- criterion 5: gradient checks ------------------------------------------

bool criterion_gradients(const Options&, std::string& detail) {
  NetDims dims;
  dims.obs = 4;
  dims.history_steps = 2;
  dims.act = 2;
  dims.latent = 3;
  dims.encoder_hidden = {4};
  dims.actor_hidden = {4};
  dims.critic_hidden = {4};
  auto policy = make_policy<double>(dims, 777, -0.2);

  Rng rng(42);
  const int B = 16;
  PpoBatch<double> batch;
  batch.states.resize(dims.state_dim(), B);
  batch.actions.resize(dims.act, B);
  batch.log_prob_old.resize(B);
  batch.advantages.resize(B);
  batch.returns.resize(B);
  batch.true_velocity.resize(3, B);
  batch.next_obs.resize(dims.obs, B);
  for (int c = 0; c < B; ++c) {
    for (int i = 0; i < dims.state_dim(); ++i) batch.states(i, c) = rng.uniform(-1, 1);
    for (int i = 0; i < dims.act; ++i) batch.actions(i, c) = rng.uniform(-1, 1);
    batch.log_prob_old[c] = rng.uniform(-2.5, -1.5);
    batch.advantages[c] = rng.uniform(-1, 1);
    batch.returns[c] = rng.uniform(-1, 1);
    for (int i = 0; i < 3; ++i) batch.true_velocity(i, c) = rng.uniform(-1, 1);
    for (int i = 0; i < dims.obs; ++i) batch.next_obs(i, c) = rng.uniform(-1, 1);
  }
  PpoConfig cfg;
  cfg.value_coef = 0.7;
  cfg.entropy_coef = 0.01;
  cfg.encoder_latent_coef = 0.3;

  policy.zero_grad();
  ppo_loss(policy, batch, cfg, true);

  double max_rel = 0.0;
  const double h = 1e-6;
  policy.visit_trainable([&](nets::Tensor<double>& t) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      double* v = t.value.data() + i;
      const double saved = *v;
      *v = saved + h;
      const double up = static_cast<double>(ppo_loss(policy, batch, cfg, false).total);
      *v = saved - h;
      const double dn = static_cast<double>(ppo_loss(policy, batch, cfg, false).total);
      *v = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double an = t.grad.data()[i];
      max_rel =
          std::max(max_rel, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
  });
  std::ostringstream os;
  os << "max relative gradient error " << max_rel << " (64-bit, tiny nets)";
  detail = os.str();
  return max_rel < 1e-4;
}

// ---- criterion 6: domain randomization conformance -------------------------

bool criterion_randomization(const Options& opt, std::string& detail) {
  RandomizationRanges ranges;
  Rng rng(derive_seed(opt.seed, "dr"));
  const int N = 100000;

  struct Acc {
    const char* name;
    double lo, hi;
    double sum = 0;
    bool in_range = true;
    void add(double v) {
      sum += v;
      in_range &= v >= lo - 1e-12 && v <= hi + 1e-12;
    }
    bool mean_ok(int n) const {
      const double mid = 0.5 * (lo + hi);
      const double tol = 0.02 * std::max(std::abs(mid), 0.5 * (hi - lo));
      return std::abs(sum / n - mid) <= tol;
    }
  };
  Acc payload{"payload", 2, 6}, com{"com", -0.2, 0.2}, fric{"friction", 0.6, 2.0},
      motor{"motor", 0.8, 1.2}, kp{"kp", 0.9, 1.1}, kd{"kd", 0.9, 1.1},
      init{"init", 0.8, 1.2}, dist{"disturbance", -30, 30}, push{"push", -1, 1},
      delay{"delay", 0, 4};

  for (int k = 0; k < N; ++k) {
    const DomainRandomizationDraw d = sample_randomization(ranges, rng);
    payload.add(d.payload_mass_add);
    com.add(d.com_displacement.x());
    fric.add(d.friction_coefficient);
    motor.add(d.motor_strength_scale[0]);
    kp.add(d.kp_scale);
    kd.add(d.kd_scale);
    init.add(d.initial_joint_position_scale[0]);
    dist.add(d.disturbance_force.x());
    push.add(d.push_velocity_xy.x());
    delay.add(d.observation_delay_steps);
    // full-vector range checks
    if (d.com_displacement.cwiseAbs().maxCoeff() > 0.2 + 1e-12) com.in_range = false;
    if (d.motor_strength_scale.minCoeff() < 0.8 || d.motor_strength_scale.maxCoeff() > 1.2)
      motor.in_range = false;
    if (d.initial_joint_position_scale.minCoeff() < 0.8 ||
        d.initial_joint_position_scale.maxCoeff() > 1.2)
      init.in_range = false;
    if (d.disturbance_force.cwiseAbs().maxCoeff() > 30 + 1e-9) dist.in_range = false;
    if (d.push_velocity_xy.cwiseAbs().maxCoeff() > 1 + 1e-12) push.in_range = false;
  }

  bool ok = true;
  std::ostringstream os;
  for (const Acc* a : {&payload, &com, &fric, &motor, &kp, &kd, &init, &dist, &push, &delay}) {
    const bool this_ok = a->in_range && a->mean_ok(N);
    ok &= this_ok;
    if (!this_ok) os << a->name << " FAILED (mean " << a->sum / N << "); ";
  }
  if (ok) os << N << " draws inside every range, means within 2% of midpoints";
  detail = os.str();
  return ok;
}

// ---- criterion 7: learning sanity -------------------------------------------

bool criterion_learning(const Options& opt, std::string& detail) {
  auto terrain = make_terrain(TerrainKind::Flat, TerrainParams{}, 0);
  EnvConfig env_cfg;
  apply_toy_tracking_preset(env_cfg);

  TrainConfig cfg;
  cfg.num_envs = 128;
  cfg.horizon = 24;
  cfg.iterations = 300;  // per call; capped at 1500 total below
  cfg.seed = opt.seed;
  cfg.checkpoint_every = 0;
  cfg.init_log_std = -0.7;
  cfg.ppo.learning_rate = 1e-3;
  cfg.stop_at_tracking_reward = 6.45;
  cfg.eval_every = 25;
  cfg.eval_episodes = 10;

  const double target = 0.8 * 8.0;
  Trainer trainer(flores_model_shared(), terrain, env_cfg, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  int total_iters = 0;
  double tracking = 0.0;
  while (total_iters < 1500) {
    const auto res = trainer.run();
    total_iters += res.iterations_run;
    tracking = trainer.evaluate_tracking(50, derive_seed(opt.seed, "accept-eval"));
    if (tracking >= target) break;
  }
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  std::ostringstream os;
  os << "mean weighted lin-vel tracking " << tracking << " / " << target << " after "
     << total_iters << " iterations x 128 envs (50-episode eval, " << minutes << " min)";
  detail = os.str();
  return tracking >= target && total_iters <= 1500;
}

// ---- criterion 8: efficiency trend (gated) ----------------------------------

bool criterion_trend(const Options& opt, std::string& detail) {
  auto terrain = make_terrain(TerrainKind::Flat, TerrainParams{}, 0);
  EnvConfig env_cfg;
  env_cfg.randomization_enabled = false;
  env_cfg.episode_length_steps = 500;
  env_cfg.command_resample_steps = 250;
  env_cfg.near_zero_command_prob = 0.05;
  env_cfg.cmd_vx_range = Vec2(-0.5, 1.2);
  env_cfg.cmd_vy_range = Vec2(-0.3, 0.3);
  env_cfg.cmd_wz_range = Vec2(-1.5, 1.5);

  ProtocolConfig circle;
  circle.protocol = "circle";
  circle.duration = 10.0;
  circle.settle = 2.0;

  int wins = 0;
  std::ostringstream os;
  for (int s = 0; s < 5; ++s) {
    double cot_f[2] = {0, 0}, cot_b[2] = {0, 0};
    bool defined = true;
    for (int m = 0; m < 2; ++m) {
      auto model = m == 0 ? flores_model_shared() : baseline_model_shared();
      TrainConfig cfg;
      cfg.num_envs = 128;
      cfg.horizon = 24;
      cfg.iterations = 800;
      cfg.seed = derive_seed(opt.seed, "trend", s);
      cfg.checkpoint_every = 0;
      cfg.init_log_std = -0.7;
      cfg.ppo.learning_rate = 1e-3;
      Trainer trainer(model, terrain, env_cfg, cfg);
      trainer.run();

      auto policy = std::make_shared<PolicyNets<float>>(trainer.policy());
      const Controller controller = [policy](const StateVec& state) {
        ActionVector a;
        a.data = policy->act_mean(state.cast<float>()).cast<double>();
        return a;
      };
      const double radii[2] = {0.5, 1.0};
      for (int r = 0; r < 2; ++r) {
        circle.radius = radii[r];
        const ExperimentReport rep =
            run_protocol(controller, model, terrain, env_cfg, circle, cfg.seed);
        defined &= rep.cot_defined;
        (m == 0 ? cot_f : cot_b)[r] = rep.aggregate_cot;
      }
    }
    const bool win = defined && cot_f[0] < cot_b[0] && cot_f[1] < cot_b[1];
    wins += win ? 1 : 0;
    os << "seed " << s << ": flores (" << cot_f[0] << ", " << cot_f[1] << ") vs baseline ("
       << cot_b[0] << ", " << cot_b[1] << ")" << (win ? " WIN; " : "; ");
  }
  os << wins << "/5 seeds favor the hip-yaw design";
  detail = os.str();
  return wins >= 4;
}

// ---- criterion 9: determinism & serialization --------------------------------

bool criterion_determinism(const Options& opt, std::string& detail) {
  // checkpoint round-trip must be bit-exact
  auto policy = make_policy<float>(NetDims{}, 31415, -0.4);
  CheckpointMeta meta;
  meta.morphology = "flores";
  meta.seed = opt.seed;
  meta.config_json = "{\"purpose\":\"acceptance\"}";
  const std::string dir = "/tmp/flores_acceptance";
  std::system(("mkdir -p " + dir).c_str());
  const std::string ckpt = dir + "/roundtrip.bin";
  save_checkpoint(policy, meta, ckpt);
  auto [loaded, meta2] = load_checkpoint(ckpt);
  bool bit_exact = meta2.morphology == meta.morphology && meta2.seed == meta.seed &&
                   meta2.config_json == meta.config_json;
  {
    std::vector<nets::Mat<float>> a, b;
    policy.visit_trainable([&](nets::Tensor<float>& t) { a.push_back(t.value); });
    loaded.visit_trainable([&](nets::Tensor<float>& t) { b.push_back(t.value); });
    for (size_t i = 0; i < a.size(); ++i) bit_exact &= a[i] == b[i];
    bit_exact &= policy.target_projection.value == loaded.target_projection.value;
  }

  // CLI replay twice with --threads 1: byte-identical telemetry
  bool replay_ok = true;
  std::string note;
  if (!opt.cli_path.empty()) {
    const std::string base = " replay --checkpoint " + ckpt + " --seed 3 --steps 120 --threads 1";
    const int rc1 = std::system((opt.cli_path + base + " --out " + dir + "/ra >/dev/null").c_str());
    const int rc2 = std::system((opt.cli_path + base + " --out " + dir + "/rb >/dev/null").c_str());
    replay_ok = rc1 == 0 && rc2 == 0;
    if (replay_ok) {
      std::ifstream fa(dir + "/ra/telemetry.csv", std::ios::binary);
      std::ifstream fb(dir + "/rb/telemetry.csv", std::ios::binary);
      std::string sa((std::istreambuf_iterator<char>(fa)), {});
      std::string sb((std::istreambuf_iterator<char>(fb)), {});
      replay_ok = !sa.empty() && sa == sb;
    }
    note = replay_ok ? "CLI replay telemetry byte-identical across two runs"
                     : "CLI replay differed or failed";
  } else {
    note = "CLI path not supplied; replay check via library API";
    nlohmann::json req;
    req["seed"] = 3;
    req["steps"] = 120;
    const auto s1 = run_replay(req, ckpt, dir + "/ra");
    const auto s2 = run_replay(req, ckpt, dir + "/rb");
    replay_ok = s1.at("trajectory_hash") == s2.at("trajectory_hash");
  }

  detail = std::string("checkpoint round-trip ") + (bit_exact ? "bit-exact" : "MISMATCH") +
           "; " + note;
  return bit_exact && replay_ok;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) opt.cli_path = argv[++i];
    else if (arg == "--trend") opt.trend = true;
    else if (arg == "--only" && i + 1 < argc) opt.only.insert(std::atoi(argv[++i]));
    else if (arg == "--seed" && i + 1 < argc) opt.seed = std::strtoull(argv[++i], nullptr, 10);
  }
  if (const char* env = std::getenv("FLORES_ACCEPT_TREND"))
    if (std::strcmp(env, "1") == 0) opt.trend = true;

  struct Criterion {
    int id;
    const char* name;
    bool (*fn)(const Options&, std::string&);
    bool gated;
  };
  const std::vector<Criterion> criteria = {
      {1, "dimension contracts (obs 53 / state 689)", criterion_dimensions, false},
      {2, "reward oracle, 13 terms at 1e-9", criterion_reward_oracle, false},
      {3, "CoT oracle at 1e-12 + clipping", criterion_cot_oracle, false},
      {4, "physics suites (free fall, pendulum, statics, momentum)", criterion_physics, false},
      {5, "gradient checks vs central differences", criterion_gradients, false},
      {6, "domain randomization conformance (1e5 draws)", criterion_randomization, false},
      {7, "learning sanity on the toy tracking task", criterion_learning, false},
      {8, "turning-efficiency trend across morphologies", criterion_trend, true},
      {9, "determinism and serialization", criterion_determinism, false},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!opt.only.empty() && !opt.only.count(c.id)) continue;
    if (c.gated && !opt.trend) {
      std::printf("[SKIP] criterion %d: %s (enable with --trend or FLORES_ACCEPT_TREND=1; "
                  "runtime is hours)\n",
                  c.id, c.name);
      std::fflush(stdout);
      continue;
    }
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(opt, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
