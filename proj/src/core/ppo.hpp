#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "core/env.hpp"
#include "core/gae.hpp"
#include "core/policy.hpp"

namespace flores {

struct PpoConfig {
  double clip_ratio = 0.2;
  double value_coef = 1.0;
  double entropy_coef = 0.005;
  double encoder_velocity_coef = 1.0;
  double encoder_latent_coef = 0.1;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 4;
  int minibatches = 4;
  double learning_rate = 1e-3;
  double grad_norm_clip = 1.0;
  double log_std_min = -4.0;
  double log_std_max = 1.0;
  bool normalize_advantages = true;
  // conditioning factor on rewards entering GAE; logs stay in table units
  double reward_scale = 0.02;

  void check() const;
};

template <typename Scalar>
struct RolloutBuffer {
  int num_envs = 0, horizon = 0;
  nets::Mat<Scalar> states;     // state_dim x (horizon*num_envs), time-major
  nets::Mat<Scalar> actions;    // act x N
  nets::Vec<Scalar> log_prob;   // N
  nets::Vec<Scalar> rewards;    // N (already reward-scaled)
  nets::Vec<Scalar> values;     // N
  std::vector<uint8_t> terminated, truncated;
  nets::Mat<Scalar> true_velocity;  // 3 x N, body frame
  nets::Mat<Scalar> next_obs;       // obs x N, undelayed next observation
  nets::Vec<Scalar> advantages, returns;

  void resize(int envs, int horizon_steps, int state_dim, int act_dim, int obs_dim) {
    num_envs = envs;
    horizon = horizon_steps;
    const int n = envs * horizon_steps;
    states.resize(state_dim, n);
    actions.resize(act_dim, n);
    log_prob.resize(n);
    rewards.resize(n);
    values.resize(n);
    terminated.assign(static_cast<size_t>(n), 0);
    truncated.assign(static_cast<size_t>(n), 0);
    true_velocity.resize(3, n);
    next_obs.resize(obs_dim, n);
    advantages.resize(n);
    returns.resize(n);
  }

  int col(int t, int e) const { return t * num_envs + e; }
  int size() const { return num_envs * horizon; }
};

// advantages/returns in place; bootstrap_values holds V(s_T) per env
template <typename Scalar>
void compute_advantages(RolloutBuffer<Scalar>& buffer, const nets::Vec<Scalar>& bootstrap_values,
                        const PpoConfig& cfg) {
  nets::Vec<Scalar> r(buffer.horizon), v(buffer.horizon), adv, ret;
  std::vector<uint8_t> done(static_cast<size_t>(buffer.horizon));
  for (int e = 0; e < buffer.num_envs; ++e) {
    for (int t = 0; t < buffer.horizon; ++t) {
      const int c = buffer.col(t, e);
      r[t] = buffer.rewards[c];
      v[t] = buffer.values[c];
      // a time-limit cut bootstraps through the value of the current state
      if (buffer.truncated[static_cast<size_t>(c)])
        r[t] += static_cast<Scalar>(cfg.gamma) * buffer.values[c];
      done[static_cast<size_t>(t)] =
          buffer.terminated[static_cast<size_t>(c)] || buffer.truncated[static_cast<size_t>(c)];
    }
    gae<Scalar>(r, v, bootstrap_values[e], done, static_cast<Scalar>(cfg.gamma),
                static_cast<Scalar>(cfg.gae_lambda), &adv, &ret);
    for (int t = 0; t < buffer.horizon; ++t) {
      const int c = buffer.col(t, e);
      buffer.advantages[c] = adv[t];
      buffer.returns[c] = ret[t];
    }
  }
}

template <typename Scalar>
struct PpoBatch {
  nets::Mat<Scalar> states;
  nets::Mat<Scalar> actions;
  nets::Vec<Scalar> log_prob_old;
  nets::Vec<Scalar> advantages;
  nets::Vec<Scalar> returns;
  nets::Mat<Scalar> true_velocity;
  nets::Mat<Scalar> next_obs;
};

template <typename Scalar>
struct PpoLossParts {
  Scalar total = 0, surrogate = 0, value = 0, entropy = 0;
  Scalar encoder_velocity = 0, encoder_latent = 0;
};

// one forward (and optional backward) pass over a batch; gradients accumulate
// into the tensors when with_grad is set
template <typename Scalar>
PpoLossParts<Scalar> ppo_loss(PolicyNets<Scalar>& nets, const PpoBatch<Scalar>& batch,
                              const PpoConfig& cfg, bool with_grad) {
  using M = nets::Mat<Scalar>;
  using V = nets::Vec<Scalar>;
  const int B = static_cast<int>(batch.states.cols());
  const int obs_dim = nets.dims.obs;
  const Scalar invB = Scalar(1) / Scalar(B);

  const M obs = batch.states.topRows(obs_dim);
  const M hist = batch.states.bottomRows(nets.dims.history_dim());

  M encoded = nets.encode(hist);
  const M actor_in = nets.actor_input(obs, encoded);
  const M mean = nets.actor.forward(actor_in);
  const M critic_in = nets.critic_input(batch.states, batch.true_velocity);
  const M value = nets.critic.forward(critic_in);

  const V log_std = nets.log_std.value.col(0);
  const V std = log_std.array().exp().matrix();
  const V inv_var = (-2.0 * log_std.array()).exp().matrix();

  const V logp = gaussian_log_prob<Scalar>(mean, log_std, batch.actions);
  const V ratio = (logp - batch.log_prob_old).array().exp().matrix();

  const Scalar lo = Scalar(1.0 - cfg.clip_ratio), hi = Scalar(1.0 + cfg.clip_ratio);
  PpoLossParts<Scalar> parts;
  V surrogate_grad_coeff = V::Zero(B);  // d(-surrogate)/dlogp per sample
  Scalar surr_sum = 0;
  for (int i = 0; i < B; ++i) {
    const Scalar a = batch.advantages[i];
    const Scalar unclipped = ratio[i] * a;
    const Scalar clipped = std::clamp(ratio[i], lo, hi) * a;
    if (unclipped <= clipped) {
      surr_sum += unclipped;
      surrogate_grad_coeff[i] = -invB * ratio[i] * a;
    } else {
      surr_sum += clipped;  // saturated branch: zero gradient
    }
  }
  parts.surrogate = -surr_sum * invB;

  const V verr = (value.row(0).transpose() - batch.returns);
  parts.value = Scalar(0.5) * verr.squaredNorm() * invB;

  parts.entropy =
      log_std.sum() + Scalar(0.5 * mean.rows() * (1.0 + std::log(2.0 * kPi)));

  const M v_hat = encoded.topRows(3);
  const M latent = encoded.bottomRows(nets.dims.latent);
  const M v_diff = v_hat - batch.true_velocity;
  parts.encoder_velocity = v_diff.squaredNorm() * invB;

  const M target =
      nets.target_projection.value * (batch.next_obs.array().colwise() * nets.obs_scale.array()).matrix();
  const M l_diff = latent - target;
  parts.encoder_latent = l_diff.squaredNorm() * invB;

  parts.total = parts.surrogate + Scalar(cfg.value_coef) * parts.value -
                Scalar(cfg.entropy_coef) * parts.entropy +
                Scalar(cfg.encoder_velocity_coef) * parts.encoder_velocity +
                Scalar(cfg.encoder_latent_coef) * parts.encoder_latent;

  if (!with_grad) return parts;

  // actor head: surrogate through logp, plus nothing else touches the mean
  const M diff = batch.actions - mean;
  M dmean = M::Zero(mean.rows(), B);
  V dlog_std = V::Zero(mean.rows());
  for (int i = 0; i < B; ++i) {
    const Scalar coeff = surrogate_grad_coeff[i];
    if (coeff != Scalar(0)) {
      dmean.col(i) = coeff * diff.col(i).cwiseProduct(inv_var);
      dlog_std += coeff * (diff.col(i).array().square() * inv_var.array() - 1.0).matrix();
    }
  }
  dlog_std.array() -= Scalar(cfg.entropy_coef);  // d(-c_e * entropy)/dlog_std
  nets.log_std.grad.col(0) += dlog_std;

  const M d_actor_in = nets.actor.backward(dmean);

  // critic head
  M dvalue(1, B);
  dvalue.row(0) = (Scalar(cfg.value_coef) * invB) * verr.transpose();
  nets.critic.backward(dvalue);

  // encoder head: its own losses plus the actor pathway
  M d_encoded = M::Zero(3 + nets.dims.latent, B);
  d_encoded.topRows(3) = (Scalar(2.0 * cfg.encoder_velocity_coef) * invB) * v_diff;
  d_encoded.bottomRows(nets.dims.latent) =
      (Scalar(2.0 * cfg.encoder_latent_coef) * invB) * l_diff;
  d_encoded += d_actor_in.bottomRows(3 + nets.dims.latent);
  nets.encoder.backward(d_encoded);

  return parts;
}

struct PpoUpdateStats {
  double loss = 0, surrogate = 0, value_loss = 0, entropy = 0;
  double encoder_velocity_error = 0, encoder_latent_loss = 0;
  double grad_norm = 0;
  double advantage_mean_abs = 0, advantage_std = 0;  // post-normalization
};

// full clipped-surrogate update over the buffer
template <typename Scalar>
PpoUpdateStats ppo_update(PolicyNets<Scalar>& nets, nets::Adam<Scalar>& adam,
                          RolloutBuffer<Scalar>& buffer,
                          const nets::Vec<Scalar>& bootstrap_values, const PpoConfig& cfg,
                          Rng& rng) {
  cfg.check();
  compute_advantages(buffer, bootstrap_values, cfg);

  if (cfg.normalize_advantages) {
    const Scalar mean = buffer.advantages.mean();
    const Scalar var =
        (buffer.advantages.array() - mean).square().sum() / Scalar(buffer.size());
    const Scalar stddev = std::sqrt(std::max(var, Scalar(1e-12)));
    buffer.advantages = ((buffer.advantages.array() - mean) / (stddev + Scalar(1e-8))).matrix();
  }

  PpoUpdateStats stats;
  {
    const Scalar mean = buffer.advantages.mean();
    const Scalar var =
        (buffer.advantages.array() - mean).square().sum() / Scalar(buffer.size());
    stats.advantage_mean_abs = std::abs(static_cast<double>(mean));
    stats.advantage_std = std::sqrt(static_cast<double>(var));
  }

  const int n = buffer.size();
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

  const int mb_count = std::max(1, cfg.minibatches);
  const int mb_size = n / mb_count;
  if (mb_size < 1) throw_invalid("ppo: minibatch size underflow");

  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the trainer rng keeps runs reproducible
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(i) + 1));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    for (int mb = 0; mb < mb_count; ++mb) {
      PpoBatch<Scalar> batch;
      batch.states.resize(buffer.states.rows(), mb_size);
      batch.actions.resize(buffer.actions.rows(), mb_size);
      batch.log_prob_old.resize(mb_size);
      batch.advantages.resize(mb_size);
      batch.returns.resize(mb_size);
      batch.true_velocity.resize(3, mb_size);
      batch.next_obs.resize(buffer.next_obs.rows(), mb_size);
      for (int k = 0; k < mb_size; ++k) {
        const int c = order[static_cast<size_t>(mb * mb_size + k)];
        batch.states.col(k) = buffer.states.col(c);
        batch.actions.col(k) = buffer.actions.col(c);
        batch.log_prob_old[k] = buffer.log_prob[c];
        batch.advantages[k] = buffer.advantages[c];
        batch.returns[k] = buffer.returns[c];
        batch.true_velocity.col(k) = buffer.true_velocity.col(c);
        batch.next_obs.col(k) = buffer.next_obs.col(c);
      }

      nets.zero_grad();
      const PpoLossParts<Scalar> parts = ppo_loss(nets, batch, cfg, true);
      if (!std::isfinite(static_cast<double>(parts.total)))
        throw Error(ErrorCode::Runtime, "ppo: non-finite loss; update aborted");

      double norm_sq = 0.0;
      nets.visit_trainable([&](nets::Tensor<Scalar>& t) {
        norm_sq += static_cast<double>(t.grad.squaredNorm());
      });
      const double norm = std::sqrt(norm_sq);
      const double scale = norm > cfg.grad_norm_clip ? cfg.grad_norm_clip / norm : 1.0;

      adam.begin_step();
      nets.visit_trainable([&](nets::Tensor<Scalar>& t) {
        if (scale != 1.0) t.grad *= static_cast<Scalar>(scale);
        adam.update(t);
      });
      nets.log_std.value = nets.log_std.value.array()
                               .max(Scalar(cfg.log_std_min))
                               .min(Scalar(cfg.log_std_max))
                               .matrix();

      stats.loss += static_cast<double>(parts.total);
      stats.surrogate += static_cast<double>(parts.surrogate);
      stats.value_loss += static_cast<double>(parts.value);
      stats.entropy += static_cast<double>(parts.entropy);
      stats.encoder_velocity_error += static_cast<double>(parts.encoder_velocity);
      stats.encoder_latent_loss += static_cast<double>(parts.encoder_latent);
      stats.grad_norm += norm;
      ++updates;
    }
  }
  const double inv = updates > 0 ? 1.0 / updates : 0.0;
  stats.loss *= inv;
  stats.surrogate *= inv;
  stats.value_loss *= inv;
  stats.entropy *= inv;
  stats.encoder_velocity_error *= inv;
  stats.encoder_latent_loss *= inv;
  stats.grad_norm *= inv;
  return stats;
}

struct TrainConfig {
  PpoConfig ppo;
  NetDims dims;
  int num_envs = 128;
  int horizon = 24;
  int iterations = 1500;
  int checkpoint_every = 250;
  uint64_t seed = 0;
  int threads = 1;
  double init_log_std = 0.0;
  // optional early stop: mean weighted linear-velocity tracking reward over a
  // deterministic evaluation reaching this value ends training
  double stop_at_tracking_reward = -1.0;
  int eval_every = 0;
  int eval_episodes = 8;

  void check() const;
};

struct CurveRow {
  int iteration = 0;
  double mean_total_reward = 0.0;
  std::array<double, kNumRewardTerms> term_means{};
  double value_loss = 0.0;
  double encoder_velocity_error = 0.0;
  double mean_episode_length = 0.0;
};

class Trainer {
 public:
  Trainer(std::shared_ptr<const RobotModel> model, std::shared_ptr<const Terrain> terrain,
          EnvConfig env_cfg, TrainConfig cfg);
  ~Trainer();

  struct Result {
    std::vector<CurveRow> curve;
    int iterations_run = 0;
    bool reached_target = false;
    double final_tracking_reward = -1.0;
  };

  using CheckpointHook = std::function<void(int iteration, const PolicyNets<float>& policy,
                                            const std::vector<CurveRow>& curve)>;
  Result run(const CheckpointHook& on_checkpoint = {});

  PolicyNets<float>& policy() { return policy_; }
  const PolicyNets<float>& policy_nets() const { return policy_; }
  const TrainConfig& config() const { return cfg_; }

  // mean weighted linear-velocity tracking reward under the deterministic
  // policy, averaged over complete episodes
  double evaluate_tracking(int episodes, uint64_t seed);

 private:
  CurveRow collect_rollout();

  std::shared_ptr<const RobotModel> model_;
  std::shared_ptr<const Terrain> terrain_;
  EnvConfig env_cfg_;
  TrainConfig cfg_;
  PolicyNets<float> policy_;
  nets::Adam<float> adam_;
  Rng action_rng_;
  Rng update_rng_;
  std::vector<std::unique_ptr<Environment>> envs_;
  RolloutBuffer<float> buffer_;
  PpoUpdateStats last_stats_;
};

}  // namespace flores
