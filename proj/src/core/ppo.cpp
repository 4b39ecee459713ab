#include "core/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace flores {

void PpoConfig::check() const {
  if (clip_ratio <= 0.0 || clip_ratio >= 1.0) throw_invalid("ppo: clip ratio must be in (0,1)");
  if (gamma <= 0.0 || gamma > 1.0) throw_invalid("ppo: gamma must be in (0,1]");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) throw_invalid("ppo: lambda must be in [0,1]");
  if (epochs < 1 || minibatches < 1) throw_invalid("ppo: epochs and minibatches must be >= 1");
  if (learning_rate < 0.0) throw_invalid("ppo: negative learning rate");
  if (grad_norm_clip <= 0.0) throw_invalid("ppo: grad norm clip must be positive");
  if (reward_scale <= 0.0) throw_invalid("ppo: reward scale must be positive");
}

void TrainConfig::check() const {
  ppo.check();
  if (num_envs < 1 || horizon < 1) throw_invalid("train: envs and horizon must be >= 1");
  if (iterations < 1) throw_invalid("train: iterations must be >= 1");
  if (threads < 1) throw_invalid("train: threads must be >= 1");
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Vec3 body_velocity(const Environment& env) {
  const Mat3 R = env.sim_state().base_orientation.toRotationMatrix();
  return R.transpose() * env.sim_state().base_linear_velocity;
}

}  // namespace

Trainer::Trainer(std::shared_ptr<const RobotModel> model, std::shared_ptr<const Terrain> terrain,
                 EnvConfig env_cfg, TrainConfig cfg)
    : model_(std::move(model)), terrain_(std::move(terrain)), env_cfg_(std::move(env_cfg)),
      cfg_(std::move(cfg)),
      policy_(make_policy<float>(cfg_.dims, cfg_.seed, cfg_.init_log_std)),
      adam_(cfg_.ppo.learning_rate), action_rng_(derive_seed(cfg_.seed, "action")),
      update_rng_(derive_seed(cfg_.seed, "update")) {
  cfg_.check();
  env_cfg_.check();
  envs_.reserve(static_cast<size_t>(cfg_.num_envs));
  for (int e = 0; e < cfg_.num_envs; ++e)
    envs_.push_back(std::make_unique<Environment>(model_, terrain_, env_cfg_,
                                                  derive_seed(cfg_.seed, "env", e)));
  buffer_.resize(cfg_.num_envs, cfg_.horizon, cfg_.dims.state_dim(), cfg_.dims.act,
                 cfg_.dims.obs);
}

Trainer::~Trainer() = default;

CurveRow Trainer::collect_rollout() {
  using Mf = nets::Mat<float>;
  const int E = cfg_.num_envs;
  const int obs_dim = cfg_.dims.obs;

  CurveRow row;
  double reward_steps = 0.0;
  double episode_len_sum = 0.0;
  int episode_count = 0;

  Mf states(cfg_.dims.state_dim(), E);
  Mf true_vel(3, E);
  const nets::Vec<float> std_vec = policy_.log_std.value.col(0).array().exp();

  for (int t = 0; t < cfg_.horizon; ++t) {
    for (int e = 0; e < E; ++e) {
      states.col(e) = envs_[e]->state_vector().cast<float>();
      true_vel.col(e) = body_velocity(*envs_[e]).cast<float>();
    }
    const Mf hist = states.bottomRows(cfg_.dims.history_dim());
    const Mf encoded = policy_.encode_const(hist);
    const Mf mean = policy_.actor.evaluate(policy_.actor_input(states.topRows(obs_dim), encoded));
    const Mf values =
        policy_.critic.evaluate(policy_.critic_input(states, true_vel));

    Mf actions(cfg_.dims.act, E);
    for (int e = 0; e < E; ++e)
      for (int j = 0; j < cfg_.dims.act; ++j)
        actions(j, e) =
            mean(j, e) + std_vec[j] * static_cast<float>(action_rng_.normal());
    const nets::Vec<float> logp =
        gaussian_log_prob<float>(mean, policy_.log_std.value.col(0), actions);

    std::vector<StepOutput> outs(static_cast<size_t>(E));
    parallel_for(E, cfg_.threads, [&](int e) {
      ActionVector a;
      a.data = actions.col(e).cast<double>();
      outs[static_cast<size_t>(e)] = envs_[e]->step(a);
    });

    for (int e = 0; e < E; ++e) {
      const StepOutput& out = outs[static_cast<size_t>(e)];
      const int c = buffer_.col(t, e);
      buffer_.states.col(c) = states.col(e);
      buffer_.actions.col(c) = actions.col(e);
      buffer_.log_prob[c] = logp[e];
      buffer_.rewards[c] =
          static_cast<float>(out.reward.total * cfg_.ppo.reward_scale);
      buffer_.values[c] = values(0, e);
      buffer_.terminated[static_cast<size_t>(c)] = out.terminated ? 1 : 0;
      buffer_.truncated[static_cast<size_t>(c)] = out.truncated ? 1 : 0;
      buffer_.true_velocity.col(c) = out.info.base_velocity_body.cast<float>();
      buffer_.next_obs.col(c) = out.info.current_observation.cast<float>();

      row.mean_total_reward += out.reward.total;
      for (int k = 0; k < kNumRewardTerms; ++k)
        row.term_means[static_cast<size_t>(k)] += out.reward[k].weighted;
      reward_steps += 1.0;

      if (out.terminated || out.truncated) {
        episode_len_sum += envs_[e]->episode_step();
        ++episode_count;
        envs_[e]->reset();
      }
    }
  }

  const double inv = reward_steps > 0 ? 1.0 / reward_steps : 0.0;
  row.mean_total_reward *= inv;
  for (auto& v : row.term_means) v *= inv;
  row.mean_episode_length =
      episode_count > 0 ? episode_len_sum / episode_count : cfg_.horizon;
  return row;
}

Trainer::Result Trainer::run(const CheckpointHook& on_checkpoint) {
  Result result;
  for (auto& env : envs_) env->reset();

  for (int iter = 1; iter <= cfg_.iterations; ++iter) {
    CurveRow row = collect_rollout();
    row.iteration = iter;

    // bootstrap values for the states the rollout stopped in
    nets::Mat<float> states(cfg_.dims.state_dim(), cfg_.num_envs);
    nets::Mat<float> true_vel(3, cfg_.num_envs);
    for (int e = 0; e < cfg_.num_envs; ++e) {
      states.col(e) = envs_[e]->state_vector().cast<float>();
      true_vel.col(e) = body_velocity(*envs_[e]).cast<float>();
    }
    const nets::Mat<float> values =
        policy_.critic.evaluate(policy_.critic_input(states, true_vel));
    const nets::Vec<float> bootstrap = values.row(0).transpose();

    last_stats_ = ppo_update(policy_, adam_, buffer_, bootstrap, cfg_.ppo, update_rng_);
    row.value_loss = last_stats_.value_loss;
    row.encoder_velocity_error = last_stats_.encoder_velocity_error;
    result.curve.push_back(row);
    result.iterations_run = iter;

    const bool checkpoint_due =
        cfg_.checkpoint_every > 0 && iter % cfg_.checkpoint_every == 0;
    if (on_checkpoint && (checkpoint_due || iter == cfg_.iterations))
      on_checkpoint(iter, policy_, result.curve);

    if (cfg_.stop_at_tracking_reward > 0.0 && cfg_.eval_every > 0 &&
        iter % cfg_.eval_every == 0) {
      const double tracking =
          evaluate_tracking(cfg_.eval_episodes, derive_seed(cfg_.seed, "stop-eval", iter));
      result.final_tracking_reward = tracking;
      if (tracking >= cfg_.stop_at_tracking_reward) {
        result.reached_target = true;
        if (on_checkpoint && !checkpoint_due) on_checkpoint(iter, policy_, result.curve);
        break;
      }
    }
  }
  return result;
}

double Trainer::evaluate_tracking(int episodes, uint64_t seed) {
  double sum = 0.0;
  long steps = 0;
  Environment env(model_, terrain_, env_cfg_, derive_seed(seed, "tracking-eval"));
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(derive_seed(seed, "tracking-eval-episode", static_cast<uint64_t>(ep)));
    while (true) {
      const nets::Vec<float> state = env.state_vector().cast<float>();
      const nets::Vec<float> mean = policy_.act_mean(state);
      ActionVector a;
      a.data = mean.cast<double>();
      const StepOutput out = env.step(a);
      sum += out.reward[0].weighted;
      ++steps;
      if (out.terminated || out.truncated) break;
    }
  }
  return steps > 0 ? sum / steps : 0.0;
}

}  // namespace flores
