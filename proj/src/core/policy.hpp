#pragma once

#include <vector>

#include "core/nets.hpp"
#include "core/rng.hpp"
#include "core/types.hpp"

namespace flores {

struct NetDims {
  int obs = kObsDim;
  int history_steps = kHistorySteps;
  int act = kNumJoints;
  int latent = 16;
  std::vector<int> encoder_hidden = {256, 128};
  std::vector<int> actor_hidden = {256, 128};
  std::vector<int> critic_hidden = {256, 128};

  int history_dim() const { return obs * history_steps; }
  int state_dim() const { return obs * (1 + history_steps); }
  int actor_input_dim() const { return obs + 3 + latent; }
  int critic_input_dim() const { return state_dim() + 3; }
};

// fixed per-entry observation scaling applied at the network inputs; the
// environment observation itself stays in physical units
nets::Vec<double> default_observation_scale(const NetDims& dims);

// History encoder plus actor-critic. The encoder maps the 636-entry history
// block to an estimated base velocity and a latent; the actor consumes the
// current observation together with both; the critic sees the full state
// vector plus the simulator-true base velocity.
template <typename Scalar>
struct PolicyNets {
  NetDims dims;
  nets::Mlp<Scalar> encoder;  // history -> 3 + latent
  nets::Mlp<Scalar> actor;    // obs + 3 + latent -> act means
  nets::Mlp<Scalar> critic;   // state + 3 -> 1
  nets::Tensor<Scalar> log_std;            // act x 1
  nets::Tensor<Scalar> target_projection;  // latent x obs, fixed (never trained)
  nets::Vec<Scalar> obs_scale;             // obs x 1
  nets::Vec<Scalar> history_scale;         // history_dim x 1 (tiled obs_scale)
  nets::Vec<Scalar> state_scale;           // state_dim x 1

  void visit_trainable(const std::function<void(nets::Tensor<Scalar>&)>& fn) {
    encoder.visit(fn);
    actor.visit(fn);
    fn(log_std);
    critic.visit(fn);
  }

  void zero_grad() {
    encoder.zero_grad();
    actor.zero_grad();
    critic.zero_grad();
    log_std.grad.setZero();
  }

  // (v_hat; latent) stacked, one column per sample
  nets::Mat<Scalar> encode(const nets::Mat<Scalar>& history) {
    return encoder.forward((history.array().colwise() * history_scale.array()).matrix());
  }
  nets::Mat<Scalar> encode_const(const nets::Mat<Scalar>& history) const {
    return encoder.evaluate((history.array().colwise() * history_scale.array()).matrix());
  }

  nets::Mat<Scalar> actor_input(const nets::Mat<Scalar>& obs,
                                const nets::Mat<Scalar>& encoded) const {
    nets::Mat<Scalar> in(dims.actor_input_dim(), obs.cols());
    in.topRows(dims.obs) = (obs.array().colwise() * obs_scale.array()).matrix();
    in.bottomRows(3 + dims.latent) = encoded;
    return in;
  }

  nets::Mat<Scalar> critic_input(const nets::Mat<Scalar>& state,
                                 const nets::Mat<Scalar>& true_velocity) const {
    nets::Mat<Scalar> in(dims.critic_input_dim(), state.cols());
    in.topRows(dims.state_dim()) = (state.array().colwise() * state_scale.array()).matrix();
    in.bottomRows(3) = true_velocity;
    return in;
  }

  // deterministic action from a full state vector (evaluation path)
  nets::Vec<Scalar> act_mean(const nets::Vec<Scalar>& state) const {
    const nets::Mat<Scalar> obs = state.topRows(dims.obs);
    const nets::Mat<Scalar> hist = state.bottomRows(dims.history_dim());
    const nets::Mat<Scalar> encoded = encode_const(hist);
    return actor.evaluate(actor_input(obs, encoded));
  }
};

template <typename Scalar>
PolicyNets<Scalar> make_policy(const NetDims& dims, uint64_t seed,
                               double init_log_std = 0.0) {
  Rng rng(derive_seed(seed, "policy-init"));
  PolicyNets<Scalar> p;
  p.dims = dims;

  std::vector<int> enc_sizes = {dims.history_dim()};
  enc_sizes.insert(enc_sizes.end(), dims.encoder_hidden.begin(), dims.encoder_hidden.end());
  enc_sizes.push_back(3 + dims.latent);
  p.encoder = nets::Mlp<Scalar>(enc_sizes, rng);

  std::vector<int> act_sizes = {dims.actor_input_dim()};
  act_sizes.insert(act_sizes.end(), dims.actor_hidden.begin(), dims.actor_hidden.end());
  act_sizes.push_back(dims.act);
  p.actor = nets::Mlp<Scalar>(act_sizes, rng, 0.1);

  std::vector<int> critic_sizes = {dims.critic_input_dim()};
  critic_sizes.insert(critic_sizes.end(), dims.critic_hidden.begin(),
                      dims.critic_hidden.end());
  critic_sizes.push_back(1);
  p.critic = nets::Mlp<Scalar>(critic_sizes, rng);

  p.log_std.init_zero("log_std", dims.act, 1);
  p.log_std.value.setConstant(static_cast<Scalar>(init_log_std));

  // fixed random projection defines the latent alignment target
  p.target_projection.init_zero("target_projection", dims.latent, dims.obs);
  const double bound = std::sqrt(3.0 / dims.obs);
  for (int i = 0; i < dims.latent; ++i)
    for (int j = 0; j < dims.obs; ++j)
      p.target_projection.value(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));

  const nets::Vec<double> scale = default_observation_scale(dims);
  p.obs_scale = scale.template cast<Scalar>();
  p.history_scale.resize(dims.history_dim());
  for (int h = 0; h < dims.history_steps; ++h)
    p.history_scale.segment(h * dims.obs, dims.obs) = p.obs_scale;
  p.state_scale.resize(dims.state_dim());
  p.state_scale.topRows(dims.obs) = p.obs_scale;
  p.state_scale.bottomRows(dims.history_dim()) = p.history_scale;
  return p;
}

// diagonal Gaussian log-density
template <typename Scalar>
nets::Vec<Scalar> gaussian_log_prob(const nets::Mat<Scalar>& mean,
                                    const nets::Vec<Scalar>& log_std,
                                    const nets::Mat<Scalar>& actions) {
  const nets::Vec<Scalar> inv_var = (-2.0 * log_std.array()).exp().matrix();
  const nets::Mat<Scalar> diff = actions - mean;
  nets::Vec<Scalar> lp = nets::Vec<Scalar>::Constant(
      mean.cols(),
      Scalar(-0.5 * mean.rows() * std::log(2.0 * kPi)) - log_std.sum());
  lp.array() -=
      Scalar(0.5) * (diff.array().square().colwise() * inv_var.array()).colwise().sum().transpose();
  return lp;
}

}  // namespace flores
