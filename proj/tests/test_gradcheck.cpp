#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "core/ppo.hpp"

// Central-difference check of the full PPO loss gradient (actor, critic,
// encoder, log-std) on a deliberately tiny double-precision network.

using namespace flores;

namespace {

NetDims check_dims() {
  NetDims d;
  d.obs = 4;
  d.history_steps = 2;
  d.act = 2;
  d.latent = 3;
  d.encoder_hidden = {4};
  d.actor_hidden = {4};
  d.critic_hidden = {4};
  return d;
}

PpoBatch<double> make_batch(const NetDims& d, int B, uint64_t seed) {
  Rng rng(seed);
  PpoBatch<double> b;
  b.states.resize(d.state_dim(), B);
  b.actions.resize(d.act, B);
  b.log_prob_old.resize(B);
  b.advantages.resize(B);
  b.returns.resize(B);
  b.true_velocity.resize(3, B);
  b.next_obs.resize(d.obs, B);
  for (int c = 0; c < B; ++c) {
    for (int i = 0; i < d.state_dim(); ++i) b.states(i, c) = rng.uniform(-1, 1);
    for (int i = 0; i < d.act; ++i) b.actions(i, c) = rng.uniform(-1, 1);
    b.log_prob_old[c] = rng.uniform(-2.5, -1.5);
    b.advantages[c] = rng.uniform(-1, 1);
    b.returns[c] = rng.uniform(-1, 1);
    for (int i = 0; i < 3; ++i) b.true_velocity(i, c) = rng.uniform(-1, 1);
    for (int i = 0; i < d.obs; ++i) b.next_obs(i, c) = rng.uniform(-1, 1);
  }
  return b;
}

}  // namespace

TEST_CASE("analytic PPO gradients match central finite differences to 1e-4") {
  const NetDims dims = check_dims();
  auto policy = make_policy<double>(dims, 2024, -0.2);

  int param_count = 0;
  policy.visit_trainable(
      [&](nets::Tensor<double>& t) { param_count += static_cast<int>(t.value.size()); });
  CHECK(param_count <= 200);

  const PpoBatch<double> batch = make_batch(dims, 16, 99);
  PpoConfig cfg;
  cfg.value_coef = 0.7;
  cfg.entropy_coef = 0.01;
  cfg.encoder_velocity_coef = 1.0;
  cfg.encoder_latent_coef = 0.3;

  policy.zero_grad();
  ppo_loss(policy, batch, cfg, true);

  std::vector<nets::Tensor<double>*> tensors;
  policy.visit_trainable([&](nets::Tensor<double>& t) { tensors.push_back(&t); });

  const double h = 1e-6;
  double max_rel_err = 0.0;
  for (auto* t : tensors) {
    for (Eigen::Index i = 0; i < t->value.rows(); ++i) {
      for (Eigen::Index j = 0; j < t->value.cols(); ++j) {
        const double saved = t->value(i, j);
        t->value(i, j) = saved + h;
        const double up = static_cast<double>(ppo_loss(policy, batch, cfg, false).total);
        t->value(i, j) = saved - h;
        const double dn = static_cast<double>(ppo_loss(policy, batch, cfg, false).total);
        t->value(i, j) = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double an = t->grad(i, j);
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        max_rel_err = std::max(max_rel_err, rel);
      }
    }
  }
  CHECK(max_rel_err < 1e-4);
}

TEST_CASE("gradients of each loss component check out in isolation") {
  const NetDims dims = check_dims();
  const PpoBatch<double> batch = make_batch(dims, 8, 7);

  struct Case {
    const char* name;
    PpoConfig cfg;
  };
  std::vector<Case> cases;
  {
    Case c{"surrogate-only", {}};
    c.cfg.value_coef = 0;
    c.cfg.entropy_coef = 0;
    c.cfg.encoder_velocity_coef = 0;
    c.cfg.encoder_latent_coef = 0;
    cases.push_back(c);
  }
  {
    Case c{"value-only", {}};
    c.cfg.value_coef = 1.0;
    c.cfg.entropy_coef = 0;
    c.cfg.encoder_velocity_coef = 0;
    c.cfg.encoder_latent_coef = 0;
    cases.push_back(c);
  }
  {
    Case c{"encoder-only", {}};
    c.cfg.value_coef = 0;
    c.cfg.entropy_coef = 0;
    c.cfg.encoder_velocity_coef = 1.0;
    c.cfg.encoder_latent_coef = 1.0;
    cases.push_back(c);
  }

  for (auto& kase : cases) {
    auto policy = make_policy<double>(dims, 555, -0.1);
    policy.zero_grad();
    ppo_loss(policy, batch, kase.cfg, true);

    std::vector<nets::Tensor<double>*> tensors;
    policy.visit_trainable([&](nets::Tensor<double>& t) { tensors.push_back(&t); });
    const double h = 1e-6;
    double max_rel = 0.0;
    for (auto* t : tensors) {
      for (Eigen::Index i = 0; i < t->value.size(); ++i) {
        double* v = t->value.data() + i;
        const double saved = *v;
        *v = saved + h;
        const double up = static_cast<double>(ppo_loss(policy, batch, kase.cfg, false).total);
        *v = saved - h;
        const double dn = static_cast<double>(ppo_loss(policy, batch, kase.cfg, false).total);
        *v = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double an = t->grad.data()[i];
        max_rel = std::max(max_rel,
                           std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
      }
    }
    CHECK_MESSAGE(max_rel < 1e-4, kase.name);
  }
}
