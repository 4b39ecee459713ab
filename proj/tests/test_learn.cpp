#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "core/checkpoint.hpp"
#include "core/gae.hpp"
#include "core/morphology.hpp"
#include "core/ppo.hpp"
#include "core/terrain.hpp"

using namespace flores;

namespace {

NetDims tiny_dims() {
  NetDims d;
  d.obs = 5;
  d.history_steps = 3;
  d.act = 2;
  d.latent = 3;
  d.encoder_hidden = {6};
  d.actor_hidden = {6};
  d.critic_hidden = {6};
  return d;
}

template <typename Scalar>
PpoBatch<Scalar> random_batch(const NetDims& d, int B, uint64_t seed) {
  Rng rng(seed);
  PpoBatch<Scalar> b;
  b.states.resize(d.state_dim(), B);
  b.actions.resize(d.act, B);
  b.log_prob_old.resize(B);
  b.advantages.resize(B);
  b.returns.resize(B);
  b.true_velocity.resize(3, B);
  b.next_obs.resize(d.obs, B);
  for (int c = 0; c < B; ++c) {
    for (int i = 0; i < d.state_dim(); ++i)
      b.states(i, c) = static_cast<Scalar>(rng.uniform(-1, 1));
    for (int i = 0; i < d.act; ++i) b.actions(i, c) = static_cast<Scalar>(rng.uniform(-1, 1));
    b.advantages[c] = static_cast<Scalar>(rng.uniform(-1, 1));
    b.returns[c] = static_cast<Scalar>(rng.uniform(-1, 1));
    for (int i = 0; i < 3; ++i) b.true_velocity(i, c) = static_cast<Scalar>(rng.uniform(-1, 1));
    for (int i = 0; i < d.obs; ++i) b.next_obs(i, c) = static_cast<Scalar>(rng.uniform(-1, 1));
  }
  return b;
}

}  // namespace

TEST_CASE("gae: zero rewards and values give zero advantages") {
  nets::Vec<double> r = nets::Vec<double>::Zero(5), v = nets::Vec<double>::Zero(5);
  std::vector<uint8_t> done(5, 0);
  nets::Vec<double> adv, ret;
  gae<double>(r, v, 0.0, done, 0.99, 0.95, &adv, &ret);
  CHECK(adv.cwiseAbs().maxCoeff() == 0.0);
  CHECK(ret.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gae: single terminal step with r=1, V=0 has advantage 1") {
  nets::Vec<double> r(1), v(1);
  r[0] = 1.0;
  v[0] = 0.0;
  std::vector<uint8_t> done = {1};
  nets::Vec<double> adv, ret;
  gae<double>(r, v, 123.0, done, 0.99, 0.95, &adv, &ret);
  CHECK(adv[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ret[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gae: two-step hand recursion gives 1.9405") {
  nets::Vec<double> r(2), v(2);
  r << 1.0, 1.0;
  v << 0.0, 0.0;
  std::vector<uint8_t> done = {0, 1};
  nets::Vec<double> adv, ret;
  gae<double>(r, v, 0.0, done, 0.99, 0.95, &adv, &ret);
  CHECK(adv[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(adv[0] == doctest::Approx(1.0 + 0.99 * 0.95 * 1.0).epsilon(1e-15));
}

TEST_CASE("encoder with zeroed weights maps anything to zero") {
  auto p = make_policy<double>(tiny_dims(), 42);
  p.encoder.visit([](nets::Tensor<double>& t) { t.value.setZero(); });
  nets::Mat<double> h = nets::Mat<double>::Random(p.dims.history_dim(), 4);
  CHECK(p.encode_const(h).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encoder evaluation is deterministic") {
  auto p = make_policy<double>(tiny_dims(), 42);
  const nets::Mat<double> h = nets::Mat<double>::Random(p.dims.history_dim(), 3);
  CHECK(p.encode_const(h) == p.encode_const(h));
}

TEST_CASE("single linear layer reproduces a hand-computed reduction") {
  Rng rng(0);
  nets::Mlp<double> net({3, 2}, rng);
  net.visit([](nets::Tensor<double>& t) {
    if (t.name == "w0") t.value << 1, 1, 1, 0.5, -1, 2;  // rows: [1 1 1], [0.5 -1 2]
    if (t.name == "b0") t.value << 0.25, -0.5;
  });
  nets::Mat<double> x(3, 1);
  x << 2.0, 3.0, -1.0;
  const nets::Mat<double> y = net.evaluate(x);
  CHECK(y(0, 0) == doctest::Approx(2 + 3 - 1 + 0.25).epsilon(1e-15));
  CHECK(y(1, 0) == doctest::Approx(1.0 - 3.0 - 2.0 - 0.5).epsilon(1e-15));
}

TEST_CASE("learning rate zero leaves every parameter bit-identical") {
  auto p = make_policy<double>(tiny_dims(), 7);
  std::vector<nets::Mat<double>> before;
  p.visit_trainable([&](nets::Tensor<double>& t) { before.push_back(t.value); });

  RolloutBuffer<double> buffer;
  buffer.resize(2, 6, p.dims.state_dim(), p.dims.act, p.dims.obs);
  const auto batch = random_batch<double>(p.dims, buffer.size(), 5);
  buffer.states = batch.states;
  buffer.actions = batch.actions;
  buffer.rewards = batch.returns;
  buffer.values.setZero();
  buffer.true_velocity = batch.true_velocity;
  buffer.next_obs = batch.next_obs;
  // log probs consistent with the current policy keeps ratios near 1
  {
    const auto obs = buffer.states.topRows(p.dims.obs);
    const auto hist = buffer.states.bottomRows(p.dims.history_dim());
    const auto mean = p.actor.evaluate(p.actor_input(obs, p.encode_const(hist)));
    buffer.log_prob = gaussian_log_prob<double>(mean, p.log_std.value.col(0), buffer.actions);
  }

  PpoConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 2;
  cfg.minibatches = 2;
  nets::Adam<double> adam(cfg.learning_rate);
  Rng rng(3);
  ppo_update<double>(p, adam, buffer, nets::Vec<double>(nets::Vec<double>::Zero(2)), cfg, rng);

  size_t i = 0;
  p.visit_trainable([&](nets::Tensor<double>& t) {
    CHECK(t.value == before[i]);
    ++i;
  });
}

TEST_CASE("equal advantages, ratios at 1: surrogate gradient is the log-prob gradient") {
  // with r=1 and all advantages equal to A, the clipped surrogate reduces to
  // -A * mean(r), whose gradient through logp is -A * dlogp; compare against
  // a direct logp backward pass
  auto p = make_policy<double>(tiny_dims(), 11);
  auto q = make_policy<double>(tiny_dims(), 11);
  const int B = 8;
  auto batch = random_batch<double>(p.dims, B, 9);
  const double A = 0.7;
  batch.advantages.setConstant(A);
  {
    const auto obs = batch.states.topRows(p.dims.obs);
    const auto hist = batch.states.bottomRows(p.dims.history_dim());
    const auto mean = p.actor.evaluate(p.actor_input(obs, p.encode_const(hist)));
    batch.log_prob_old = gaussian_log_prob<double>(mean, p.log_std.value.col(0), batch.actions);
  }

  PpoConfig cfg;
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;
  cfg.encoder_velocity_coef = 0.0;
  cfg.encoder_latent_coef = 0.0;
  p.zero_grad();
  ppo_loss(p, batch, cfg, true);

  // by-hand -A * mean(logp) gradient on the twin policy
  const auto obs = batch.states.topRows(q.dims.obs);
  const auto hist = batch.states.bottomRows(q.dims.history_dim());
  const auto enc = q.encode(hist);
  const auto mean = q.actor.forward(q.actor_input(obs, enc));
  const nets::Vec<double> inv_var = (-2.0 * q.log_std.value.col(0).array()).exp().matrix();
  nets::Mat<double> dmean(q.dims.act, B);
  for (int c = 0; c < B; ++c)
    dmean.col(c) = (-A / B) * (batch.actions.col(c) - mean.col(c)).cwiseProduct(inv_var);
  q.zero_grad();
  const auto d_actor_in = q.actor.backward(dmean);
  q.encoder.backward(d_actor_in.bottomRows(3 + q.dims.latent));

  std::vector<nets::Mat<double>> got, want;
  p.actor.visit([&](nets::Tensor<double>& t) { got.push_back(t.grad); });
  q.actor.visit([&](nets::Tensor<double>& t) { want.push_back(t.grad); });
  p.encoder.visit([&](nets::Tensor<double>& t) { got.push_back(t.grad); });
  q.encoder.visit([&](nets::Tensor<double>& t) { want.push_back(t.grad); });
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i)
    CHECK((got[i] - want[i]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("clipped samples on the disadvantageous side contribute zero actor gradient") {
  auto p = make_policy<double>(tiny_dims(), 13);
  const int B = 4;
  auto batch = random_batch<double>(p.dims, B, 17);
  {
    const auto obs = batch.states.topRows(p.dims.obs);
    const auto hist = batch.states.bottomRows(p.dims.history_dim());
    const auto mean = p.actor.evaluate(p.actor_input(obs, p.encode_const(hist)));
    batch.log_prob_old = gaussian_log_prob<double>(mean, p.log_std.value.col(0), batch.actions);
  }
  PpoConfig cfg;
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;
  cfg.encoder_velocity_coef = 0.0;
  cfg.encoder_latent_coef = 0.0;

  // advantage > 0 with ratio pushed far above 1+eps: log_prob_old shifted down
  batch.advantages.setConstant(1.0);
  batch.log_prob_old.array() -= 1.0;  // ratio = e > 1.2
  p.zero_grad();
  ppo_loss(p, batch, cfg, true);
  double norm = 0.0;
  p.visit_trainable([&](nets::Tensor<double>& t) { norm += t.grad.squaredNorm(); });
  CHECK(norm == 0.0);

  // advantage < 0 with ratio far below 1-eps
  batch.advantages.setConstant(-1.0);
  batch.log_prob_old.array() += 2.0;  // ratio = e^-1 < 0.8
  p.zero_grad();
  ppo_loss(p, batch, cfg, true);
  norm = 0.0;
  p.visit_trainable([&](nets::Tensor<double>& t) { norm += t.grad.squaredNorm(); });
  CHECK(norm == 0.0);
}

TEST_CASE("privileged velocity input moves the critic only") {
  auto p = make_policy<double>(tiny_dims(), 19);
  auto batch = random_batch<double>(p.dims, 3, 23);
  const auto obs = batch.states.topRows(p.dims.obs);
  const auto hist = batch.states.bottomRows(p.dims.history_dim());
  const auto mean_before =
      p.actor.evaluate(p.actor_input(obs, p.encode_const(hist)));
  const auto value_before = p.critic.evaluate(p.critic_input(batch.states, batch.true_velocity));

  nets::Mat<double> shifted = batch.true_velocity;
  shifted.array() += 0.5;
  const auto mean_after = p.actor.evaluate(p.actor_input(obs, p.encode_const(hist)));
  const auto value_after = p.critic.evaluate(p.critic_input(batch.states, shifted));
  CHECK((mean_after - mean_before).cwiseAbs().maxCoeff() == 0.0);
  CHECK((value_after - value_before).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("advantage normalization leaves mean ~0 and std ~1") {
  auto p = make_policy<double>(tiny_dims(), 29);
  RolloutBuffer<double> buffer;
  buffer.resize(4, 8, p.dims.state_dim(), p.dims.act, p.dims.obs);
  const auto batch = random_batch<double>(p.dims, buffer.size(), 31);
  buffer.states = batch.states;
  buffer.actions = batch.actions;
  buffer.rewards = batch.returns;
  buffer.values = batch.advantages;
  buffer.true_velocity = batch.true_velocity;
  buffer.next_obs = batch.next_obs;
  {
    const auto o = buffer.states.topRows(p.dims.obs);
    const auto h = buffer.states.bottomRows(p.dims.history_dim());
    const auto mean = p.actor.evaluate(p.actor_input(o, p.encode_const(h)));
    buffer.log_prob = gaussian_log_prob<double>(mean, p.log_std.value.col(0), buffer.actions);
  }
  PpoConfig cfg;
  cfg.epochs = 1;
  cfg.minibatches = 1;
  nets::Adam<double> adam(cfg.learning_rate);
  Rng rng(1);
  const PpoUpdateStats stats =
      ppo_update<double>(p, adam, buffer, nets::Vec<double>(nets::Vec<double>::Zero(4)), cfg, rng);
  CHECK(stats.advantage_mean_abs < 1e-6);
  CHECK(std::abs(stats.advantage_std - 1.0) < 1e-6);
}

TEST_CASE("training loop: fixed seed reproduces the curve bit for bit") {
  auto model = std::make_shared<const RobotModel>(build_flores(MorphologyParams{}));
  auto terrain = make_terrain(TerrainKind::Flat, TerrainParams{}, 0);
  EnvConfig env_cfg;
  env_cfg.randomization_enabled = false;
  env_cfg.episode_length_steps = 50;

  TrainConfig cfg;
  cfg.num_envs = 4;
  cfg.horizon = 8;
  cfg.iterations = 3;
  cfg.seed = 123;
  cfg.checkpoint_every = 0;
  cfg.dims.encoder_hidden = {16, 8};
  cfg.dims.actor_hidden = {16, 8};
  cfg.dims.critic_hidden = {16, 8};

  auto run = [&]() {
    Trainer trainer(model, terrain, env_cfg, cfg);
    return trainer.run();
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.curve.size() == b.curve.size());
  for (size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].mean_total_reward == b.curve[i].mean_total_reward);
    CHECK(a.curve[i].value_loss == b.curve[i].value_loss);
  }
}

TEST_CASE("checkpoint round-trip restores the policy bit-exactly") {
  auto p = make_policy<float>(tiny_dims(), 77, -0.3);
  CheckpointMeta meta;
  meta.morphology = "flores";
  meta.seed = 42;
  meta.config_json = "{\"iterations\":3}";
  const std::string path = "/tmp/flores_ckpt_test.bin";
  save_checkpoint(p, meta, path);

  auto [q, got] = load_checkpoint(path);
  CHECK(got.morphology == "flores");
  CHECK(got.seed == 42);
  CHECK(got.config_json == meta.config_json);

  bool equal = true;
  std::vector<nets::Mat<float>> pv, qv;
  p.visit_trainable([&](nets::Tensor<float>& t) { pv.push_back(t.value); });
  q.visit_trainable([&](nets::Tensor<float>& t) { qv.push_back(t.value); });
  REQUIRE(pv.size() == qv.size());
  for (size_t i = 0; i < pv.size(); ++i) equal &= pv[i] == qv[i];
  CHECK(equal);
  CHECK(p.target_projection.value == q.target_projection.value);

  // a policy evaluated through the round-trip behaves identically
  nets::Vec<float> state = nets::Vec<float>::Random(p.dims.state_dim());
  CHECK(p.act_mean(state) == q.act_mean(state));
}

TEST_CASE("corrupt and mismatched checkpoints are explicit errors") {
  auto p = make_policy<float>(tiny_dims(), 77);
  CheckpointMeta meta;
  meta.morphology = "flores";
  const std::string path = "/tmp/flores_ckpt_test2.bin";
  save_checkpoint(p, meta, path);

  // truncation
  {
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(path + ".trunc", std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(path + ".trunc"), Error);

  // wrong magic
  {
    std::ofstream out(path + ".magic", std::ios::binary);
    out << "NOTACKPTxxxxxxxxxxxxxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(load_checkpoint(path + ".magic"), Error);
}
