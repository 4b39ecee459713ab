#include "flores/flores.h"

#include <cstring>
#include <memory>
#include <string>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/env.hpp"
#include "core/error.hpp"
#include "core/morphology.hpp"
#include "core/runner.hpp"
#include "core/terrain.hpp"

using namespace flores;
using nlohmann::json;

struct flores_model {
  std::shared_ptr<const RobotModel> model;
};

struct flores_env {
  std::shared_ptr<const RobotModel> model;
  std::shared_ptr<const Terrain> terrain;
  std::unique_ptr<Environment> env;
};

struct flores_policy {
  PolicyNets<float> nets;
  CheckpointMeta meta;
};

namespace {

thread_local std::string g_last_error;

flores_status status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument: return FLORES_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return FLORES_ERR_IO;
    case ErrorCode::Format: return FLORES_ERR_FORMAT;
    case ErrorCode::Diverged: return FLORES_ERR_DIVERGED;
    case ErrorCode::Runtime: return FLORES_ERR_RUNTIME;
  }
  return FLORES_ERR_RUNTIME;
}

template <typename Fn>
flores_status guarded(Fn&& fn) {
  try {
    fn();
    return FLORES_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FLORES_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return FLORES_ERR_RUNTIME;
  }
}

template <typename Fn>
auto guarded_ptr(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    return nullptr;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  } catch (...) {
    g_last_error = "unknown error";
    return nullptr;
  }
}

void copy_out(const std::string& s, char* buf, size_t size) {
  if (!buf || size == 0) return;
  const size_t n = std::min(s.size(), size - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

json parse_or_default(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw_format("invalid JSON request");
  return j;
}

}  // namespace

extern "C" {

const char* flores_version(void) { return kBuildId; }

const char* flores_last_error(void) { return g_last_error.c_str(); }

flores_model* flores_model_create(const char* morphology, const char* params_json) {
  return guarded_ptr([&]() -> flores_model* {
    if (!morphology) throw_invalid("morphology is required");
    const MorphologyParams params = morphology_params_from_json(parse_or_default(params_json));
    std::shared_ptr<const RobotModel> model;
    const std::string tag = morphology;
    if (tag == "flores")
      model = std::make_shared<const RobotModel>(build_flores(params));
    else if (tag == "baseline")
      model = std::make_shared<const RobotModel>(build_baseline(params));
    else
      throw_invalid("unknown morphology: " + tag);
    return new flores_model{std::move(model)};
  });
}

void flores_model_destroy(flores_model* model) { delete model; }

double flores_model_total_mass(const flores_model* model) {
  return model ? model->model->total_mass() : -1.0;
}

int flores_model_num_joints(const flores_model* model) {
  return model ? static_cast<int>(model->model->joints.size()) : -1;
}

int flores_model_validate(const flores_model* model, char* buf, size_t buf_size) {
  if (!model) return FLORES_ERR_INVALID_ARGUMENT;
  int count = 0;
  const flores_status st = guarded([&] {
    const auto violations = validate(*model->model);
    count = static_cast<int>(violations.size());
    std::string text;
    for (const auto& v : violations) text += v.where + ": " + v.what + "\n";
    copy_out(text, buf, buf_size);
  });
  return st == FLORES_OK ? count : st;
}

flores_env* flores_env_create(const flores_model* model, const char* env_config_json,
                              const char* terrain_json, uint64_t seed) {
  return guarded_ptr([&]() -> flores_env* {
    if (!model) throw_invalid("model is required");
    const json tj = parse_or_default(terrain_json);
    auto terrain = make_terrain(terrain_kind_from_json(tj), terrain_params_from_json(tj),
                                tj.value("seed", seed));
    EnvConfig cfg = env_config_from_json(parse_or_default(env_config_json));
    auto env = std::make_unique<Environment>(model->model, terrain, cfg, seed);
    return new flores_env{model->model, terrain, std::move(env)};
  });
}

void flores_env_destroy(flores_env* env) { delete env; }

int flores_env_observation_dim(const flores_env* env) {
  return env ? Environment::observation_dim() : -1;
}
int flores_env_state_dim(const flores_env* env) { return env ? Environment::state_dim() : -1; }
int flores_env_action_dim(const flores_env* env) { return env ? Environment::action_dim() : -1; }

flores_status flores_env_reset(flores_env* env, uint64_t seed, double* state_out) {
  if (!env || !state_out) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const StateVec& s = env->env->reset(seed);
    std::memcpy(state_out, s.data(), sizeof(double) * kStateDim);
  });
}

flores_status flores_env_step(flores_env* env, const double* action, double* state_out,
                              double* reward_out, int* done_out) {
  if (!env || !action) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    ActionVector a;
    for (int i = 0; i < kNumJoints; ++i) a.data[i] = action[i];
    const StepOutput out = env->env->step(a);
    if (state_out) std::memcpy(state_out, out.state.data(), sizeof(double) * kStateDim);
    if (reward_out) *reward_out = out.reward.total;
    if (done_out) *done_out = out.terminated ? 1 : (out.truncated ? 2 : 0);
  });
}

flores_policy* flores_policy_load(const char* checkpoint_path) {
  return guarded_ptr([&]() -> flores_policy* {
    if (!checkpoint_path) throw_invalid("checkpoint path is required");
    auto [nets, meta] = load_checkpoint(checkpoint_path);
    return new flores_policy{std::move(nets), std::move(meta)};
  });
}

void flores_policy_destroy(flores_policy* policy) { delete policy; }

flores_status flores_policy_act(const flores_policy* policy, const double* state,
                                double* action_out) {
  if (!policy || !state || !action_out) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    nets::Vec<float> s(policy->nets.dims.state_dim());
    for (int i = 0; i < policy->nets.dims.state_dim(); ++i)
      s[i] = static_cast<float>(state[i]);
    const nets::Vec<float> mean = policy->nets.act_mean(s);
    for (int i = 0; i < policy->nets.dims.act; ++i)
      action_out[i] = static_cast<double>(mean[i]);
  });
}

flores_status flores_train(const char* request_json, const char* out_dir, char* summary_buf,
                           size_t summary_size) {
  if (!out_dir) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const json summary = run_training(parse_or_default(request_json), out_dir);
    copy_out(summary.dump(), summary_buf, summary_size);
  });
}

flores_status flores_eval(const char* request_json, const char* checkpoint_path,
                          const char* out_dir, char* summary_buf, size_t summary_size) {
  if (!checkpoint_path || !out_dir) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const json summary = run_evaluation(parse_or_default(request_json), checkpoint_path, out_dir);
    copy_out(summary.dump(), summary_buf, summary_size);
  });
}

flores_status flores_replay(const char* request_json, const char* checkpoint_path,
                            const char* out_dir, char* summary_buf, size_t summary_size) {
  if (!checkpoint_path || !out_dir) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const json summary = run_replay(parse_or_default(request_json), checkpoint_path, out_dir);
    copy_out(summary.dump(), summary_buf, summary_size);
  });
}

flores_status flores_compare(const char* report_a_path, const char* report_b_path,
                             const char* out_path, char* summary_buf, size_t summary_size) {
  if (!report_a_path || !report_b_path) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const json cmp = run_compare(report_a_path, report_b_path, out_path ? out_path : "");
    copy_out(cmp.dump(), summary_buf, summary_size);
  });
}

flores_status flores_inspect(const char* path, char* buf, size_t buf_size) {
  if (!path) return FLORES_ERR_INVALID_ARGUMENT;
  return guarded([&] { copy_out(inspect_path(path), buf, buf_size); });
}

}  // extern "C"
