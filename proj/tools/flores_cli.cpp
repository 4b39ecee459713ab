// Command-line driver; talks to the library exclusively through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flores/flores.h"

using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw CLI::ValidationError("--config", "invalid JSON in " + path);
  return j;
}

int fail(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, flores_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flores: wheel-legged locomotion trainer and efficiency harness"};
  app.require_subcommand(1);
  if (const char* v = std::getenv("FLORES_LOG")) {
    if (std::string(v) == "debug") std::fprintf(stderr, "flores %s\n", flores_version());
  }

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train a locomotion policy");
  std::string morphology = "flores", out_dir = "runs/default", task = "full";
  std::string config_path, terrain_kind = "flat", morph_params_path;
  uint64_t seed = 0;
  int envs = 128, iters = 1500, threads = 1;
  bool no_randomization = false;
  train->add_option("--morphology", morphology, "flores | baseline");
  train->add_option("--envs", envs, "parallel environments");
  train->add_option("--iters", iters, "training iterations");
  train->add_option("--seed", seed, "master seed");
  train->add_option("--threads", threads, "worker threads (1 = strict determinism)");
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--task", task, "full | toy-tracking");
  train->add_option("--terrain", terrain_kind, "flat | slope | stairs | discrete | friction-patch");
  train->add_option("--config", config_path, "JSON config overrides (env/train sections)");
  train->add_option("--morphology-params", morph_params_path, "morphology parameter file");
  train->add_flag("--no-randomization", no_randomization, "disable domain randomization");

  // eval -------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "run an efficiency protocol on a checkpoint");
  std::string protocol = "straight", checkpoint, eval_out = "eval_out";
  double speed = 1.0, radius = 1.0, duration = 10.0;
  uint64_t eval_seed = 0;
  std::string eval_terrain = "flat", eval_config;
   eval->add_option("--protocol", protocol, "straight | sweep | lateral | circle | course")->required();
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint")->required();
  eval->add_option("--seed", eval_seed, "seed");
  eval->add_option("--speed", speed, "straight-line speed, m/s");
  eval->add_option("--radius", radius, "circle radius, m");
  eval->add_option("--duration", duration, "measured window, s");
  eval->add_option("--terrain", eval_terrain, "terrain kind");
  eval->add_option("--out", eval_out, "output directory");
  eval->add_option("--config", eval_config, "JSON request overrides");

  // replay -----------------------------------------------------------------
  auto* replay = app.add_subcommand("replay", "deterministic rollout with trajectory hash");
  std::string replay_checkpoint, replay_out = "replay_out";
  uint64_t replay_seed = 0;
  int replay_steps = 500, replay_threads = 1;
  replay->add_option("--checkpoint", replay_checkpoint, "policy checkpoint")->required();
  replay->add_option("--seed", replay_seed, "seed");
  replay->add_option("--steps", replay_steps, "control steps to roll");
  replay->add_option("--threads", replay_threads, "must be 1 for the byte-identity contract");
  replay->add_option("--out", replay_out, "output directory");

  // compare ----------------------------------------------------------------
  auto* compare = app.add_subcommand("compare", "paired CoT comparison of two reports");
  std::string report_a, report_b, compare_out;
  compare->add_option("--report-a", report_a, "first report.json")->required();
  compare->add_option("--report-b", report_b, "second report.json")->required();
  compare->add_option("--out", compare_out, "comparison output file");

  // inspect ----------------------------------------------------------------
  auto* inspect = app.add_subcommand("inspect", "describe a checkpoint/report/telemetry file");
  std::string inspect_path_arg;
  inspect->add_option("path", inspect_path_arg, "file to inspect")->required();

  CLI11_PARSE(app, argc, argv);

  std::vector<char> buf(1 << 20);

  if (train->parsed()) {
    json req;
    if (!config_path.empty()) req = read_json_file(config_path);
    req["morphology"] = morphology;
    req["seed"] = seed;
    req["num_envs"] = envs;
    req["iterations"] = iters;
    req["threads"] = threads;
    req["task"] = task;
    if (!req.contains("terrain")) req["terrain"] = json::object();
    req["terrain"]["kind"] = terrain_kind;
    if (no_randomization) req["env"]["randomization_enabled"] = false;
    if (!morph_params_path.empty())
      req["morphology_params"] = read_json_file(morph_params_path);
    if (flores_train(req.dump().c_str(), out_dir.c_str(), buf.data(), buf.size()) != FLORES_OK)
      return fail("train");
    std::printf("%s\n", buf.data());
    return 0;
  }

  if (eval->parsed()) {
    json req;
    if (!eval_config.empty()) req = read_json_file(eval_config);
    req["protocol"] = protocol;
    req["seed"] = eval_seed;
    req["speed"] = speed;
    req["radius"] = radius;
    req["duration"] = duration;
    if (!req.contains("terrain")) req["terrain"] = json::object();
    req["terrain"]["kind"] = eval_terrain;
    if (flores_eval(req.dump().c_str(), checkpoint.c_str(), eval_out.c_str(), buf.data(),
                    buf.size()) != FLORES_OK)
      return fail("eval");
    std::printf("%s\n", buf.data());
    return 0;
  }

  if (replay->parsed()) {
    if (replay_threads != 1)
      std::fprintf(stderr, "note: replay always runs single-threaded\n");
    json req;
    req["seed"] = replay_seed;
    req["steps"] = replay_steps;
    if (flores_replay(req.dump().c_str(), replay_checkpoint.c_str(), replay_out.c_str(),
                      buf.data(), buf.size()) != FLORES_OK)
      return fail("replay");
    std::printf("%s\n", buf.data());
    return 0;
  }

  if (compare->parsed()) {
    if (flores_compare(report_a.c_str(), report_b.c_str(),
                       compare_out.empty() ? nullptr : compare_out.c_str(), buf.data(),
                       buf.size()) != FLORES_OK)
      return fail("compare");
    std::printf("%s\n", buf.data());
    return 0;
  }

  if (inspect->parsed()) {
    if (flores_inspect(inspect_path_arg.c_str(), buf.data(), buf.size()) != FLORES_OK)
      return fail("inspect");
    std::printf("%s", buf.data());
    return 0;
  }
  return 0;
}
