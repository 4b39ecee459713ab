#include "core/runner.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/eval.hpp"
#include "core/ppo.hpp"
#include "core/runner.hpp"
#include "core/telemetry.hpp"

namespace flores {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const RobotModel> build_model(const std::string& morphology,
                                              const json& params_json) {
  const MorphologyParams params = morphology_params_from_json(params_json);
  if (morphology == "flores")
    return std::make_shared<const RobotModel>(build_flores(params));
  if (morphology == "baseline")
    return std::make_shared<const RobotModel>(build_baseline(params));
  throw_invalid("unknown morphology: " + morphology + " (expected flores or baseline)");
}

std::shared_ptr<const Terrain> build_terrain(const json& request) {
  const json t = request.value("terrain", json::object());
  const TerrainKind kind = terrain_kind_from_json(t);
  const TerrainParams params = terrain_params_from_json(t);
  const uint64_t seed = t.value("seed", request.value("seed", uint64_t(0)));
  return make_terrain(kind, params, seed);
}

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve) {
  std::ofstream out(path);
  if (!out) throw_io("cannot open curve CSV for writing: " + path);
  out << "iteration,mean_total_reward";
  for (const char* name : kRewardTermNames) out << ",mean_" << name;
  out << ",value_loss,encoder_velocity_error,mean_episode_length\n";
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.10g", v);
    out << buf;
  };
  for (const auto& row : curve) {
    out << row.iteration;
    emit(row.mean_total_reward);
    for (double t : row.term_means) emit(t);
    emit(row.value_loss);
    emit(row.encoder_velocity_error);
    emit(row.mean_episode_length);
    out << "\n";
  }
}

uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot hash file: " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Controller make_controller(std::shared_ptr<PolicyNets<float>> policy) {
  return [policy](const StateVec& state) {
    const nets::Vec<float> mean = policy->act_mean(state.cast<float>());
    ActionVector a;
    a.data = mean.cast<double>();
    return a;
  };
}

ProtocolConfig protocol_from_json(const json& request) {
  ProtocolConfig cfg;
  cfg.protocol = request.value("protocol", "straight");
  cfg.speed = request.value("speed", cfg.speed);
  cfg.lateral_speed = request.value("lateral_speed", cfg.lateral_speed);
  cfg.radius = request.value("radius", cfg.radius);
  cfg.circle_vx = request.value("circle_vx", cfg.circle_vx);
  cfg.course_vx = request.value("course_vx", cfg.course_vx);
  cfg.course_leg = request.value("course_leg", cfg.course_leg);
  cfg.duration = request.value("duration", cfg.duration);
  cfg.settle = request.value("settle", cfg.settle);
  cfg.cot_speed_floor = request.value("cot_speed_floor", cfg.cot_speed_floor);
  cfg.radial_deviation_bound =
      request.value("radial_deviation_bound", cfg.radial_deviation_bound);
  if (request.contains("pid")) {
    const json& p = request.at("pid");
    cfg.pid.kp = p.value("kp", cfg.pid.kp);
    cfg.pid.ki = p.value("ki", cfg.pid.ki);
    cfg.pid.kd = p.value("kd", cfg.pid.kd);
    cfg.pid.integral_limit = p.value("integral_limit", cfg.pid.integral_limit);
  }
  return cfg;
}

}  // namespace

json run_training(const json& request, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::string morphology = request.value("morphology", "flores");
  const uint64_t seed = request.value("seed", uint64_t(0));

  auto model = build_model(morphology, request.value("morphology_params", json::object()));
  auto terrain = build_terrain(request);

  EnvConfig env_cfg = env_config_from_json(request.value("env", json::object()));
  const std::string task = request.value("task", "full");
  if (task == "toy-tracking") {
    apply_toy_tracking_preset(env_cfg);
    // re-apply explicit overrides on top of the preset
    if (request.contains("env")) env_cfg = [&] {
      EnvConfig c = env_cfg;
      const json& e = request.at("env");
      if (e.contains("episode_length_steps"))
        c.episode_length_steps = e.at("episode_length_steps").get<int>();
      return c;
    }();
  } else if (task != "full") {
    throw_invalid("unknown task: " + task);
  }

  TrainConfig train_cfg = train_config_from_json(request.value("train", json::object()));
  train_cfg.seed = seed;
  if (request.contains("num_envs")) train_cfg.num_envs = request.at("num_envs").get<int>();
  if (request.contains("iterations"))
    train_cfg.iterations = request.at("iterations").get<int>();
  if (request.contains("threads")) train_cfg.threads = request.at("threads").get<int>();

  json echo = request;
  echo["resolved_env"] = env_config_to_json(env_cfg);
  echo["resolved_train"] = train_config_to_json(train_cfg);
  echo["build"] = kBuildId;
  write_json_file(out_dir + "/config_echo.json", echo);

  CheckpointMeta meta;
  meta.morphology = morphology;
  meta.seed = seed;
  meta.config_json = echo.dump();

  Trainer trainer(model, terrain, env_cfg, train_cfg);
  const auto result = trainer.run([&](int iter, const PolicyNets<float>&,
                                      const std::vector<CurveRow>& curve) {
    PolicyNets<float>& p = trainer.policy();
    save_checkpoint(p, meta, out_dir + "/checkpoint_" + std::to_string(iter) + ".bin");
    write_curve_csv(out_dir + "/curve.csv", curve);
  });
  save_checkpoint(trainer.policy(), meta, out_dir + "/checkpoint_final.bin");
  write_curve_csv(out_dir + "/curve.csv", result.curve);

  json summary;
  summary["iterations_run"] = result.iterations_run;
  summary["reached_target"] = result.reached_target;
  summary["final_tracking_reward"] = result.final_tracking_reward;
  summary["checkpoint"] = out_dir + "/checkpoint_final.bin";
  summary["curve"] = out_dir + "/curve.csv";
  if (!result.curve.empty())
    summary["final_mean_total_reward"] = result.curve.back().mean_total_reward;
  summary["build"] = kBuildId;
  write_json_file(out_dir + "/train_summary.json", summary);
  return summary;
}

json run_evaluation(const json& request, const std::string& checkpoint_path,
                    const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto [policy, meta] = load_checkpoint(checkpoint_path);
  auto shared_policy = std::make_shared<PolicyNets<float>>(std::move(policy));

  const uint64_t seed = request.value("seed", uint64_t(0));
  auto model = build_model(meta.morphology, request.value("morphology_params", json::object()));
  auto terrain = build_terrain(request);
  EnvConfig env_cfg = env_config_from_json(request.value("env", json::object()));
  ProtocolConfig cfg = protocol_from_json(request);

  if (cfg.protocol == "sweep") {
    // straight-line CoT over the published speed range, one report per speed
    std::vector<double> speeds =
        request.value("speeds", std::vector<double>{0.5, 0.75, 1.0, 1.25, 1.5});
    const auto reports = run_straight_line_sweep(make_controller(shared_policy), model, terrain,
                                                 env_cfg, cfg, speeds, seed);
    std::ofstream csv(out_dir + "/cot_vs_speed.csv");
    if (!csv) throw_io("cannot open sweep CSV for writing");
    csv << "commanded_speed,mean_speed,aggregate_cot,cot_defined,completed\n";
    json all = json::array();
    char buf[160];
    for (size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%d\n", speeds[i], r.mean_speed,
                    r.aggregate_cot, r.cot_defined ? 1 : 0, r.completed ? 1 : 0);
      csv << buf;
      all.push_back(report_to_json(r));
    }
    json j;
    j["protocol"] = "sweep";
    j["speeds"] = speeds;
    j["reports"] = all;
    j["checkpoint"] = checkpoint_path;
    j["request"] = request;
    j["build"] = kBuildId;
    write_json_file(out_dir + "/report.json", j);
    return j;
  }

  const ExperimentReport report = run_protocol(make_controller(shared_policy), model, terrain,
                                               env_cfg, cfg, seed);

  json j = report_to_json(report);
  j["checkpoint"] = checkpoint_path;
  j["request"] = request;
  write_json_file(out_dir + "/report.json", j);
  write_telemetry_csv(out_dir + "/telemetry.csv", report.telemetry);
  write_cot_series_csv(out_dir + "/cot_series.csv", report);
  return j;
}

json run_replay(const json& request, const std::string& checkpoint_path,
                const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto [policy, meta] = load_checkpoint(checkpoint_path);
  auto shared_policy = std::make_shared<PolicyNets<float>>(std::move(policy));

  const uint64_t seed = request.value("seed", uint64_t(0));
  const int steps = request.value("steps", 500);
  auto model = build_model(meta.morphology, request.value("morphology_params", json::object()));
  auto terrain = build_terrain(request);
  EnvConfig env_cfg = env_config_from_json(request.value("env", json::object()));
  env_cfg.episode_length_steps = std::max(env_cfg.episode_length_steps, steps + 1);

  Environment env(model, terrain, env_cfg, derive_seed(seed, "replay"));
  env.reset(seed);
  const Controller controller = make_controller(shared_policy);

  std::vector<TelemetryRecord> records;
  for (int t = 0; t < steps; ++t) {
    const Command cmd = env.command();
    StepOutput out = env.step(controller(env.state_vector()));
    TelemetryRecord rec = make_record(env.sim_state().time, out.info, cmd);
    rec.base_position = env.sim_state().base_position;
    records.push_back(rec);
    if (out.terminated || out.truncated) env.reset();
  }
  const std::string telemetry_path = out_dir + "/telemetry.csv";
  write_telemetry_csv(telemetry_path, records);

  json summary;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a_file(telemetry_path));
  summary["trajectory_hash"] = hash;
  summary["steps"] = static_cast<int>(records.size());
  summary["telemetry"] = telemetry_path;
  summary["seed"] = seed;
  summary["checkpoint"] = checkpoint_path;
  summary["request"] = request;
  summary["build"] = kBuildId;
  write_json_file(out_dir + "/replay.json", summary);
  return summary;
}

json run_compare(const std::string& report_a_path, const std::string& report_b_path,
                 const std::string& out_path) {
  const ExperimentReport a = report_from_json(load_json_file(report_a_path));
  const ExperimentReport b = report_from_json(load_json_file(report_b_path));
  const json cmp = compare_reports(a, b);
  if (!out_path.empty()) write_json_file(out_path, cmp);
  return cmp;
}

std::string inspect_path(const std::string& path) {
  std::ostringstream os;
  if (path.size() > 4 && path.substr(path.size() - 4) == ".bin") {
    const CheckpointMeta meta = inspect_checkpoint(path);
    os << "checkpoint: " << path << "\n"
       << "  morphology: " << meta.morphology << "\n"
       << "  seed: " << meta.seed << "\n"
       << "  format version: " << meta.version << "\n";
    if (!meta.config_json.empty()) os << "  config echo: " << meta.config_json << "\n";
    return os.str();
  }
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    const auto records = read_telemetry_csv(path);
    os << "telemetry: " << path << "\n  records: " << records.size() << "\n";
    if (!records.empty())
      os << "  time span: " << records.front().time << " .. " << records.back().time << " s\n";
    return os.str();
  }
  const json j = load_json_file(path);
  if (j.contains("protocol") && j.contains("metrics")) {
    const ExperimentReport r = report_from_json(j);
    os << "report: " << path << "\n"
       << "  protocol: " << r.protocol << " (" << r.morphology << ", seed " << r.seed << ")\n"
       << "  aggregate CoT: " << (r.cot_defined ? std::to_string(r.aggregate_cot) : "undefined")
       << "\n"
       << "  mean speed: " << r.mean_speed << " m/s\n"
       << "  completed: " << (r.completed ? "yes" : "no") << "\n";
    return os.str();
  }
  os << "json: " << path << "\n" << j.dump(2) << "\n";
  return os.str();
}

}  // namespace flores
