#pragma once

#include <string>

#include <json.hpp>

namespace flores {

// High-level entry points behind the C API. Each takes a JSON request,
// writes its artifacts under out_dir, and returns a JSON summary. Every
// artifact embeds the resolved config echo, the seed, and the build id.

// request: {"morphology", "seed", "task": "full"|"toy-tracking", "terrain": {...},
//           "env": {...}, "train": {...}, "morphology_params": {...}}
nlohmann::json run_training(const nlohmann::json& request, const std::string& out_dir);

// request: {"protocol", "seed", "speed"/"radius"/..., "terrain": {...}, "env": {...}}
nlohmann::json run_evaluation(const nlohmann::json& request, const std::string& checkpoint_path,
                              const std::string& out_dir);

// deterministic rollout of a checkpointed policy; writes telemetry.csv and
// returns the trajectory hash
nlohmann::json run_replay(const nlohmann::json& request, const std::string& checkpoint_path,
                          const std::string& out_dir);

nlohmann::json run_compare(const std::string& report_a_path, const std::string& report_b_path,
                           const std::string& out_path);

// human-readable summary of a checkpoint, report, telemetry, or morphology file
std::string inspect_path(const std::string& path);

}  // namespace flores
