#pragma once

#include <string>

#include "core/env.hpp"
#include "core/morphology.hpp"
#include "core/ppo.hpp"
#include "core/terrain.hpp"

#include <json.hpp>

namespace flores {

inline constexpr const char* kBuildId = "flores-0.1.0";

// Patch-style loaders: absent fields keep their defaults. Angles are degrees
// in files and radians in memory.
MorphologyParams morphology_params_from_json(const nlohmann::json& j);
nlohmann::json morphology_params_to_json(const MorphologyParams& p);

TerrainKind terrain_kind_from_json(const nlohmann::json& j);
TerrainParams terrain_params_from_json(const nlohmann::json& j);
nlohmann::json terrain_to_json(TerrainKind kind, const TerrainParams& p, uint64_t seed);

EnvConfig env_config_from_json(const nlohmann::json& j);
nlohmann::json env_config_to_json(const EnvConfig& c);

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& c);

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

// the "toy-tracking" task preset: flat ground, randomization off, forward
// velocity commands only, tracking rewards only
void apply_toy_tracking_preset(EnvConfig& env);

}  // namespace flores
