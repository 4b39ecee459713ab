#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "core/policy.hpp"

namespace flores {

struct CheckpointMeta {
  std::string morphology;   // "flores" or "baseline"
  uint64_t seed = 0;
  std::string config_json;  // training-config echo
  uint32_t version = 1;
};

// Binary layout (all integers little-endian):
//   magic "FLORESCP" | u32 version | morphology string | u64 seed
//   | config-echo string | net dims | u32 tensor count
//   | per tensor: name, u32 rows, u32 cols, rows*cols float32 row-major
void save_checkpoint(PolicyNets<float>& policy, const CheckpointMeta& meta,
                     const std::string& path);

std::pair<PolicyNets<float>, CheckpointMeta> load_checkpoint(const std::string& path);

// metadata without materializing the networks
CheckpointMeta inspect_checkpoint(const std::string& path);

}  // namespace flores
