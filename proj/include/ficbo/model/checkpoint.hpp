#pragma once

// Binary checkpoint layout (all integers little-endian):
//   8 bytes   magic "FICBOCKP"
//   u32       format version (1)
//   u64       length of the config JSON, then the JSON bytes
//   u64       parameter count
//   per parameter, in declaration order:
//     u64 rows, u64 cols, rows * cols IEEE-754 doubles (row-major)

#include <string>

#include "ficbo/model/model.hpp"

namespace ficbo::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Model& model, const nlohmann::json& extra = {});
Model load_checkpoint(const std::string& path, nlohmann::json* extra = nullptr);

}  // namespace ficbo::model
