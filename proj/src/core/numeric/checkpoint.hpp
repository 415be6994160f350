#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "numeric/layers.hpp"

namespace ponlab::nn {

enum class DType { kFloat32, kFloat64 };

/// Writes `path` (raw little-endian payload, tensors back to back) and
/// `path + ".json"` (names, shapes, offsets, dtype, optional metadata).
void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors,
                     DType dtype = DType::kFloat64, const nlohmann::json& metadata = nlohmann::json::object());

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint values into existing tensors, matched by name and shape.
void restore_checkpoint(const std::filesystem::path& path, std::span<NamedTensor> targets);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace ponlab::nn
