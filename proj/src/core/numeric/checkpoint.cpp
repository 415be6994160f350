#include "numeric/checkpoint.hpp"

#include <fstream>
#include <map>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace ponlab::nn {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors, DType dtype,
                     const nlohmann::json& metadata) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot write checkpoint " + path.string());
  const std::size_t width = dtype == DType::kFloat32 ? 4 : 8;
  nlohmann::json entries = nlohmann::json::array();
  std::size_t offset = 0;
  for (const NamedTensor& nt : tensors) {
    for (double v : nt.tensor.data()) {
      if (dtype == DType::kFloat32) {
        io::write_le(os, static_cast<float>(v));
      } else {
        io::write_le(os, v);
      }
    }
    entries.push_back({{"name", nt.name},
                       {"shape", nt.tensor.shape()},
                       {"offset", offset},
                       {"count", nt.tensor.numel()}});
    offset += nt.tensor.numel() * width;
  }
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed: " + path.string());
  nlohmann::json sidecar = {{"format", "ponlab-checkpoint"},
                            {"version", 1},
                            {"dtype", dtype == DType::kFloat32 ? "float32" : "float64"},
                            {"byte_order", "little"},
                            {"payload_bytes", offset},
                            {"tensors", entries},
                            {"metadata", metadata}};
  io::write_text_file(sidecar_path(path), sidecar.dump(2) + "\n");
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  const nlohmann::json sidecar = nlohmann::json::parse(io::read_text_file(sidecar_path(path)));
  require(sidecar.value("format", "") == "ponlab-checkpoint", ErrorCode::kIo,
          "not a ponlab checkpoint sidecar: " + sidecar_path(path).string());
  const std::string dtype = sidecar.at("dtype");
  require(dtype == "float32" || dtype == "float64", ErrorCode::kIo, "unsupported dtype " + dtype);
  const std::size_t width = dtype == "float32" ? 4 : 8;

  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot read checkpoint " + path.string());
  std::vector<NamedTensor> out;
  for (const auto& entry : sidecar.at("tensors")) {
    Shape shape = entry.at("shape").get<Shape>();
    const std::size_t count = entry.at("count");
    require(shape_numel(shape) == count, ErrorCode::kIo, "corrupt checkpoint entry " + entry.at("name").get<std::string>());
    is.seekg(static_cast<std::streamoff>(entry.at("offset").get<std::size_t>()));
    std::vector<double> values(count);
    for (double& v : values) v = width == 4 ? static_cast<double>(io::read_le<float>(is)) : io::read_le<double>(is);
    require(static_cast<bool>(is), ErrorCode::kIo, "truncated checkpoint payload " + path.string());
    out.push_back({entry.at("name"), Tensor(std::move(shape), std::move(values), true)});
  }
  return out;
}

void restore_checkpoint(const std::filesystem::path& path, std::span<NamedTensor> targets) {
  std::map<std::string, Tensor> loaded;
  for (auto& nt : load_checkpoint(path)) loaded.emplace(nt.name, nt.tensor);
  for (NamedTensor& target : targets) {
    auto it = loaded.find(target.name);
    require(it != loaded.end(), ErrorCode::kIo, "checkpoint lacks tensor " + target.name);
    require(it->second.shape() == target.tensor.shape(), ErrorCode::kShapeMismatch,
            "checkpoint tensor " + target.name + " has shape " + shape_to_string(it->second.shape()));
    auto dst = target.tensor.data_mut();
    const auto src = it->second.data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace ponlab::nn
