#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "link/signal.hpp"
#include "numeric/tensor.hpp"

namespace ponlab::data {

using link::SplitLabel;
using link::Symbol;

struct NormStats {
  double mean = 0.0;
  double std = 1.0;

  double apply(double v) const { return (v - mean) / std; }
  double invert(double v) const { return v * std + mean; }
};

// Population statistics; throws on fewer than two samples or zero variance.
NormStats compute_stats(std::span<const double> x);

struct Normalized {
  std::vector<double> values;
  NormStats stats;
};
Normalized normalize(std::span<const double> x);

enum class WindowStyle { kCenteredDnn, kScinet };

struct WindowConfig {
  std::size_t window_len = 64;  // p
  std::size_t dnn_pre = 16;
  std::size_t dnn_post = 16;
  std::size_t stride = 1;

  // Number of inputs per row and the row offset of the target symbol.
  std::size_t length(WindowStyle style) const;
  std::size_t target_offset(WindowStyle style) const;
  void validate(WindowStyle style, int levels = 0) const;
};

struct WindowBatch {
  std::size_t rows = 0;
  std::size_t row_len = 0;
  std::vector<double> inputs;  // rows * row_len, row-major
  std::vector<double> targets;
};

/// Sliding windows at the configured stride. The target of each row is the
/// y sample at the row's target offset.
WindowBatch make_windows(std::span<const double> x, std::span<const double> y, const WindowConfig& cfg,
                         WindowStyle style);

enum class FcMode { kEmphasize, kReconstruct };
FcMode parse_fc_mode(const std::string& name);
std::string to_string(FcMode mode);

/// x_s = AvgPool(x), x_f = x - x_s; returns x + x_f (emphasize) or x_s + x_f.
nn::Tensor frequency_calibrate(const nn::Tensor& x, std::size_t kernel, FcMode mode = FcMode::kEmphasize);

struct SplitConfig {
  std::size_t n_blocks = 20;
  std::size_t train_blocks = 15;
  std::size_t test_blocks = 3;
  std::size_t val_blocks = 2;
  std::uint64_t seed = 0;
};

/// Cuts n symbols into contiguous blocks and assigns them to splits after a
/// seeded shuffle of the block order.
std::vector<SplitLabel> assign_splits(std::size_t n, const SplitConfig& cfg);

struct WindowRef {
  std::uint32_t capture = 0;
  std::uint32_t target = 0;  // symbol index within the capture
};

/// Normalized captures plus the target indices of each split. A target is
/// usable only when [target - margin_before, target + margin_after] stays
/// inside a single block, so no window straddles a split boundary.
struct Dataset {
  NormStats input_stats;
  NormStats target_stats;
  std::size_t margin_before = 0;
  std::size_t margin_after = 0;
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
  std::vector<std::vector<Symbol>> symbols;
  std::vector<std::vector<SplitLabel>> split;
  std::vector<WindowRef> train;
  std::vector<WindowRef> validation;
  std::vector<WindowRef> test;

  const std::vector<WindowRef>& refs(SplitLabel label) const;

  // Copies window rows (style-dependent) and normalized targets for refs.
  void gather(std::span<const WindowRef> refs, const WindowConfig& cfg, WindowStyle style, double* inputs_out,
              double* targets_out) const;
};

/// Stats are computed on the training split only.
Dataset build_dataset(std::span<const link::SymbolFrame> frames, const SplitConfig& split, std::size_t margin_before,
                      std::size_t margin_after);

// Header line (JSON) followed by little-endian float64 inputs of every capture
// and one byte per symbol.
void write_dataset_cache(const std::filesystem::path& path, const Dataset& dataset, const nlohmann::json& extra);
Dataset read_dataset_cache(const std::filesystem::path& path, nlohmann::json* header = nullptr);

}  // namespace ponlab::data
