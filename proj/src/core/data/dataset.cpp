#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "numeric/ops.hpp"

namespace ponlab::data {

NormStats compute_stats(std::span<const double> x) {
  require(x.size() >= 2, ErrorCode::kInvalidArgument, "normalize needs at least two samples");
  NormStats s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - s.mean) * (v - s.mean);
  var /= static_cast<double>(x.size());
  require(var > 0.0, ErrorCode::kNumerical, "normalize: sequence has zero variance");
  s.std = std::sqrt(var);
  return s;
}

Normalized normalize(std::span<const double> x) {
  Normalized out;
  out.stats = compute_stats(x);
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = out.stats.apply(x[i]);
  return out;
}

std::size_t WindowConfig::length(WindowStyle style) const {
  return style == WindowStyle::kCenteredDnn ? dnn_pre + 1 + dnn_post : window_len;
}

std::size_t WindowConfig::target_offset(WindowStyle style) const {
  return style == WindowStyle::kCenteredDnn ? dnn_pre : window_len / 2;
}

void WindowConfig::validate(WindowStyle style, int levels) const {
  require(stride >= 1, ErrorCode::kInvalidArgument, "window stride must be >= 1");
  if (style == WindowStyle::kScinet) {
    require(window_len >= 2, ErrorCode::kInvalidArgument, "window_len must be >= 2");
    if (levels > 0)
      require(levels < 31 && window_len % (std::size_t{1} << levels) == 0, ErrorCode::kInfeasible,
              "window_len " + std::to_string(window_len) + " is not divisible by 2^" + std::to_string(levels));
  }
}

WindowBatch make_windows(std::span<const double> x, std::span<const double> y, const WindowConfig& cfg,
                         WindowStyle style) {
  cfg.validate(style);
  require(x.size() == y.size(), ErrorCode::kShapeMismatch, "make_windows: x and y lengths differ");
  const std::size_t len = cfg.length(style);
  require(x.size() >= len, ErrorCode::kInvalidArgument,
          "sequence of " + std::to_string(x.size()) + " is shorter than the window " + std::to_string(len));
  const std::size_t offset = cfg.target_offset(style);
  WindowBatch b;
  b.row_len = len;
  b.rows = (x.size() - len) / cfg.stride + 1;
  b.inputs.reserve(b.rows * len);
  b.targets.reserve(b.rows);
  for (std::size_t r = 0; r < b.rows; ++r) {
    const std::size_t start = r * cfg.stride;
    b.inputs.insert(b.inputs.end(), x.begin() + static_cast<std::ptrdiff_t>(start),
                    x.begin() + static_cast<std::ptrdiff_t>(start + len));
    b.targets.push_back(y[start + offset]);
  }
  return b;
}

FcMode parse_fc_mode(const std::string& name) {
  if (name == "emphasize") return FcMode::kEmphasize;
  if (name == "reconstruct") return FcMode::kReconstruct;
  fail(ErrorCode::kInvalidArgument, "unknown fc_mode '" + name + "' (expected emphasize|reconstruct)");
}

std::string to_string(FcMode mode) { return mode == FcMode::kEmphasize ? "emphasize" : "reconstruct"; }

nn::Tensor frequency_calibrate(const nn::Tensor& x, std::size_t kernel, FcMode mode) {
  const nn::Tensor smooth = nn::avg_pool_smooth(x, kernel);
  const nn::Tensor fluct = nn::sub(x, smooth);
  return nn::add(mode == FcMode::kEmphasize ? x : smooth, fluct);
}

std::vector<SplitLabel> assign_splits(std::size_t n, const SplitConfig& cfg) {
  require(cfg.n_blocks > 0 && cfg.train_blocks + cfg.test_blocks + cfg.val_blocks == cfg.n_blocks,
          ErrorCode::kInvalidArgument, "split block counts must add up to n_blocks");
  require(n >= cfg.n_blocks, ErrorCode::kInvalidArgument, "fewer symbols than split blocks");
  std::vector<SplitLabel> block_labels;
  block_labels.insert(block_labels.end(), cfg.train_blocks, SplitLabel::kTrain);
  block_labels.insert(block_labels.end(), cfg.test_blocks, SplitLabel::kTest);
  block_labels.insert(block_labels.end(), cfg.val_blocks, SplitLabel::kValidation);
  Rng rng = make_rng(cfg.seed, "split");
  // Fisher-Yates with raw draws, independent of the library's shuffle.
  for (std::size_t i = block_labels.size() - 1; i > 0; --i) std::swap(block_labels[i], block_labels[rng() % (i + 1)]);
  std::vector<SplitLabel> out(n);
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    const std::size_t lo = b * n / cfg.n_blocks;
    const std::size_t hi = (b + 1) * n / cfg.n_blocks;
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(lo), out.begin() + static_cast<std::ptrdiff_t>(hi),
              block_labels[b]);
  }
  return out;
}

const std::vector<WindowRef>& Dataset::refs(SplitLabel label) const {
  switch (label) {
    case SplitLabel::kTrain: return train;
    case SplitLabel::kValidation: return validation;
    case SplitLabel::kTest: return test;
  }
  return train;
}

void Dataset::gather(std::span<const WindowRef> refs, const WindowConfig& cfg, WindowStyle style,
                     double* inputs_out, double* targets_out) const {
  const std::size_t len = cfg.length(style);
  const std::size_t offset = cfg.target_offset(style);
  require(offset <= margin_before && len - 1 - offset <= margin_after, ErrorCode::kInvalidArgument,
          "window does not fit inside the dataset margins");
  for (std::size_t r = 0; r < refs.size(); ++r) {
    const auto& x = inputs[refs[r].capture];
    const std::size_t start = refs[r].target - offset;
    if (inputs_out) std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), len, inputs_out + r * len);
    if (targets_out) targets_out[r] = targets[refs[r].capture][refs[r].target];
  }
}

namespace {

void index_targets(Dataset& d) {
  d.train.clear();
  d.validation.clear();
  d.test.clear();
  for (std::size_t c = 0; c < d.split.size(); ++c) {
    const auto& labels = d.split[c];
    std::size_t block_start = 0;
    for (std::size_t i = 1; i <= labels.size(); ++i) {
      if (i < labels.size() && labels[i] == labels[block_start]) continue;
      // Block [block_start, i) shares one label.
      for (std::size_t t = block_start + d.margin_before; t + d.margin_after < i; ++t) {
        const WindowRef ref{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(t)};
        switch (labels[block_start]) {
          case SplitLabel::kTrain: d.train.push_back(ref); break;
          case SplitLabel::kValidation: d.validation.push_back(ref); break;
          case SplitLabel::kTest: d.test.push_back(ref); break;
        }
      }
      block_start = i;
    }
  }
}

void fill_targets(Dataset& d) {
  d.targets.assign(d.symbols.size(), {});
  for (std::size_t c = 0; c < d.symbols.size(); ++c) {
    d.targets[c].resize(d.symbols[c].size());
    for (std::size_t i = 0; i < d.symbols[c].size(); ++i)
      d.targets[c][i] = d.target_stats.apply(link::symbol_amplitude(d.symbols[c][i]));
  }
}

}  // namespace

Dataset build_dataset(std::span<const link::SymbolFrame> frames, const SplitConfig& split, std::size_t margin_before,
                      std::size_t margin_after) {
  require(!frames.empty(), ErrorCode::kInvalidArgument, "no captures");
  Dataset d;
  d.margin_before = margin_before;
  d.margin_after = margin_after;
  std::vector<double> train_x;
  std::vector<double> train_y;
  for (std::size_t c = 0; c < frames.size(); ++c) {
    const auto& f = frames[c];
    require(f.soft.size() == f.symbols.size(), ErrorCode::kShapeMismatch, "frame soft/symbol length mismatch");
    SplitConfig s = split;
    s.seed = derive_seed(split.seed, "split-capture", {c});
    d.split.push_back(assign_splits(f.size(), s));
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (d.split.back()[i] != SplitLabel::kTrain) continue;
      train_x.push_back(f.soft[i]);
      train_y.push_back(link::symbol_amplitude(f.symbols[i]));
    }
    d.symbols.push_back(f.symbols);
  }
  d.input_stats = compute_stats(train_x);
  d.target_stats = compute_stats(train_y);
  for (const auto& f : frames) {
    std::vector<double> x(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) x[i] = d.input_stats.apply(f.soft[i]);
    d.inputs.push_back(std::move(x));
  }
  fill_targets(d);
  index_targets(d);
  require(!d.train.empty() && !d.validation.empty() && !d.test.empty(), ErrorCode::kInvalidArgument,
          "captures too short for the requested window margins");
  return d;
}

void write_dataset_cache(const std::filesystem::path& path, const Dataset& d, const nlohmann::json& extra) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nlohmann::json h = extra;
  h["format"] = "ponlab-dataset";
  h["version"] = 1;
  h["input_stats"] = {{"mean", d.input_stats.mean}, {"std", d.input_stats.std}};
  h["target_stats"] = {{"mean", d.target_stats.mean}, {"std", d.target_stats.std}};
  h["margin_before"] = d.margin_before;
  h["margin_after"] = d.margin_after;
  nlohmann::json lengths = nlohmann::json::array();
  nlohmann::json splits = nlohmann::json::array();
  for (std::size_t c = 0; c < d.inputs.size(); ++c) {
    lengths.push_back(d.inputs[c].size());
    // Run-length encoded split map: [[label, length], ...]
    nlohmann::json runs = nlohmann::json::array();
    std::size_t start = 0;
    for (std::size_t i = 1; i <= d.split[c].size(); ++i) {
      if (i < d.split[c].size() && d.split[c][i] == d.split[c][start]) continue;
      runs.push_back({static_cast<int>(d.split[c][start]), i - start});
      start = i;
    }
    splits.push_back(runs);
  }
  h["capture_lengths"] = lengths;
  h["split_map"] = splits;
  h["payload"] = "float64 inputs per capture, then uint8 symbols per capture, little-endian";
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path.string());
  os << h.dump() << '\n';
  for (const auto& x : d.inputs)
    for (double v : x) io::write_le(os, v);
  for (const auto& s : d.symbols) os.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size()));
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed: " + path.string());
}

Dataset read_dataset_cache(const std::filesystem::path& path, nlohmann::json* header) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  const auto h = nlohmann::json::parse(line);
  require(h.value("format", "") == "ponlab-dataset", ErrorCode::kIo, "not a dataset cache: " + path.string());
  Dataset d;
  d.input_stats = {h["input_stats"]["mean"].get<double>(), h["input_stats"]["std"].get<double>()};
  d.target_stats = {h["target_stats"]["mean"].get<double>(), h["target_stats"]["std"].get<double>()};
  d.margin_before = h["margin_before"].get<std::size_t>();
  d.margin_after = h["margin_after"].get<std::size_t>();
  for (const auto& len : h["capture_lengths"]) {
    std::vector<double> x(len.get<std::size_t>());
    for (double& v : x) v = io::read_le<double>(is);
    d.inputs.push_back(std::move(x));
  }
  for (const auto& x : d.inputs) {
    std::vector<Symbol> s(x.size());
    is.read(reinterpret_cast<char*>(s.data()), static_cast<std::streamsize>(s.size()));
    d.symbols.push_back(std::move(s));
  }
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated dataset cache " + path.string());
  for (const auto& runs : h["split_map"]) {
    std::vector<SplitLabel> labels;
    for (const auto& run : runs)
      labels.insert(labels.end(), run[1].get<std::size_t>(), static_cast<SplitLabel>(run[0].get<int>()));
    d.split.push_back(std::move(labels));
  }
  fill_targets(d);
  index_targets(d);
  if (header) *header = h;
  return d;
}

}  // namespace ponlab::data
