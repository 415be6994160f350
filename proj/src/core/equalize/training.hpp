#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "data/dataset.hpp"
#include "equalize/model.hpp"
#include "numeric/optimizer.hpp"

namespace ponlab::eq {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  nn::OptimizerConfig optimizer;
  // Caps the windows visited per epoch (0 = whole training split).
  std::size_t max_train_windows = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 = the initial parameters
  double best_val_mse = 0.0;
  double initial_val_mse = 0.0;
};

/// Minibatch MSE descent with per-epoch validation. The parameters of the
/// epoch (or the untrained start) with the lowest validation MSE are restored
/// on return. A non-finite loss aborts with kNumerical.
TrainResult train_model(Model& model, const data::Dataset& dataset, const TrainConfig& cfg);

// Normalized predictions for the symbol each ref points at.
std::vector<double> predict(const Model& model, const data::Dataset& dataset, std::span<const data::WindowRef> refs,
                            std::size_t batch = 512);

double evaluate_mse(const Model& model, const data::Dataset& dataset, std::span<const data::WindowRef> refs);

std::string format_training_log(const TrainResult& result, const std::string& comment);
void write_training_log(const std::filesystem::path& path, const TrainResult& result, const std::string& comment);

}  // namespace ponlab::eq
