#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "equalize/model.hpp"
#include "equalize/training.hpp"
#include "experiment/config.hpp"
#include "metrics/ber.hpp"

namespace ponlab::experiment {

struct PointResult {
  double distance_km = 0.0;
  link::Scenario scenario = link::Scenario::kCd;
  EqualizerKind equalizer = EqualizerKind::kNone;
  std::size_t window = 0;  // hypermap cells only
  int levels = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | failed:<code> | infeasible
  std::string message;
  metrics::BerReport report;
  std::optional<eq::TrainResult> training;

  bool ok() const { return status == "ok"; }
};

/// n_captures synchronized captures at one distance, split and normalized.
data::Dataset simulate_dataset(const ExperimentConfig& cfg, double distance_km);

// Model seeds depend on (kind, distance, window, levels) only, so a hypermap
// cell and the matching sweep point train the same network.
std::uint64_t model_seed(const ExperimentConfig& cfg, EqualizerKind kind, double distance_km, std::size_t window,
                         int levels);

std::unique_ptr<eq::Model> make_model(const ExperimentConfig& cfg, EqualizerKind kind, double distance_km,
                                      std::size_t window = 0, int levels = 0);
eq::TrainResult train_point(eq::Model& model, const ExperimentConfig& cfg, const data::Dataset& dataset,
                            double distance_km, int levels = 0);

// Test-split BER of each equalizer family.
metrics::BerReport score_unequalized(const data::Dataset& dataset);
metrics::BerReport score_ffe(const data::Dataset& dataset, const eq::FfeConfig& ffe);
metrics::BerReport score_model(const eq::Model& model, const data::Dataset& dataset);

/// Simulates, trains (or adapts) and scores one equalizer on a prepared dataset.
/// Stage failures are caught and reported through `status`.
PointResult run_point(const ExperimentConfig& cfg, const data::Dataset& dataset, double distance_km,
                      EqualizerKind kind, std::size_t window = 0, int levels = 0);

struct SweepOutputs {
  std::filesystem::path csv;
  std::filesystem::path plot;
  std::filesystem::path details;
  std::vector<PointResult> results;
};

/// Every (distance x equalizer) point; distances run on a bounded worker pool
/// and rows are committed in grid order by a single writer.
SweepOutputs run_sweep(const ExperimentConfig& cfg);

struct HypermapOutputs {
  std::filesystem::path csv;
  std::filesystem::path plot;
  std::filesystem::path summary;
  std::vector<PointResult> cells;
  std::optional<std::size_t> argmin;  // index into cells
};

/// FC-SCINet BER over the window x levels grid at hypermap.distance_km.
HypermapOutputs run_hyperparameter_map(const ExperimentConfig& cfg);

std::string status_for(const std::exception& e);

}  // namespace ponlab::experiment
