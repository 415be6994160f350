#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/dataset.hpp"
#include "equalize/ffe.hpp"
#include "equalize/model.hpp"
#include "equalize/training.hpp"
#include "link/config.hpp"

namespace ponlab::experiment {

enum class EqualizerKind { kNone, kFfe9, kFfe21, kDnn, kFcScinet };

EqualizerKind parse_equalizer(const std::string& name);
std::string to_string(EqualizerKind kind);

struct HypermapConfig {
  double distance_km = 9.0;
  std::vector<std::size_t> windows{16, 32, 64, 128};
  std::vector<int> levels{1, 2, 3, 4, 5};
};

struct ComplexityInputs {
  // Instantiation of the DNN expression: n_e experiments over a pre+1+post window.
  std::int64_t dnn_experiments = 30;
  std::int64_t scinet_experiments = 1;
};

struct ExperimentConfig {
  link::PhysicalConfig physical;
  std::vector<double> distances_km{0.0, 3.0, 5.0, 7.0, 9.0, 11.0};
  std::size_t n_symbols = std::size_t{1} << 16;
  std::size_t n_captures = 3;
  std::vector<EqualizerKind> equalizers{EqualizerKind::kNone, EqualizerKind::kFfe9, EqualizerKind::kFfe21,
                                        EqualizerKind::kDnn, EqualizerKind::kFcScinet};
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "results";
  // 0 picks std::thread::hardware_concurrency().
  std::size_t workers = 1;

  eq::FfeConfig ffe;  // n_taps is set per equalizer
  eq::DnnConfig dnn;
  eq::FcScinetConfig fc_scinet;
  eq::TrainConfig training;
  data::SplitConfig split;
  HypermapConfig hypermap;
  ComplexityInputs complexity;

  ExperimentConfig();

  link::Scenario scenario() const { return physical.link.scenario; }
  void validate() const;
};

struct Margins {
  std::size_t before = 0;
  std::size_t after = 0;
};

// Window margins shared by every model of a run (sweep and hypermap alike), so
// all equalizers are scored on the same test symbols.
Margins dataset_margins(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Hash of the canonical JSON form; embedded in every output file.
std::string config_hash_hex(const ExperimentConfig& cfg);

}  // namespace ponlab::experiment
