#include "experiment/config.hpp"

#include <algorithm>
#include <fstream>

#include "common/error.hpp"
#include "common/json_reader.hpp"
#include "common/rng.hpp"

namespace ponlab::experiment {

using json_util::Reader;
using nlohmann::json;

EqualizerKind parse_equalizer(const std::string& name) {
  if (name == "none") return EqualizerKind::kNone;
  if (name == "ffe9") return EqualizerKind::kFfe9;
  if (name == "ffe21") return EqualizerKind::kFfe21;
  if (name == "dnn") return EqualizerKind::kDnn;
  if (name == "fc-scinet") return EqualizerKind::kFcScinet;
  fail(ErrorCode::kInvalidArgument, "unknown equalizer '" + name + "' (expected none|ffe9|ffe21|dnn|fc-scinet)");
}

std::string to_string(EqualizerKind kind) {
  switch (kind) {
    case EqualizerKind::kNone: return "none";
    case EqualizerKind::kFfe9: return "ffe9";
    case EqualizerKind::kFfe21: return "ffe21";
    case EqualizerKind::kDnn: return "dnn";
    case EqualizerKind::kFcScinet: return "fc-scinet";
  }
  return "?";
}

ExperimentConfig::ExperimentConfig() {
  training.epochs = 10;
  training.batch_size = 32;
  training.optimizer.kind = nn::OptimizerKind::kAdam;
  training.optimizer.learning_rate = 1e-3;
  fc_scinet.hidden = 4;
}

void ExperimentConfig::validate() const {
  physical.validate();
  require(!distances_km.empty(), ErrorCode::kInvalidArgument, "distances_km must not be empty");
  for (std::size_t i = 0; i < distances_km.size(); ++i) {
    require(distances_km[i] >= 0.0, ErrorCode::kInvalidArgument, "distances must be non-negative");
    require(i == 0 || distances_km[i] > distances_km[i - 1], ErrorCode::kInvalidArgument,
            "distances must be strictly increasing");
    require(physical.link.opl_db + 1e-12 >= physical.fiber.loss_db_per_km * distances_km[i],
            ErrorCode::kInvalidArgument, "opl_db is smaller than the fiber loss at " +
                                             std::to_string(distances_km[i]) + " km");
  }
  require(n_symbols >= (std::size_t{1} << 12), ErrorCode::kInvalidArgument, "n_symbols must be >= 4096");
  require(n_captures >= 1, ErrorCode::kInvalidArgument, "n_captures must be >= 1");
  require(!equalizers.empty(), ErrorCode::kInvalidArgument, "equalizers must not be empty");
  require(split.train_blocks + split.val_blocks + split.test_blocks == split.n_blocks && split.train_blocks > 0 &&
              split.val_blocks > 0 && split.test_blocks > 0,
          ErrorCode::kInvalidArgument, "split block counts must be positive and add up to n_blocks");
  const Margins m = dataset_margins(*this);
  require(n_symbols / split.n_blocks > 2 * (m.before + m.after + 1), ErrorCode::kInvalidArgument,
          "split blocks of " + std::to_string(n_symbols / split.n_blocks) +
              " symbols are too short for windows needing a margin of " + std::to_string(m.before + m.after + 1));
  ffe.validate();
  dnn.validate();
  fc_scinet.validate();
  training.validate();
  require(hypermap.distance_km >= 0.0, ErrorCode::kInvalidArgument, "hypermap distance must be non-negative");
  for (std::size_t p : hypermap.windows) require(p >= 2, ErrorCode::kInvalidArgument, "hypermap windows must be >= 2");
  for (int l : hypermap.levels) require(l >= 1, ErrorCode::kInvalidArgument, "hypermap levels must be >= 1");
  require(complexity.dnn_experiments > 0 && complexity.scinet_experiments > 0, ErrorCode::kInvalidArgument,
          "complexity experiment counts must be positive");
}

json to_json(const ExperimentConfig& c) {
  json physical = link::to_json(c.physical);
  // The scenario lives at the top level and the distance comes from the sweep.
  physical["link"].erase("scenario");
  physical["link"].erase("distance_km");
  std::vector<std::string> eqs;
  for (auto e : c.equalizers) eqs.push_back(to_string(e));
  std::vector<std::size_t> hidden = c.dnn.hidden;
  return {
      {"scenario", link::to_string(c.scenario())},
      {"distances_km", c.distances_km},
      {"n_symbols", c.n_symbols},
      {"n_captures", c.n_captures},
      {"equalizers", eqs},
      {"master_seed", c.master_seed},
      {"output_dir", c.output_dir.string()},
      {"workers", c.workers},
      {"physical", physical},
      {"ffe", {{"mu", c.ffe.mu}, {"training_symbols", c.ffe.training_symbols}}},
      {"dnn",
       {{"hidden", hidden},
        {"activation", eq::to_string(c.dnn.activation)},
        {"pre", c.dnn.pre},
        {"post", c.dnn.post}}},
      {"fc_scinet",
       {{"window", c.fc_scinet.window},
        {"levels", c.fc_scinet.levels},
        {"hidden", c.fc_scinet.hidden},
        {"conv_kernel", c.fc_scinet.conv_kernel},
        {"fc_kernel", c.fc_scinet.fc_kernel},
        {"fc_mode", data::to_string(c.fc_scinet.fc_mode)},
        {"output_mode", eq::to_string(c.fc_scinet.output_mode)},
        {"leaky_slope", c.fc_scinet.leaky_slope},
        {"stack_tanh", c.fc_scinet.stack_tanh},
        {"decomp_identity_init", c.fc_scinet.decomp_identity_init}}},
      {"training",
       {{"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"max_train_windows", c.training.max_train_windows},
        {"optimizer", nn::to_string(c.training.optimizer.kind)},
        {"learning_rate", c.training.optimizer.learning_rate},
        {"l2", c.training.optimizer.l2},
        {"beta1", c.training.optimizer.beta1},
        {"beta2", c.training.optimizer.beta2},
        {"epsilon", c.training.optimizer.epsilon}}},
      {"split",
       {{"n_blocks", c.split.n_blocks},
        {"train_blocks", c.split.train_blocks},
        {"val_blocks", c.split.val_blocks},
        {"test_blocks", c.split.test_blocks}}},
      {"hypermap",
       {{"distance_km", c.hypermap.distance_km}, {"windows", c.hypermap.windows}, {"levels", c.hypermap.levels}}},
      {"complexity",
       {{"dnn_experiments", c.complexity.dnn_experiments},
        {"scinet_experiments", c.complexity.scinet_experiments}}},
  };
}

namespace {

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  auto it = j.find(key);
  return it == j.end() ? empty : *it;
}

}  // namespace

Margins dataset_margins(const ExperimentConfig& cfg) {
  Margins m{cfg.dnn.pre, cfg.dnn.post};
  auto widen = [&](std::size_t p) {
    m.before = std::max(m.before, p / 2);
    m.after = std::max(m.after, p - 1 - p / 2);
  };
  widen(cfg.fc_scinet.window);
  for (std::size_t p : cfg.hypermap.windows) widen(p);
  // FFE taps read zeros outside a capture, so they impose no margin.
  return m;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  std::string scenario = link::to_string(c.scenario());
  std::vector<std::string> eqs;
  for (auto e : c.equalizers) eqs.push_back(to_string(e));
  std::string output_dir = c.output_dir.string();
  json physical = json::object();
  json dummy;

  Reader(j, "experiment")
      .field("scenario", scenario)
      .field("distances_km", c.distances_km)
      .field("n_symbols", c.n_symbols)
      .field("n_captures", c.n_captures)
      .field("equalizers", eqs)
      .field("master_seed", c.master_seed)
      .field("output_dir", output_dir)
      .field("workers", c.workers)
      .field("physical", physical)
      .field("ffe", dummy)
      .field("dnn", dummy)
      .field("fc_scinet", dummy)
      .field("training", dummy)
      .field("split", dummy)
      .field("hypermap", dummy)
      .field("complexity", dummy)
      .finish();

  require(!physical.contains("link") || !physical["link"].contains("scenario"), ErrorCode::kInvalidArgument,
          "set the scenario at the top level, not in physical.link");
  require(!physical.contains("link") || !physical["link"].contains("distance_km"), ErrorCode::kInvalidArgument,
          "distances come from distances_km, not physical.link.distance_km");
  c.physical = link::physical_config_from_json(physical);
  c.physical.link.scenario = link::parse_scenario(scenario);
  c.output_dir = output_dir;
  c.equalizers.clear();
  for (const auto& e : eqs) c.equalizers.push_back(parse_equalizer(e));

  Reader(section(j, "ffe"), "ffe").field("mu", c.ffe.mu).field("training_symbols", c.ffe.training_symbols).finish();

  std::string activation = eq::to_string(c.dnn.activation);
  Reader(section(j, "dnn"), "dnn")
      .field("hidden", c.dnn.hidden)
      .field("activation", activation)
      .field("pre", c.dnn.pre)
      .field("post", c.dnn.post)
      .finish();
  c.dnn.activation = eq::parse_activation(activation);

  std::string fc_mode = data::to_string(c.fc_scinet.fc_mode);
  std::string output_mode = eq::to_string(c.fc_scinet.output_mode);
  Reader(section(j, "fc_scinet"), "fc_scinet")
      .field("window", c.fc_scinet.window)
      .field("levels", c.fc_scinet.levels)
      .field("hidden", c.fc_scinet.hidden)
      .field("conv_kernel", c.fc_scinet.conv_kernel)
      .field("fc_kernel", c.fc_scinet.fc_kernel)
      .field("fc_mode", fc_mode)
      .field("output_mode", output_mode)
      .field("leaky_slope", c.fc_scinet.leaky_slope)
      .field("stack_tanh", c.fc_scinet.stack_tanh)
      .field("decomp_identity_init", c.fc_scinet.decomp_identity_init)
      .finish();
  c.fc_scinet.fc_mode = data::parse_fc_mode(fc_mode);
  c.fc_scinet.output_mode = eq::parse_output_mode(output_mode);

  std::string optimizer = nn::to_string(c.training.optimizer.kind);
  Reader(section(j, "training"), "training")
      .field("epochs", c.training.epochs)
      .field("batch_size", c.training.batch_size)
      .field("max_train_windows", c.training.max_train_windows)
      .field("optimizer", optimizer)
      .field("learning_rate", c.training.optimizer.learning_rate)
      .field("l2", c.training.optimizer.l2)
      .field("beta1", c.training.optimizer.beta1)
      .field("beta2", c.training.optimizer.beta2)
      .field("epsilon", c.training.optimizer.epsilon)
      .finish();
  c.training.optimizer.kind = nn::parse_optimizer_kind(optimizer);

  Reader(section(j, "split"), "split")
      .field("n_blocks", c.split.n_blocks)
      .field("train_blocks", c.split.train_blocks)
      .field("val_blocks", c.split.val_blocks)
      .field("test_blocks", c.split.test_blocks)
      .finish();
  Reader(section(j, "hypermap"), "hypermap")
      .field("distance_km", c.hypermap.distance_km)
      .field("windows", c.hypermap.windows)
      .field("levels", c.hypermap.levels)
      .finish();
  Reader(section(j, "complexity"), "complexity")
      .field("dnn_experiments", c.complexity.dnn_experiments)
      .field("scinet_experiments", c.complexity.scinet_experiments)
      .finish();

  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, "config " + path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  // Output location and parallelism do not change results.
  j.erase("output_dir");
  j.erase("workers");
  return link::hash_hex(link::config_hash(j));
}

}  // namespace ponlab::experiment
