#include "experiment/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "equalize/ffe.hpp"
#include "experiment/report.hpp"
#include "link/pipeline.hpp"

namespace ponlab::experiment {

namespace {

std::uint64_t metres(double km) { return static_cast<std::uint64_t>(std::llround(km * 1000.0)); }

std::size_t resolve_workers(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return std::max<std::size_t>(1, std::min(n, jobs));
}

template <typename Fn>
void parallel_for(std::size_t jobs, std::size_t workers, Fn&& fn) {
  workers = resolve_workers(workers, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) fn(i);
    });
}

// Serializes every file write of a run. Rows are committed in job order as
// soon as all earlier jobs are done, so the output never depends on timing.
class OrderedWriter {
 public:
  OrderedWriter(const std::filesystem::path& csv, const std::string& header, std::size_t jobs)
      : out_(csv, std::ios::binary | std::ios::trunc), pending_(jobs) {
    require(static_cast<bool>(out_), ErrorCode::kIo, "cannot open " + csv.string());
    out_ << header;
    out_.flush();
  }

  void submit(std::size_t job, std::string rows, std::vector<std::pair<std::filesystem::path, std::string>> files) {
    std::lock_guard lock(mutex_);
    for (auto& [path, text] : files) io::write_text_file(path, text);
    pending_[job] = std::move(rows);
    while (next_ < pending_.size() && pending_[next_]) {
      out_ << *pending_[next_];
      pending_[next_].reset();
      ++next_;
    }
    out_.flush();
    require(static_cast<bool>(out_), ErrorCode::kIo, "write failed");
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
  std::vector<std::optional<std::string>> pending_;
  std::size_t next_ = 0;
};

std::string km_label(double km) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%gkm", km);
  return buf;
}

nlohmann::json detail_json(const PointResult& r) {
  nlohmann::json j = {
      {"distance_km", r.distance_km},
      {"scenario", link::to_string(r.scenario)},
      {"equalizer", to_string(r.equalizer)},
      {"status", r.status},
      {"seed", r.seed},
  };
  if (r.window) {
    j["window"] = r.window;
    j["levels"] = r.levels;
  }
  if (!r.message.empty()) j["message"] = r.message;
  if (r.ok()) {
    j["bit_errors"] = r.report.bit_errors;
    j["bits_counted"] = r.report.bits_counted;
    j["symbol_errors"] = r.report.symbol_errors;
    j["symbols_counted"] = r.report.symbols_counted;
    j["errors_by_level"] = r.report.errors_by_level;
    j["ber"] = r.report.ber;
    j["ser"] = r.report.ser;
  }
  if (r.training) {
    j["training"] = {{"best_epoch", r.training->best_epoch},
                     {"best_val_mse", r.training->best_val_mse},
                     {"initial_val_mse", r.training->initial_val_mse},
                     {"epochs_run", r.training->history.size()}};
  }
  return j;
}

std::vector<link::Symbol> decide(const data::Dataset& d, std::span<const double> normalized) {
  std::vector<link::Symbol> out(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i)
    out[i] = metrics::slice_level(d.target_stats.invert(normalized[i]));
  return out;
}

std::vector<link::Symbol> test_truth(const data::Dataset& d) {
  std::vector<link::Symbol> truth;
  truth.reserve(d.test.size());
  for (const auto& ref : d.test) truth.push_back(d.symbols[ref.capture][ref.target]);
  return truth;
}

int kind_id(EqualizerKind k) { return static_cast<int>(k); }

}  // namespace

std::string status_for(const std::exception& e) {
  if (const auto* pe = dynamic_cast<const Error*>(&e)) {
    if (pe->code() == ErrorCode::kInfeasible) return "infeasible";
    return std::string("failed:") + error_code_name(pe->code());
  }
  return "failed:internal";
}

data::Dataset simulate_dataset(const ExperimentConfig& cfg, double distance_km) {
  link::PhysicalConfig phys = cfg.physical;
  phys.link.distance_km = distance_km;
  phys.validate();
  std::vector<link::SymbolFrame> frames;
  frames.reserve(cfg.n_captures);
  for (std::size_t c = 0; c < cfg.n_captures; ++c)
    frames.push_back(link::simulate_capture(phys, cfg.n_symbols, cfg.master_seed, c).frame);
  data::SplitConfig split = cfg.split;
  split.seed = derive_seed(cfg.master_seed, "split");
  const Margins m = dataset_margins(cfg);
  return data::build_dataset(frames, split, m.before, m.after);
}

std::uint64_t model_seed(const ExperimentConfig& cfg, EqualizerKind kind, double distance_km, std::size_t window,
                         int levels) {
  return derive_seed(cfg.master_seed, "model",
                     {static_cast<std::uint64_t>(kind_id(kind)), metres(distance_km), window,
                      static_cast<std::uint64_t>(levels)});
}

std::unique_ptr<eq::Model> make_model(const ExperimentConfig& cfg, EqualizerKind kind, double distance_km,
                                      std::size_t window, int levels) {
  if (kind == EqualizerKind::kDnn) {
    const std::size_t w = cfg.dnn.pre + 1 + cfg.dnn.post;
    return std::make_unique<eq::DnnModel>(cfg.dnn, model_seed(cfg, kind, distance_km, w, 0));
  }
  require(kind == EqualizerKind::kFcScinet, ErrorCode::kInvalidArgument,
          "equalizer '" + to_string(kind) + "' has no trainable model");
  eq::FcScinetConfig sc = cfg.fc_scinet;
  if (window) sc.window = window;
  if (levels) sc.levels = levels;
  return std::make_unique<eq::FcScinetModel>(sc, model_seed(cfg, kind, distance_km, sc.window, sc.levels));
}

eq::TrainResult train_point(eq::Model& model, const ExperimentConfig& cfg, const data::Dataset& dataset,
                            double distance_km, int levels) {
  eq::TrainConfig tc = cfg.training;
  const EqualizerKind kind = model.kind() == "dnn" ? EqualizerKind::kDnn : EqualizerKind::kFcScinet;
  if (kind == EqualizerKind::kFcScinet && levels == 0) levels = cfg.fc_scinet.levels;
  tc.seed = derive_seed(cfg.master_seed, "train",
                        {static_cast<std::uint64_t>(kind_id(kind)), metres(distance_km), model.window_length(),
                         static_cast<std::uint64_t>(kind == EqualizerKind::kDnn ? 0 : levels)});
  return eq::train_model(model, dataset, tc);
}

metrics::BerReport score_unequalized(const data::Dataset& d) {
  std::vector<double> x;
  x.reserve(d.test.size());
  for (const auto& ref : d.test) x.push_back(d.inputs[ref.capture][ref.target]);
  return metrics::count_ber(decide(d, x), test_truth(d));
}

metrics::BerReport score_ffe(const data::Dataset& d, const eq::FfeConfig& ffe) {
  std::vector<double> y;
  y.reserve(d.test.size());
  std::vector<eq::FfeResult> runs;
  for (std::size_t c = 0; c < d.inputs.size(); ++c) {
    std::vector<std::uint8_t> supervised(d.split[c].size());
    for (std::size_t n = 0; n < supervised.size(); ++n) supervised[n] = d.split[c][n] == link::SplitLabel::kTrain;
    runs.push_back(eq::ffe_equalize(d.inputs[c], d.targets[c], ffe, d.target_stats, supervised));
  }
  for (const auto& ref : d.test) y.push_back(runs[ref.capture].output[ref.target]);
  return metrics::count_ber(decide(d, y), test_truth(d));
}

metrics::BerReport score_model(const eq::Model& model, const data::Dataset& d) {
  return metrics::count_ber(decide(d, eq::predict(model, d, d.test)), test_truth(d));
}

PointResult run_point(const ExperimentConfig& cfg, const data::Dataset& dataset, double distance_km,
                      EqualizerKind kind, std::size_t window, int levels) {
  PointResult r;
  r.distance_km = distance_km;
  r.scenario = cfg.scenario();
  r.equalizer = kind;
  r.window = window;
  r.levels = levels;
  r.seed = cfg.master_seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (kind) {
      case EqualizerKind::kNone: r.report = score_unequalized(dataset); break;
      case EqualizerKind::kFfe9:
      case EqualizerKind::kFfe21: {
        eq::FfeConfig ffe = cfg.ffe;
        ffe.n_taps = kind == EqualizerKind::kFfe9 ? 9 : 21;
        r.report = score_ffe(dataset, ffe);
        break;
      }
      case EqualizerKind::kDnn:
      case EqualizerKind::kFcScinet: {
        auto model = make_model(cfg, kind, distance_km, window, levels);
        r.training = train_point(*model, cfg, dataset, distance_km, levels);
        r.report = score_model(*model, dataset);
        break;
      }
    }
  } catch (const std::exception& e) {
    r.status = status_for(e);
    r.message = e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %s%s: %s ber=%.4g (%.1fs)", km_label(distance_km).c_str(),
                to_string(kind).c_str(),
                window ? (" p=" + std::to_string(window) + " L=" + std::to_string(levels)).c_str() : "",
                r.status.c_str(), r.report.ber, secs);
  log::info(buf);
  return r;
}

SweepOutputs run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string hash = config_hash_hex(cfg);
  const std::string scenario = link::to_string(cfg.scenario());
  std::filesystem::create_directories(cfg.output_dir / "train_logs");

  SweepOutputs out;
  out.csv = cfg.output_dir / ("sweep_" + scenario + ".csv");
  out.plot = cfg.output_dir / ("sweep_" + scenario + ".svg");
  out.details = cfg.output_dir / ("sweep_" + scenario + ".json");

  const std::size_t jobs = cfg.distances_km.size();
  std::vector<std::vector<PointResult>> per_job(jobs);
  OrderedWriter writer(out.csv, header_comment("sweep", hash, cfg.master_seed) + kSweepColumns + "\n", jobs);

  parallel_for(jobs, cfg.workers, [&](std::size_t job) {
    const double km = cfg.distances_km[job];
    std::vector<PointResult> rows;
    std::optional<data::Dataset> dataset;
    std::string sim_status, sim_message;
    try {
      dataset = simulate_dataset(cfg, km);
    } catch (const std::exception& e) {
      sim_status = status_for(e);
      if (sim_status == "infeasible") sim_status = "failed:infeasible";
      sim_message = std::string("simulation: ") + e.what();
      log::warning(km_label(km) + " " + sim_message);
    }
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    std::string text;
    for (EqualizerKind kind : cfg.equalizers) {
      PointResult r;
      if (dataset) {
        r = run_point(cfg, *dataset, km, kind);
      } else {
        r.distance_km = km;
        r.scenario = cfg.scenario();
        r.equalizer = kind;
        r.seed = cfg.master_seed;
        r.status = sim_status;
        r.message = sim_message;
      }
      if (r.training) {
        const std::string name = scenario + "_" + km_label(km) + "_" + to_string(kind) + ".csv";
        files.emplace_back(cfg.output_dir / "train_logs" / name,
                           eq::format_training_log(*r.training, "config_hash=" + hash + " master_seed=" +
                                                              std::to_string(cfg.master_seed)));
      }
      text += format_sweep_row(r);
      rows.push_back(std::move(r));
    }
    per_job[job] = rows;
    writer.submit(job, std::move(text), std::move(files));
  });

  nlohmann::json details = {{"format", "ponlab-sweep-details"},
                            {"config_hash", hash},
                            {"master_seed", cfg.master_seed},
                            {"points", nlohmann::json::array()}};
  details["checks"] = nlohmann::json::array();
  for (auto& rows : per_job) {
    const PointResult* none = nullptr;
    const PointResult* ffe21 = nullptr;
    for (const auto& r : rows) {
      if (r.ok() && r.equalizer == EqualizerKind::kNone) none = &r;
      if (r.ok() && r.equalizer == EqualizerKind::kFfe21) ffe21 = &r;
    }
    // Equalization should not hurt once dispersion dominates.
    if (none && ffe21 && none->distance_km >= 5.0) {
      const bool pass = none->report.ber >= ffe21->report.ber;
      details["checks"].push_back({{"check", "ber_none_ge_ffe21"},
                                   {"distance_km", none->distance_km},
                                   {"pass", pass}});
      if (!pass) log::warning(km_label(none->distance_km) + ": ffe21 BER exceeds the unequalized BER");
    }
    for (auto& r : rows) {
      details["points"].push_back(detail_json(r));
      out.results.push_back(std::move(r));
    }
  }
  io::write_text_file(out.details, details.dump(2) + "\n");
  io::write_text_file(out.plot, render_sweep_svg(io::read_text_file(out.csv)));
  return out;
}

HypermapOutputs run_hyperparameter_map(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string hash = config_hash_hex(cfg);
  const std::string scenario = link::to_string(cfg.scenario());
  const double km = cfg.hypermap.distance_km;
  std::filesystem::create_directories(cfg.output_dir / "train_logs");

  HypermapOutputs out;
  out.csv = cfg.output_dir / ("hypermap_" + scenario + ".csv");
  out.plot = cfg.output_dir / ("hypermap_" + scenario + ".svg");
  out.summary = cfg.output_dir / ("hypermap_" + scenario + ".json");

  struct Cell {
    std::size_t window;
    int levels;
  };
  std::vector<Cell> grid;
  for (std::size_t p : cfg.hypermap.windows)
    for (int l : cfg.hypermap.levels) grid.push_back({p, l});

  std::optional<data::Dataset> dataset;
  std::string sim_status, sim_message;
  try {
    dataset = simulate_dataset(cfg, km);
  } catch (const std::exception& e) {
    sim_status = status_for(e);
    if (sim_status == "infeasible") sim_status = "failed:infeasible";
    sim_message = std::string("simulation: ") + e.what();
  }

  std::vector<PointResult> cells(grid.size());
  OrderedWriter writer(out.csv, header_comment("hypermap", hash, cfg.master_seed) + kHypermapColumns + "\n",
                       grid.size());
  parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
    const auto [p, l] = grid[i];
    PointResult r;
    r.distance_km = km;
    r.scenario = cfg.scenario();
    r.equalizer = EqualizerKind::kFcScinet;
    r.window = p;
    r.levels = l;
    r.seed = cfg.master_seed;
    eq::FcScinetConfig sc = cfg.fc_scinet;
    sc.window = p;
    sc.levels = l;
    bool feasible = true;
    try {
      sc.validate();
    } catch (const std::exception& e) {
      feasible = false;
      r.status = status_for(e);
      r.message = e.what();
    }
    if (feasible && !dataset) {
      r.status = sim_status;
      r.message = sim_message;
    } else if (feasible) {
      r = run_point(cfg, *dataset, km, EqualizerKind::kFcScinet, p, l);
    }
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    if (r.training) {
      const std::string name = "hypermap_" + scenario + "_" + km_label(km) + "_p" + std::to_string(p) + "_L" +
                               std::to_string(l) + ".csv";
      files.emplace_back(cfg.output_dir / "train_logs" / name,
                         eq::format_training_log(*r.training, "config_hash=" + hash + " master_seed=" +
                                                            std::to_string(cfg.master_seed)));
    }
    writer.submit(i, format_hypermap_row(r), std::move(files));
    cells[i] = std::move(r);
  });

  const std::string csv_text = io::read_text_file(out.csv);
  const auto rows = parse_hypermap_csv(csv_text);
  out.argmin = hypermap_argmin(rows);
  nlohmann::json summary = {{"format", "ponlab-hypermap-summary"},
                            {"config_hash", hash},
                            {"master_seed", cfg.master_seed},
                            {"distance_km", km},
                            {"scenario", scenario},
                            {"cells", nlohmann::json::array()}};
  for (const auto& c : cells) summary["cells"].push_back(detail_json(c));
  if (out.argmin) {
    const auto& best = rows[*out.argmin];
    summary["argmin"] = {{"window", best.window}, {"levels", best.levels}, {"ber", *best.ber}};
  } else {
    summary["argmin"] = nullptr;
  }
  io::write_text_file(out.summary, summary.dump(2) + "\n");
  io::write_text_file(out.plot, render_hypermap_svg(csv_text));
  out.cells = std::move(cells);
  return out;
}

}  // namespace ponlab::experiment
