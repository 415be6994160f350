#include "ponlab/ponlab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "experiment/config.hpp"
#include "experiment/report.hpp"
#include "experiment/runner.hpp"
#include "link/pipeline.hpp"
#include "link/transmitter.hpp"
#include "numeric/checkpoint.hpp"

using namespace ponlab;

struct ponlab_config {
  experiment::ExperimentConfig cfg;
};

struct ponlab_frame {
  link::SymbolFrame frame;
  std::string config_hash;
};

struct ponlab_results {
  std::vector<experiment::PointResult> points;
  std::vector<std::string> scenario;
  std::vector<std::string> equalizer;
  std::string csv, plot, details;
  std::int64_t argmin = -1;
};

namespace {

thread_local std::string t_last_error;

template <typename Fn>
int guarded(Fn&& fn) noexcept {
  try {
    t_last_error.clear();
    fn();
    return PONLAB_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return PONLAB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return PONLAB_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown exception";
    return PONLAB_ERR_INTERNAL;
  }
}

template <typename T>
T& deref(T* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
  return *p;
}

const char* need_string(const char* s, const char* what) {
  require(s != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
  return s;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill_ber(const metrics::BerReport& r, ponlab_ber* out) {
  out->bit_errors = r.bit_errors;
  out->bits_counted = r.bits_counted;
  out->symbol_errors = r.symbol_errors;
  out->symbols_counted = r.symbols_counted;
  for (int i = 0; i < 4; ++i) out->errors_by_level[i] = r.errors_by_level[i];
  out->ber = r.ber;
  out->ser = r.ser;
}

experiment::EqualizerKind trained_kind(const char* name) {
  const auto kind = experiment::parse_equalizer(need_string(name, "equalizer"));
  require(kind == experiment::EqualizerKind::kDnn || kind == experiment::EqualizerKind::kFcScinet,
          ErrorCode::kInvalidArgument, std::string("equalizer '") + name + "' is not trainable");
  return kind;
}

ponlab_results* wrap(std::vector<experiment::PointResult> points) {
  auto r = std::make_unique<ponlab_results>();
  for (const auto& p : points) {
    r->scenario.push_back(link::to_string(p.scenario));
    r->equalizer.push_back(experiment::to_string(p.equalizer));
  }
  r->points = std::move(points);
  return r.release();
}

}  // namespace

extern "C" {

const char* ponlab_version(void) { return "0.1.0"; }

const char* ponlab_last_error(void) { return t_last_error.c_str(); }

const char* ponlab_status_name(int status) {
  if (status < 0 || status > PONLAB_ERR_INTERNAL) return "unknown";
  return error_code_name(static_cast<ErrorCode>(status));
}

void ponlab_set_log_level(int level) {
  log::set_level(level <= 0 ? log::Level::kQuiet : level == 1 ? log::Level::kWarning : log::Level::kInfo);
}

void ponlab_string_free(char* s) { std::free(s); }

int ponlab_config_create(ponlab_config** out) {
  return guarded([&] {
    deref(out, "out");
    *out = new ponlab_config{};
  });
}

int ponlab_config_load(const char* path, ponlab_config** out) {
  return guarded([&] {
    deref(out, "out");
    auto c = std::make_unique<ponlab_config>();
    c->cfg = experiment::load_experiment_config(need_string(path, "path"));
    *out = c.release();
  });
}

int ponlab_config_parse(const char* json, ponlab_config** out) {
  return guarded([&] {
    deref(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(need_string(json, "json"));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
    }
    auto c = std::make_unique<ponlab_config>();
    c->cfg = experiment::experiment_config_from_json(j);
    *out = c.release();
  });
}

void ponlab_config_destroy(ponlab_config* cfg) { delete cfg; }

int ponlab_config_to_json(const ponlab_config* cfg, char** out) {
  return guarded([&] {
    deref(out, "out");
    *out = dup_string(experiment::to_json(deref(cfg, "cfg").cfg).dump(2));
  });
}

int ponlab_config_hash(const ponlab_config* cfg, char out[17]) {
  return guarded([&] {
    require(out != nullptr, ErrorCode::kInvalidArgument, "out must not be NULL");
    const std::string h = experiment::config_hash_hex(deref(cfg, "cfg").cfg);
    std::memcpy(out, h.c_str(), 17);
  });
}

int ponlab_config_set_seed(ponlab_config* cfg, uint64_t seed) {
  return guarded([&] { deref(cfg, "cfg").cfg.master_seed = seed; });
}

int ponlab_config_set_scenario(ponlab_config* cfg, const char* scenario) {
  return guarded([&] {
    deref(cfg, "cfg").cfg.physical.link.scenario = link::parse_scenario(need_string(scenario, "scenario"));
  });
}

int ponlab_config_set_distances(ponlab_config* cfg, const double* km, size_t n) {
  return guarded([&] {
    auto& c = deref(cfg, "cfg");
    require(km != nullptr || n == 0, ErrorCode::kInvalidArgument, "km must not be NULL");
    auto copy = c.cfg;
    copy.distances_km.assign(km, km + n);
    copy.validate();
    c.cfg = std::move(copy);
  });
}

int ponlab_config_set_output_dir(ponlab_config* cfg, const char* dir) {
  return guarded([&] { deref(cfg, "cfg").cfg.output_dir = need_string(dir, "dir"); });
}

int ponlab_config_get_output_dir(const ponlab_config* cfg, char** out) {
  return guarded([&] {
    deref(out, "out");
    *out = dup_string(deref(cfg, "cfg").cfg.output_dir.string());
  });
}

int ponlab_simulate(const ponlab_config* cfg, double distance_km, uint32_t capture, ponlab_frame** out) {
  return guarded([&] {
    const auto& c = deref(cfg, "cfg").cfg;
    deref(out, "out");
    link::PhysicalConfig phys = c.physical;
    phys.link.distance_km = distance_km;
    phys.validate();
    auto f = std::make_unique<ponlab_frame>();
    f->frame = link::simulate_capture(phys, c.n_symbols, c.master_seed, capture).frame;
    f->config_hash = experiment::config_hash_hex(c);
    *out = f.release();
  });
}

void ponlab_frame_destroy(ponlab_frame* frame) { delete frame; }

size_t ponlab_frame_length(const ponlab_frame* frame) { return frame ? frame->frame.symbols.size() : 0; }

int ponlab_frame_soft(const ponlab_frame* frame, double* out, size_t n) {
  return guarded([&] {
    const auto& f = deref(frame, "frame").frame;
    require(out != nullptr || n == 0, ErrorCode::kInvalidArgument, "out must not be NULL");
    const std::size_t m = std::min(n, f.soft.size());
    std::copy_n(f.soft.begin(), m, out);
  });
}

int ponlab_frame_symbols(const ponlab_frame* frame, uint8_t* out, size_t n) {
  return guarded([&] {
    const auto& f = deref(frame, "frame").frame;
    require(out != nullptr || n == 0, ErrorCode::kInvalidArgument, "out must not be NULL");
    const std::size_t m = std::min(n, f.symbols.size());
    for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<uint8_t>(f.symbols[i]);
  });
}

int ponlab_frame_alignment(const ponlab_frame* frame, int64_t* lag_samples, int32_t* phase_offset) {
  return guarded([&] {
    const auto& f = deref(frame, "frame").frame;
    if (lag_samples) *lag_samples = f.lag_samples;
    if (phase_offset) *phase_offset = f.phase_offset;
  });
}

int ponlab_frame_write(const ponlab_frame* frame, const char* path) {
  return guarded([&] {
    const auto& f = deref(frame, "frame");
    link::write_symbol_frame(need_string(path, "path"), f.frame, {{"config_hash", f.config_hash}});
  });
}

int ponlab_write_waveform(const ponlab_config* cfg, double distance_km, uint32_t capture, const char* path) {
  return guarded([&] {
    const auto& c = deref(cfg, "cfg").cfg;
    link::PhysicalConfig phys = c.physical;
    phys.link.distance_km = distance_km;
    phys.validate();
    const auto seeds = link::capture_seeds(c.master_seed, capture, distance_km);
    const auto symbols = link::generate_rns_pam4(c.n_symbols, seeds.symbols);
    const auto field = link::simulate_received_field(phys, symbols, seeds);
    link::write_waveform_dump(need_string(path, "path"), field, c.master_seed, experiment::config_hash_hex(c));
  });
}

int ponlab_train(const ponlab_config* cfg, double distance_km, const char* equalizer, const char* checkpoint_path,
                 const char* log_path, double* best_val_mse) {
  return guarded([&] {
    const auto& c = deref(cfg, "cfg").cfg;
    const auto kind = trained_kind(equalizer);
    need_string(checkpoint_path, "checkpoint_path");
    const auto dataset = experiment::simulate_dataset(c, distance_km);
    auto model = experiment::make_model(c, kind, distance_km);
    const auto result = experiment::train_point(*model, c, dataset, distance_km);
    const std::string hash = experiment::config_hash_hex(c);
    nlohmann::json meta = {{"equalizer", experiment::to_string(kind)},
                           {"distance_km", distance_km},
                           {"config_hash", hash},
                           {"master_seed", c.master_seed},
                           {"model", model->describe()},
                           {"best_epoch", result.best_epoch},
                           {"best_val_mse", result.best_val_mse}};
    std::filesystem::path ckpt(checkpoint_path);
    if (ckpt.has_parent_path()) std::filesystem::create_directories(ckpt.parent_path());
    nn::save_checkpoint(ckpt, model->named_parameters(), nn::DType::kFloat64, meta);
    if (log_path)
      eq::write_training_log(log_path, result,
                             "config_hash=" + hash + " master_seed=" + std::to_string(c.master_seed));
    if (best_val_mse) *best_val_mse = result.best_val_mse;
  });
}

int ponlab_evaluate(const ponlab_config* cfg, double distance_km, const char* equalizer, const char* checkpoint_path,
                    ponlab_ber* out) {
  return guarded([&] {
    const auto& c = deref(cfg, "cfg").cfg;
    deref(out, "out");
    const auto kind = experiment::parse_equalizer(need_string(equalizer, "equalizer"));
    const auto dataset = experiment::simulate_dataset(c, distance_km);
    metrics::BerReport report;
    using experiment::EqualizerKind;
    if (kind == EqualizerKind::kDnn || kind == EqualizerKind::kFcScinet) {
      auto model = experiment::make_model(c, kind, distance_km);
      auto params = model->named_parameters();
      nn::restore_checkpoint(need_string(checkpoint_path, "checkpoint_path"), params);
      report = experiment::score_model(*model, dataset);
    } else if (kind == EqualizerKind::kNone) {
      report = experiment::score_unequalized(dataset);
    } else {
      eq::FfeConfig ffe = c.ffe;
      ffe.n_taps = kind == EqualizerKind::kFfe9 ? 9 : 21;
      report = experiment::score_ffe(dataset, ffe);
    }
    fill_ber(report, out);
  });
}

int ponlab_run_sweep(const ponlab_config* cfg, ponlab_results** out) {
  return guarded([&] {
    const auto& c = deref(cfg, "cfg").cfg;
    deref(out, "out");
    auto s = experiment::run_sweep(c);
    auto* r = wrap(std::move(s.results));
    r->csv = s.csv.string();
    r->plot = s.plot.string();
    r->details = s.details.string();
    *out = r;
  });
}

int ponlab_run_hypermap(const ponlab_config* cfg, ponlab_results** out) {
  return guarded([&] {
    const auto& c = deref(cfg, "cfg").cfg;
    deref(out, "out");
    auto h = experiment::run_hyperparameter_map(c);
    auto* r = wrap(std::move(h.cells));
    r->csv = h.csv.string();
    r->plot = h.plot.string();
    r->details = h.summary.string();
    r->argmin = h.argmin ? static_cast<std::int64_t>(*h.argmin) : -1;
    *out = r;
  });
}

void ponlab_results_destroy(ponlab_results* results) { delete results; }

size_t ponlab_results_count(const ponlab_results* results) { return results ? results->points.size() : 0; }

int ponlab_results_get(const ponlab_results* results, size_t index, ponlab_point* out) {
  return guarded([&] {
    const auto& r = deref(results, "results");
    deref(out, "out");
    require(index < r.points.size(), ErrorCode::kInvalidArgument, "result index out of range");
    const auto& p = r.points[index];
    out->distance_km = p.distance_km;
    out->scenario = r.scenario[index].c_str();
    out->equalizer = r.equalizer[index].c_str();
    out->window = static_cast<uint32_t>(p.window);
    out->levels = p.levels;
    out->seed = p.seed;
    out->status = p.status.c_str();
    fill_ber(p.ok() ? p.report : metrics::BerReport{}, &out->ber);
  });
}

const char* ponlab_results_path(const ponlab_results* results, const char* which) {
  if (!results || !which) return nullptr;
  const std::string w = which;
  if (w == "csv") return results->csv.c_str();
  if (w == "plot") return results->plot.c_str();
  if (w == "details") return results->details.c_str();
  return nullptr;
}

int64_t ponlab_results_argmin(const ponlab_results* results) { return results ? results->argmin : -1; }

int ponlab_complexity_report(const ponlab_config* cfg, const char* const* sweep_csv_paths, size_t n, char** json_out,
                             char** table_out) {
  return guarded([&] {
    const auto& c = deref(cfg, "cfg").cfg;
    require(sweep_csv_paths != nullptr || n == 0, ErrorCode::kInvalidArgument, "sweep_csv_paths must not be NULL");
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) texts.push_back(io::read_text_file(need_string(sweep_csv_paths[i], "path")));
    const auto rep = experiment::build_complexity_report(c, texts);
    char* j = json_out ? dup_string(rep.json.dump(2)) : nullptr;
    char* t = table_out ? dup_string(rep.table) : nullptr;
    if (json_out) *json_out = j;
    if (table_out) *table_out = t;
  });
}

}  // extern "C"
