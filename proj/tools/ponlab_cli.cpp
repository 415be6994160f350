// Command-line front end over the ponlab C interface.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ponlab/ponlab.h"

namespace fs = std::filesystem;

namespace {

struct CliError {
  int status;
};

void check(int status, const std::string& what) {
  if (status == PONLAB_OK) return;
  std::cerr << "ponlab: " << what << " failed (" << ponlab_status_name(status) << "): " << ponlab_last_error()
            << '\n';
  throw CliError{status};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ponlab_string_free(s);
  return out;
}

class ConfigHandle {
 public:
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  ~ConfigHandle() { ponlab_config_destroy(p_); }
  ponlab_config** out() { return &p_; }
  ponlab_config* get() const { return p_; }

 private:
  ponlab_config* p_ = nullptr;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string scenario;
  std::vector<double> distances;
  std::string output;
  bool verbose = false;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master seed override");
  app->add_option("--scenario", c.scenario, "CD or Realistic");
  app->add_option("--distances", c.distances, "distance list override, e.g. 5,7,9,11")->delimiter(',');
  app->add_option("-o,--output", c.output, "output directory (relative paths resolve under $PONLAB_OUTPUT_ROOT)");
  app->add_flag("-v,--verbose", c.verbose, "progress messages");
  app->add_flag("-q,--quiet", c.quiet, "errors only");
}

void load(const Common& c, ConfigHandle& cfg) {
  ponlab_set_log_level(c.quiet ? 0 : c.verbose ? 2 : 1);
  if (c.config_path.empty())
    check(ponlab_config_create(cfg.out()), "config");
  else
    check(ponlab_config_load(c.config_path.c_str(), cfg.out()), "loading " + c.config_path);
  if (c.seed) check(ponlab_config_set_seed(cfg.get(), *c.seed), "--seed");
  if (!c.scenario.empty()) check(ponlab_config_set_scenario(cfg.get(), c.scenario.c_str()), "--scenario");
  if (!c.distances.empty())
    check(ponlab_config_set_distances(cfg.get(), c.distances.data(), c.distances.size()), "--distances");

  fs::path out = c.output;
  if (out.empty()) {
    char* dir = nullptr;
    check(ponlab_config_get_output_dir(cfg.get(), &dir), "config");
    out = take(dir);
  }
  if (const char* root = std::getenv("PONLAB_OUTPUT_ROOT"); root && *root && out.is_relative()) out = fs::path(root) / out;
  check(ponlab_config_set_output_dir(cfg.get(), out.string().c_str()), "--output");
}

fs::path output_dir(const ConfigHandle& cfg) {
  char* dir = nullptr;
  check(ponlab_config_get_output_dir(cfg.get(), &dir), "config");
  return take(dir);
}

std::string scenario_of(const ConfigHandle& cfg) {
  char* text = nullptr;
  check(ponlab_config_to_json(cfg.get(), &text), "config");
  return nlohmann::json::parse(take(text)).at("scenario").get<std::string>();
}

std::string km_tag(double km) {
  std::ostringstream os;
  os << km << "km";
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) {
    std::cerr << "ponlab: cannot write " << path << '\n';
    throw CliError{PONLAB_ERR_IO};
  }
}

void print_ber(const char* label, const ponlab_ber& b) {
  std::printf("%s ber=%.6e bit_errors=%llu bits=%llu ser=%.6e\n", label, b.ber,
              static_cast<unsigned long long>(b.bit_errors), static_cast<unsigned long long>(b.bits_counted), b.ser);
}

void print_points(const ponlab_results* r, bool hypermap) {
  const std::size_t n = ponlab_results_count(r);
  for (std::size_t i = 0; i < n; ++i) {
    ponlab_point p{};
    check(ponlab_results_get(r, i, &p), "results");
    char ber[32] = "-";
    if (std::string(p.status) == "ok") std::snprintf(ber, sizeof(ber), "%.6e", p.ber.ber);
    if (hypermap)
      std::printf("p=%-4u L=%-2d %-11s ber=%s\n", p.window, p.levels, p.status, ber);
    else
      std::printf("%6.2f km  %-10s %-11s ber=%s\n", p.distance_km, p.equalizer, p.status, ber);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ponlab: 100G PAM-4 PON link simulator and equalizer bench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ponlab_version()));

  Common common;
  double distance = 0.0;
  std::uint32_t capture = 0;
  std::string out_path, waveform_path, model = "fc-scinet", checkpoint, log_path;
  std::vector<std::string> sweeps;

  auto* config_cmd = app.add_subcommand("config", "print the effective configuration");
  add_common(config_cmd, common);

  auto* simulate = app.add_subcommand("simulate", "simulate one capture and dump the 1-SpS frame");
  add_common(simulate, common);
  simulate->add_option("-d,--distance", distance, "fiber length in km")->required();
  simulate->add_option("--capture", capture, "capture index");
  simulate->add_option("--out", out_path, "symbol frame path");
  simulate->add_option("--waveform", waveform_path, "also dump the received optical field here");

  auto* train = app.add_subcommand("train", "train dnn or fc-scinet at one distance");
  add_common(train, common);
  train->add_option("-d,--distance", distance, "fiber length in km")->required();
  train->add_option("-m,--model", model, "dnn | fc-scinet")->check(CLI::IsMember({"dnn", "fc-scinet"}));
  train->add_option("--checkpoint", checkpoint, "checkpoint path");
  train->add_option("--log", log_path, "training log CSV path");

  auto* evaluate = app.add_subcommand("evaluate", "test-split BER of one equalizer at one distance");
  add_common(evaluate, common);
  evaluate->add_option("-d,--distance", distance, "fiber length in km")->required();
  evaluate->add_option("-m,--model", model, "none | ffe9 | ffe21 | dnn | fc-scinet")
      ->check(CLI::IsMember({"none", "ffe9", "ffe21", "dnn", "fc-scinet"}));
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint of a trained model");

  auto* sweep = app.add_subcommand("sweep", "BER vs distance for every configured equalizer");
  add_common(sweep, common);

  auto* hypermap = app.add_subcommand("hypermap", "FC-SCINet BER over window size x levels");
  add_common(hypermap, common);

  auto* complexity = app.add_subcommand("complexity", "RMpS / mBER / PRB table");
  add_common(complexity, common);
  complexity->add_option("--sweep", sweeps, "sweep CSV files (default: sweep_*.csv in the output directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    ConfigHandle cfg;
    load(common, cfg);
    const fs::path out = output_dir(cfg);
    const std::string scenario = scenario_of(cfg);

    if (*config_cmd) {
      char* text = nullptr;
      check(ponlab_config_to_json(cfg.get(), &text), "config");
      std::cout << take(text) << '\n';
    } else if (*simulate) {
      ponlab_frame* frame = nullptr;
      check(ponlab_simulate(cfg.get(), distance, capture, &frame), "simulate");
      const fs::path path = out_path.empty()
                                ? out / ("capture_" + scenario + "_" + km_tag(distance) + "_" + std::to_string(capture) +
                                         ".bin")
                                : fs::path(out_path);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      const int rc = ponlab_frame_write(frame, path.string().c_str());
      std::int64_t lag = 0;
      std::int32_t phase = 0;
      ponlab_frame_alignment(frame, &lag, &phase);
      const std::size_t n = ponlab_frame_length(frame);
      ponlab_frame_destroy(frame);
      check(rc, "writing frame");
      std::printf("%zu symbols, lag %lld samples, phase offset %d -> %s\n", n, static_cast<long long>(lag), phase,
                  path.string().c_str());
      if (!waveform_path.empty()) {
        check(ponlab_write_waveform(cfg.get(), distance, capture, waveform_path.c_str()), "waveform dump");
        std::printf("optical field -> %s\n", waveform_path.c_str());
      }
    } else if (*train) {
      const fs::path ckpt =
          checkpoint.empty() ? out / "models" / (scenario + "_" + km_tag(distance) + "_" + model + ".bin") : fs::path(checkpoint);
      const fs::path log = log_path.empty() ? fs::path(ckpt).replace_extension(".csv") : fs::path(log_path);
      double val = 0.0;
      check(ponlab_train(cfg.get(), distance, model.c_str(), ckpt.string().c_str(), log.string().c_str(), &val),
            "train");
      std::printf("best validation MSE %.6g\ncheckpoint -> %s\nlog -> %s\n", val, ckpt.string().c_str(),
                  log.string().c_str());
    } else if (*evaluate) {
      std::string ckpt = checkpoint;
      if (ckpt.empty() && (model == "dnn" || model == "fc-scinet"))
        ckpt = (out / "models" / (scenario + "_" + km_tag(distance) + "_" + model + ".bin")).string();
      ponlab_ber ber{};
      check(ponlab_evaluate(cfg.get(), distance, model.c_str(), ckpt.empty() ? nullptr : ckpt.c_str(), &ber),
            "evaluate");
      print_ber((model + " @ " + km_tag(distance)).c_str(), ber);
    } else if (*sweep) {
      ponlab_results* r = nullptr;
      check(ponlab_run_sweep(cfg.get(), &r), "sweep");
      print_points(r, false);
      std::printf("csv -> %s\nplot -> %s\n", ponlab_results_path(r, "csv"), ponlab_results_path(r, "plot"));
      ponlab_results_destroy(r);
    } else if (*hypermap) {
      ponlab_results* r = nullptr;
      check(ponlab_run_hypermap(cfg.get(), &r), "hypermap");
      print_points(r, true);
      const auto best = ponlab_results_argmin(r);
      if (best >= 0) {
        ponlab_point p{};
        check(ponlab_results_get(r, static_cast<std::size_t>(best), &p), "results");
        std::printf("argmin: p=%u L=%d ber=%.6e\n", p.window, p.levels, p.ber.ber);
      } else {
        std::printf("argmin: none (no successful cell)\n");
      }
      std::printf("csv -> %s\nplot -> %s\n", ponlab_results_path(r, "csv"), ponlab_results_path(r, "plot"));
      ponlab_results_destroy(r);
    } else if (*complexity) {
      if (sweeps.empty())
        for (const char* sc : {"CD", "Realistic"})
          if (fs::exists(out / (std::string("sweep_") + sc + ".csv")))
            sweeps.push_back((out / (std::string("sweep_") + sc + ".csv")).string());
      std::vector<const char*> paths;
      for (const auto& s : sweeps) paths.push_back(s.c_str());
      char* json = nullptr;
      char* table = nullptr;
      check(ponlab_complexity_report(cfg.get(), paths.data(), paths.size(), &json, &table), "complexity");
      const std::string j = take(json), t = take(table);
      write_file(out / "complexity.json", j + "\n");
      write_file(out / "complexity.txt", t);
      std::cout << t << "report -> " << (out / "complexity.json").string() << '\n';
    }
  } catch (const CliError& e) {
    return e.status;
  } catch (const std::exception& e) {
    std::cerr << "ponlab: " << e.what() << '\n';
    return PONLAB_ERR_INTERNAL;
  }
  return 0;
}
