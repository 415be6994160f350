#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiment/config.hpp"

namespace ponlab::experiment {

struct PointResult;

// Stable column sets. Comment lines start with '#'.
inline constexpr const char* kSweepColumns = "distance_km,scenario,equalizer,ber,bits_counted,seed,status";
inline constexpr const char* kHypermapColumns = "window,levels,distance_km,scenario,ber,bits_counted,seed,status";

std::string header_comment(const std::string& kind, const std::string& config_hash, std::uint64_t master_seed);

std::string format_sweep_row(const PointResult& r);
std::string format_hypermap_row(const PointResult& r);

struct SweepRow {
  double distance_km = 0.0;
  std::string scenario;
  std::string equalizer;
  std::optional<double> ber;  // empty for failed points
  std::uint64_t bits_counted = 0;
  std::uint64_t seed = 0;
  std::string status;
};

struct HypermapRow {
  std::size_t window = 0;
  int levels = 0;
  double distance_km = 0.0;
  std::string scenario;
  std::optional<double> ber;
  std::uint64_t bits_counted = 0;
  std::uint64_t seed = 0;
  std::string status;
};

struct CsvComments {
  std::string config_hash;
  std::uint64_t master_seed = 0;
};

std::vector<SweepRow> parse_sweep_csv(const std::string& text, CsvComments* comments = nullptr);
std::vector<HypermapRow> parse_hypermap_csv(const std::string& text, CsvComments* comments = nullptr);

// Plots rendered from CSV text alone.
std::string render_sweep_svg(const std::string& csv_text);
std::string render_hypermap_svg(const std::string& csv_text);

/// Lowest-BER feasible cell; ties go to the smaller window, then fewer levels.
std::optional<std::size_t> hypermap_argmin(const std::vector<HypermapRow>& rows);

struct ReferenceRow {
  std::string equalizer;
  std::int64_t rmps = 0;
  double mber_cd = 0.0;
  double mber_realistic = 0.0;
  double prb_cd = 0.0;
  double prb_realistic = 0.0;
};

// Published RMpS / mBER / PRB values the report compares against.
const std::vector<ReferenceRow>& reference_rows();

struct ComplexityReport {
  nlohmann::json json;
  std::string table;
};

/// RMpS from the configured instantiations, mBER (median over distances) from
/// any sweep CSVs given, PRB = RMpS x mBER, plus the reference columns.
/// Missing sweeps or points leave flagged gaps.
ComplexityReport build_complexity_report(const ExperimentConfig& cfg, const std::vector<std::string>& sweep_csv_texts);

}  // namespace ponlab::experiment
