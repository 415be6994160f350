#pragma once

#include <cstdint>
#include <filesystem>

#include "link/config.hpp"
#include "link/signal.hpp"

namespace ponlab::link {

struct CaptureSeeds {
  std::uint64_t symbols = 0;
  std::uint64_t transmitter = 0;
  std::uint64_t jitter = 0;
  std::uint64_t receiver = 0;
};

// Symbols and transmitter-side noise depend only on (master, capture), so every
// distance of a sweep sees the same transmitted waveform. Receiver noise is
// additionally keyed by the distance.
CaptureSeeds capture_seeds(std::uint64_t master_seed, std::uint64_t capture, double distance_km);

struct CaptureResult {
  SymbolFrame frame;
  std::size_t jitter_clipped = 0;
};

/// symbols -> transmitter -> jitter (Realistic) -> fiber -> excess-loss
/// attenuator -> receiver -> synchronization and 1-SpS downsampling.
CaptureResult simulate_capture(const PhysicalConfig& config, std::size_t n_symbols, std::uint64_t master_seed,
                               std::uint64_t capture);

// Everything up to the photodetector input; used by waveform dumps.
OpticalField simulate_received_field(const PhysicalConfig& config, std::span<const Symbol> symbols,
                                     const CaptureSeeds& seeds, std::size_t* jitter_clipped = nullptr);

// Raw little-endian float32 I/Q pairs plus `<path>.json`.
void write_waveform_dump(const std::filesystem::path& path, const OpticalField& field, std::uint64_t seed,
                         const std::string& config_hash);
OpticalField read_waveform_dump(const std::filesystem::path& path);

// One JSON header line, then float32 soft samples, then one byte per symbol.
void write_symbol_frame(const std::filesystem::path& path, const SymbolFrame& frame, const nlohmann::json& header);
SymbolFrame read_symbol_frame(const std::filesystem::path& path, nlohmann::json* header = nullptr);

}  // namespace ponlab::link
