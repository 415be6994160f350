#include "link/pipeline.hpp"

#include <cmath>
#include <fstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "link/fiber.hpp"
#include "link/jitter.hpp"
#include "link/receiver.hpp"
#include "link/sync.hpp"
#include "link/transmitter.hpp"

namespace ponlab::link {

CaptureSeeds capture_seeds(std::uint64_t master_seed, std::uint64_t capture, double distance_km) {
  const auto metres = static_cast<std::uint64_t>(std::llround(distance_km * 1000.0));
  return {derive_seed(master_seed, "symbols", {capture}), derive_seed(master_seed, "transmitter", {capture}),
          derive_seed(master_seed, "jitter", {capture}), derive_seed(master_seed, "receiver", {capture, metres})};
}

OpticalField simulate_received_field(const PhysicalConfig& config, std::span<const Symbol> symbols,
                                     const CaptureSeeds& seeds, std::size_t* jitter_clipped) {
  config.validate();
  OpticalField field = shape_and_modulate(symbols, config.tx, config.link, seeds.transmitter);
  if (jitter_active(config.jitter, config.link.scenario)) {
    const TransmitterParams tx = effective_transmitter(config.tx, config.link.scenario);
    JitterResult j = apply_timing_jitter(field, config.jitter, config.link.sim_sps,
                                         transmitter_group_delay_samples(tx, config.link), seeds.jitter);
    if (jitter_clipped) *jitter_clipped = j.clipped;
    field = std::move(j.field);
  }
  field = fiber_propagate(field, config.fiber, config.link);
  return attenuate(field, excess_path_loss_db(config.link, config.fiber));
}

CaptureResult simulate_capture(const PhysicalConfig& config, std::size_t n_symbols, std::uint64_t master_seed,
                               std::uint64_t capture) {
  const CaptureSeeds seeds = capture_seeds(master_seed, capture, config.link.distance_km);
  const std::vector<Symbol> symbols = generate_rns_pam4(n_symbols, seeds.symbols);
  CaptureResult result;
  const OpticalField field = simulate_received_field(config, symbols, seeds, &result.jitter_clipped);
  const ElectricalWaveform wave = detect(field, config.rx, config.link, seeds.receiver);
  result.frame = synchronize_downsample(wave, symbols, config.link);
  return result;
}

void write_waveform_dump(const std::filesystem::path& path, const OpticalField& field, std::uint64_t seed,
                         const std::string& config_hash) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path.string());
  for (const auto& s : field.samples) {
    io::write_le(os, static_cast<float>(s.real()));
    io::write_le(os, static_cast<float>(s.imag()));
  }
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed: " + path.string());
  const nlohmann::json sidecar = {{"format", "ponlab-waveform"},
                                  {"sample_rate_hz", field.sample_rate_hz},
                                  {"length", field.size()},
                                  {"dtype", "float32"},
                                  {"layout", "iq-interleaved"},
                                  {"byte_order", "little"},
                                  {"seed", seed},
                                  {"config_hash", config_hash}};
  io::write_text_file(path.string() + ".json", sidecar.dump(2) + "\n");
}

OpticalField read_waveform_dump(const std::filesystem::path& path) {
  const auto sidecar = nlohmann::json::parse(io::read_text_file(path.string() + ".json"));
  OpticalField field;
  field.sample_rate_hz = sidecar.at("sample_rate_hz").get<double>();
  const auto n = sidecar.at("length").get<std::size_t>();
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path.string());
  field.samples.resize(n);
  for (auto& s : field.samples) {
    const float re = io::read_le<float>(is);
    const float im = io::read_le<float>(is);
    s = {re, im};
  }
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated waveform dump " + path.string());
  return field;
}

void write_symbol_frame(const std::filesystem::path& path, const SymbolFrame& frame, const nlohmann::json& header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nlohmann::json h = header;
  h["format"] = "ponlab-symbol-frame";
  h["n_symbols"] = frame.size();
  h["lag_samples"] = frame.lag_samples;
  h["phase_offset"] = frame.phase_offset;
  h["soft_dtype"] = "float32";
  h["byte_order"] = "little";
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path.string());
  os << h.dump() << '\n';
  for (double v : frame.soft) io::write_le(os, static_cast<float>(v));
  os.write(reinterpret_cast<const char*>(frame.symbols.data()), static_cast<std::streamsize>(frame.symbols.size()));
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed: " + path.string());
}

SymbolFrame read_symbol_frame(const std::filesystem::path& path, nlohmann::json* header) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  const auto h = nlohmann::json::parse(line);
  require(h.value("format", "") == "ponlab-symbol-frame", ErrorCode::kIo, "not a symbol frame: " + path.string());
  SymbolFrame frame;
  const auto n = h.at("n_symbols").get<std::size_t>();
  frame.lag_samples = h.at("lag_samples").get<std::ptrdiff_t>();
  frame.phase_offset = h.at("phase_offset").get<int>();
  frame.soft.resize(n);
  for (double& v : frame.soft) v = io::read_le<float>(is);
  frame.symbols.resize(n);
  is.read(reinterpret_cast<char*>(frame.symbols.data()), static_cast<std::streamsize>(n));
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated symbol frame " + path.string());
  if (header) *header = h;
  return frame;
}

}  // namespace ponlab::link
