#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace ponlab::link {

using Symbol = std::uint8_t;  // PAM-4 level index 0..3 (lowest to highest intensity)

inline constexpr std::array<double, 4> kPam4Amplitudes{-3.0, -1.0, 1.0, 3.0};
// Gray code per level index: 00, 01, 11, 10.
inline constexpr std::array<std::uint8_t, 4> kGrayBits{0b00, 0b01, 0b11, 0b10};

inline double symbol_amplitude(Symbol s) { return kPam4Amplitudes[s & 3u]; }

/// Complex baseband envelope in sqrt(W), uniformly sampled.
struct OpticalField {
  std::vector<std::complex<double>> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  double mean_power_w() const;
  double energy_j() const;
};

/// Real electrical waveform in volts at the receiver output.
struct ElectricalWaveform {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
};

enum class SplitLabel : std::uint8_t { kTrain = 0, kValidation = 1, kTest = 2 };

/// Symbol-rate view of one capture: transmitted symbols and the aligned
/// received soft samples.
struct SymbolFrame {
  std::vector<Symbol> symbols;
  std::vector<double> soft;
  std::vector<SplitLabel> split;  // empty until a dataset split is assigned
  std::ptrdiff_t lag_samples = 0;
  int phase_offset = 0;

  std::size_t size() const noexcept { return symbols.size(); }
};

std::vector<double> symbol_amplitudes(std::span<const Symbol> symbols);

}  // namespace ponlab::link
