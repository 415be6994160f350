#include "link/signal.hpp"

#include <complex>
#include <numeric>

namespace ponlab::link {

double OpticalField::mean_power_w() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

double OpticalField::energy_j() const {
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / sample_rate_hz;
}

std::vector<double> symbol_amplitudes(std::span<const Symbol> symbols) {
  std::vector<double> out(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) out[i] = symbol_amplitude(symbols[i]);
  return out;
}

}  // namespace ponlab::link
