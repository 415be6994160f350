#include "link/sync.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "common/error.hpp"
#include "link/fft.hpp"

namespace ponlab::link {
namespace {

constexpr std::size_t kGuardSymbols = 32;
constexpr double kPeakMargin = 1.25;

double variance_of_level_means(const std::vector<double>& wave, std::span<const Symbol> symbols, std::size_t sps,
                               std::ptrdiff_t start) {
  std::array<double, 4> sum{};
  std::array<std::size_t, 4> count{};
  const auto n = static_cast<std::ptrdiff_t>(wave.size());
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    std::ptrdiff_t idx = (start + static_cast<std::ptrdiff_t>(k * sps)) % n;
    if (idx < 0) idx += n;
    sum[symbols[k] & 3u] += wave[static_cast<std::size_t>(idx)];
    ++count[symbols[k] & 3u];
  }
  std::array<double, 4> means{};
  double grand = 0.0;
  int levels = 0;
  for (int l = 0; l < 4; ++l) {
    if (count[l] == 0) continue;
    means[l] = sum[l] / static_cast<double>(count[l]);
    grand += means[l];
    ++levels;
  }
  if (levels < 2) return 0.0;
  grand /= levels;
  double var = 0.0;
  for (int l = 0; l < 4; ++l)
    if (count[l]) var += (means[l] - grand) * (means[l] - grand);
  return var / levels;
}

}  // namespace

SymbolFrame synchronize_downsample(const ElectricalWaveform& wave, std::span<const Symbol> tx_symbols,
                                   const LinkConfig& cfg) {
  const auto sps = static_cast<std::size_t>(cfg.sim_sps);
  require(!tx_symbols.empty() && wave.samples.size() == tx_symbols.size() * sps, ErrorCode::kInvalidArgument,
          "waveform length must equal n_symbols * sim_sps");
  const std::size_t n = wave.samples.size();

  double rx_mean = 0.0;
  for (double v : wave.samples) rx_mean += v;
  rx_mean /= static_cast<double>(n);
  double ideal_mean = 0.0;
  for (Symbol s : tx_symbols) ideal_mean += symbol_amplitude(s);
  ideal_mean /= static_cast<double>(tx_symbols.size());

  std::vector<Complex> rx(n);
  std::vector<Complex> ideal(n);
  double rx_norm = 0.0;
  double ideal_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rx[i] = wave.samples[i] - rx_mean;
    ideal[i] = symbol_amplitude(tx_symbols[i / sps]) - ideal_mean;
    rx_norm += std::norm(rx[i]);
    ideal_norm += std::norm(ideal[i]);
  }
  require(rx_norm > 0.0 && ideal_norm > 0.0, ErrorCode::kAmbiguous,
          "synchronization impossible: waveform or symbol sequence has no variation");

  // c[lag] = sum_n rx[n] * ideal[n - lag]
  fft_forward(rx);
  fft_forward(ideal);
  for (std::size_t k = 0; k < n; ++k) rx[k] *= std::conj(ideal[k]);
  fft_inverse(rx);

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (rx[i].real() > rx[best].real()) best = i;
  const double peak = rx[best].real() / std::sqrt(rx_norm * ideal_norm);
  // Filtering and dispersion spread the peak over several symbols; only a
  // comparable peak well away from it makes the lag ambiguous.
  const std::size_t guard = std::min(kGuardSymbols * sps, n / 4);
  double runner_up = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t dist = std::min((i + n - best) % n, (best + n - i) % n);
    if (dist > guard) runner_up = std::max(runner_up, rx[i].real() / std::sqrt(rx_norm * ideal_norm));
  }
  require(peak > 0.05 && peak > kPeakMargin * runner_up, ErrorCode::kAmbiguous,
          "correlation peak is ambiguous (peak " + std::to_string(peak) + ", runner-up " +
              std::to_string(runner_up) + ")");

  SymbolFrame frame;
  frame.lag_samples = static_cast<std::ptrdiff_t>(best);
  if (best > n / 2) frame.lag_samples -= static_cast<std::ptrdiff_t>(n);

  // Search phases around the symbol centre; ties go to the smallest |offset|.
  const auto half = static_cast<int>(sps / 2);
  const std::ptrdiff_t centre = frame.lag_samples + half;
  double best_score = -1.0;
  for (int d : [&] {
         std::vector<int> order{0};
         for (int a = 1; a <= half; ++a) {
           order.push_back(-a);
           if (a < half) order.push_back(a);
         }
         return order;
       }()) {
    const double score = variance_of_level_means(wave.samples, tx_symbols, sps, centre + d);
    if (score > best_score * (1.0 + 1e-12)) {
      best_score = score;
      frame.phase_offset = d;
    }
  }

  frame.symbols.assign(tx_symbols.begin(), tx_symbols.end());
  frame.soft.resize(tx_symbols.size());
  const auto len = static_cast<std::ptrdiff_t>(n);
  for (std::size_t k = 0; k < tx_symbols.size(); ++k) {
    std::ptrdiff_t idx = (centre + frame.phase_offset + static_cast<std::ptrdiff_t>(k * sps)) % len;
    if (idx < 0) idx += len;
    frame.soft[k] = wave.samples[static_cast<std::size_t>(idx)];
  }
  return frame;
}

}  // namespace ponlab::link
