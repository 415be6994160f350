#include "link/bessel.hpp"

#include <cmath>

#include "common/error.hpp"
#include "link/fft.hpp"

namespace ponlab::link {
namespace {

std::complex<double> prototype(std::complex<double> s) {
  const std::complex<double> s2 = s * s;
  return 105.0 / (s2 * s2 + 10.0 * s2 * s + 45.0 * s2 + 105.0 * s + 105.0);
}

double compute_3db_frequency() {
  double lo = 0.5;
  double hi = 5.0;
  const double target = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::abs(prototype({0.0, mid})) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double bessel4_prototype_3db_frequency() {
  static const double w3db = compute_3db_frequency();
  return w3db;
}

std::complex<double> bessel4_response(double frequency_hz, double cutoff_hz) {
  require(cutoff_hz > 0.0, ErrorCode::kInvalidArgument, "Bessel cutoff must be positive");
  return prototype({0.0, bessel4_prototype_3db_frequency() * frequency_hz / cutoff_hz});
}

void check_cutoff_below_nyquist(double cutoff_hz, double sample_rate_hz, const char* what) {
  require(cutoff_hz > 0.0, ErrorCode::kInvalidArgument, std::string(what) + " bandwidth must be positive");
  require(cutoff_hz < 0.5 * sample_rate_hz, ErrorCode::kInvalidArgument,
          std::string(what) + " cutoff " + std::to_string(cutoff_hz * 1e-9) +
              " GHz is above the simulation Nyquist frequency " + std::to_string(0.5e-9 * sample_rate_hz) +
              " GHz; raise sim_sps");
}

void apply_bessel_filters(std::vector<double>& waveform, double sample_rate_hz, std::span<const double> cutoffs_hz) {
  if (cutoffs_hz.empty() || waveform.empty()) return;
  std::vector<Complex> spectrum(waveform.begin(), waveform.end());
  fft_forward(spectrum);
  const std::size_t n = spectrum.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double f = bin_angular_frequency(k, n, sample_rate_hz) / (2.0 * M_PI);
    Complex h = 1.0;
    for (double fc : cutoffs_hz) h *= bessel4_response(f, fc);
    spectrum[k] *= h;
  }
  fft_inverse(spectrum);
  for (std::size_t i = 0; i < n; ++i) waveform[i] = spectrum[i].real();
}

}  // namespace ponlab::link
