#include "link/fiber.hpp"

#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "link/fft.hpp"

namespace ponlab::link {
namespace {

constexpr double kSpeedOfLight = 299792458.0;

// ps/nm/km -> s/m^2 and ps/nm^2/km -> s/m^3
constexpr double kDispersionSi = 1e-12 / (1e-9 * 1e3);
constexpr double kSlopeSi = 1e-12 / (1e-18 * 1e3);

// Transfer function of the linear operator over dz for FFTW's e^{-i w t}
// forward convention (the cubic term flips sign relative to e^{+i w t}).
std::vector<Complex> linear_operator(std::size_t n, double sample_rate, const FiberParams& fiber, double wavelength,
                                     double dz_m) {
  const double b2 = beta2_s2_per_m(fiber, wavelength);
  const double b3 = beta3_s3_per_m(fiber, wavelength);
  const double amplitude = std::exp(-0.5 * loss_neper_per_m(fiber) * dz_m);
  std::vector<Complex> h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = bin_angular_frequency(k, n, sample_rate);
    const double phase = (0.5 * b2 * w * w - b3 * w * w * w / 6.0) * dz_m;
    h[k] = std::polar(amplitude, phase);
  }
  return h;
}

void apply_in_frequency(std::vector<Complex>& samples, const std::vector<Complex>& h) {
  fft_forward(samples);
  for (std::size_t k = 0; k < samples.size(); ++k) samples[k] *= h[k];
  fft_inverse(samples);
}

}  // namespace

double beta2_s2_per_m(const FiberParams& fiber, double wavelength_m) {
  const double d = fiber.cd_ps_nm_km * kDispersionSi;
  return -d * wavelength_m * wavelength_m / (2.0 * std::numbers::pi * kSpeedOfLight);
}

double beta3_s3_per_m(const FiberParams& fiber, double wavelength_m) {
  const double d = fiber.cd_ps_nm_km * kDispersionSi;
  const double s = fiber.cd_slope_ps_nm2_km * kSlopeSi;
  const double l = wavelength_m;
  const double scale = l * l / (2.0 * std::numbers::pi * kSpeedOfLight);
  return scale * scale * (s + 2.0 * d / l);
}

double loss_neper_per_m(const FiberParams& fiber) { return fiber.loss_db_per_km * std::log(10.0) / 10.0 / 1e3; }

OpticalField fiber_propagate(const OpticalField& field, const FiberParams& fiber, const LinkConfig& cfg) {
  fiber.validate();
  require(cfg.distance_km >= 0.0, ErrorCode::kInvalidArgument, "distance must be >= 0");
  OpticalField out = field;
  if (cfg.distance_km == 0.0 || field.samples.empty()) return out;

  const double length_m = cfg.distance_km * 1e3;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.distance_km / fiber.step_km - 1e-9)));
  const double dz = length_m / static_cast<double>(steps);
  const double gamma = effective_gamma_per_w_m(fiber, cfg);
  const auto half = linear_operator(field.size(), field.sample_rate_hz, fiber, cfg.wavelength_m, 0.5 * dz);

  for (std::size_t s = 0; s < steps; ++s) {
    apply_in_frequency(out.samples, half);
    if (gamma != 0.0)
      for (auto& e : out.samples) e *= std::polar(1.0, gamma * std::norm(e) * dz);
    apply_in_frequency(out.samples, half);
  }
  return out;
}

OpticalField dispersion_one_shot(const OpticalField& field, const FiberParams& fiber, const LinkConfig& cfg) {
  OpticalField out = field;
  if (cfg.distance_km == 0.0 || field.samples.empty()) return out;
  apply_in_frequency(out.samples,
                     linear_operator(field.size(), field.sample_rate_hz, fiber, cfg.wavelength_m, cfg.distance_km * 1e3));
  return out;
}

}  // namespace ponlab::link
