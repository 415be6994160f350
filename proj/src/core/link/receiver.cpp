#include "link/receiver.hpp"

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "link/bessel.hpp"

namespace ponlab::link {
namespace {

constexpr double kElectronCharge = 1.602176634e-19;

}  // namespace

double excess_noise_factor(double gain, double ionization_k) {
  require(gain >= 1.0, ErrorCode::kInvalidArgument, "APD gain must be >= 1");
  return ionization_k * gain + (1.0 - ionization_k) * (2.0 - 1.0 / gain);
}

double excess_path_loss_db(const LinkConfig& cfg, const FiberParams& fiber) {
  const double fiber_loss = fiber.loss_db_per_km * cfg.distance_km;
  require(cfg.opl_db + 1e-12 >= fiber_loss, ErrorCode::kInvalidArgument,
          "optical path loss budget is smaller than the fiber loss");
  return std::max(0.0, cfg.opl_db - fiber_loss);
}

OpticalField attenuate(const OpticalField& field, double loss_db) {
  OpticalField out = field;
  const double a = std::pow(10.0, -loss_db / 20.0);
  for (auto& s : out.samples) s *= a;
  return out;
}

ElectricalWaveform detect(const OpticalField& field, const ReceiverParams& rx, const LinkConfig& cfg,
                          std::uint64_t seed) {
  rx.validate();
  const double fs = field.sample_rate_hz;
  check_cutoff_below_nyquist(rx.bandwidth_ghz * 1e9, fs, "APD");
  check_cutoff_below_nyquist(rx.bessel_cutoff_ghz * 1e9, fs, "receiver electrical filter");
  const double nyquist = 0.5 * fs;
  const bool noisy = cfg.noise_enabled;
  Rng shot_rng = make_rng(seed, "rx-shot");
  Rng thermal_rng = make_rng(seed, "rx-thermal");
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double r = rx.apd_responsivity_a_per_w;
  const double m = rx.apd_gain;
  const double f_m = excess_noise_factor(m, rx.ionization_k);
  std::vector<double> current(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double p = std::norm(field.samples[i]);
    double amps = r * m * p;
    if (noisy && rx.shot_noise_enabled) {
      const double psd = 2.0 * kElectronCharge * r * p * m * m * f_m;
      amps += std::sqrt(psd * nyquist) * gauss(shot_rng);
    }
    current[i] = amps;
  }
  const double apd_cutoff[] = {rx.bandwidth_ghz * 1e9};
  apply_bessel_filters(current, fs, apd_cutoff);

  if (noisy) {
    const double psd = rx.thermal_noise_a_per_rthz * rx.thermal_noise_a_per_rthz +
                       rx.postamp_noise_a_per_rthz * rx.postamp_noise_a_per_rthz;
    const double sigma = std::sqrt(psd * nyquist);
    if (sigma > 0.0)
      for (double& c : current) c += sigma * gauss(thermal_rng);
  }

  ElectricalWaveform out;
  out.sample_rate_hz = fs;
  out.samples = std::move(current);
  const double volts_per_amp = rx.tia_ohms * std::pow(10.0, rx.postamp_gain_db / 20.0);
  for (double& v : out.samples) v *= volts_per_amp;
  const double rx_cutoff[] = {rx.bessel_cutoff_ghz * 1e9};
  apply_bessel_filters(out.samples, fs, rx_cutoff);
  return out;
}

}  // namespace ponlab::link
