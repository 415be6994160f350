#include "link/transmitter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "link/bessel.hpp"

namespace ponlab::link {

std::vector<Symbol> generate_rns_pam4(std::size_t n_symbols, std::uint64_t seed) {
  require(n_symbols > 0, ErrorCode::kInvalidArgument, "n_symbols must be positive");
  Rng rng(seed);
  std::vector<Symbol> out(n_symbols);
  // Two raw bits per symbol straight from the generator keeps the sequence
  // independent of the library's distribution implementations.
  std::uint64_t word = 0;
  int left = 0;
  for (auto& s : out) {
    if (left == 0) {
      word = rng();
      left = 32;
    }
    s = static_cast<Symbol>(word & 3u);
    word >>= 2;
    --left;
  }
  return out;
}

double eam_power_transmittance(double drive, const TransmitterParams& tx) {
  const double t_min = std::pow(10.0, -tx.eam_extinction_db / 10.0);
  double shaped = drive;
  if (tx.eam_saturation > 0.0) {
    const double s = tx.eam_saturation;
    shaped = 0.5 + std::tanh(s * (drive - 0.5)) / (2.0 * std::tanh(0.5 * s));
  }
  return std::max(t_min + (1.0 - t_min) * shaped, 1e-6);
}

double transmitter_group_delay_samples(const TransmitterParams& tx, const LinkConfig& cfg) {
  // The Bessel prototype has unit DC delay at 1 rad/s.
  const double w3 = bessel4_prototype_3db_frequency();
  const double delay_s = w3 / (2.0 * std::numbers::pi * tx.bessel_cutoff_ghz * 1e9) +
                         w3 / (2.0 * std::numbers::pi * tx.eam_bandwidth_ghz * 1e9);
  return delay_s * cfg.sample_rate_hz();
}

OpticalField shape_and_modulate(std::span<const Symbol> symbols, const TransmitterParams& tx_in,
                                const LinkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  tx_in.validate();
  const TransmitterParams tx = effective_transmitter(tx_in, cfg.scenario);
  const double fs = cfg.sample_rate_hz();
  check_cutoff_below_nyquist(tx.bessel_cutoff_ghz * 1e9, fs, "transmitter electrical filter");
  check_cutoff_below_nyquist(tx.eam_bandwidth_ghz * 1e9, fs, "EAM");
  const std::size_t sps = static_cast<std::size_t>(cfg.sim_sps);
  const std::size_t n = symbols.size() * sps;

  Rng drive_rng = make_rng(seed, "tx-driver");
  Rng rin_rng = make_rng(seed, "tx-rin");
  Rng phase_rng = make_rng(seed, "tx-phase");
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> drive(n);
  for (std::size_t k = 0; k < symbols.size(); ++k)
    std::fill_n(drive.begin() + static_cast<std::ptrdiff_t>(k * sps), sps, static_cast<double>(symbols[k] & 3u) / 3.0);

  // One-sided white PSD integrated up to Nyquist gives the per-sample variance.
  const double nyquist = 0.5 * fs;
  if (cfg.noise_enabled && tx.drive_noise_a_per_rthz > 0.0) {
    const double sigma = tx.drive_noise_a_per_rthz * std::sqrt(nyquist) / tx.drive_full_scale_a;
    for (double& d : drive) d += sigma * gauss(drive_rng);
  }
  const double cutoffs[] = {tx.bessel_cutoff_ghz * 1e9, tx.eam_bandwidth_ghz * 1e9};
  apply_bessel_filters(drive, fs, cutoffs);

  const bool rin = cfg.noise_enabled && tx.rin_enabled;
  const double rin_sigma = std::sqrt(std::pow(10.0, tx.rin_db_per_hz / 10.0) * nyquist);
  const bool phase_noise = cfg.noise_enabled && tx.laser_linewidth_hz > 0.0;
  const double phase_sigma = std::sqrt(2.0 * std::numbers::pi * tx.laser_linewidth_hz / fs);

  OpticalField field;
  field.sample_rate_hz = fs;
  field.samples.resize(n);
  double laser_phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double power = eam_power_transmittance(drive[i], tx);
    const double chirp_phase = 0.5 * tx.eam_alpha_chirp * std::log(power);
    double laser_power = 1.0;
    if (rin) laser_power = std::max(0.0, 1.0 + rin_sigma * gauss(rin_rng));
    if (phase_noise) laser_phase += phase_sigma * gauss(phase_rng);
    field.samples[i] = std::polar(std::sqrt(power * laser_power), chirp_phase + laser_phase);
  }

  const double target_w = 1e-3 * std::pow(10.0, cfg.lop_dbm / 10.0);
  const double gain = std::sqrt(target_w / field.mean_power_w());
  for (auto& s : field.samples) s *= gain;
  return field;
}

}  // namespace ponlab::link
