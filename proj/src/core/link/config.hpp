#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace ponlab::link {

enum class Scenario { kCd, kRealistic };

Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario scenario);

struct LinkConfig {
  double symbol_rate_baud = 50e9;  // 100 Gb/s PAM-4
  int sim_sps = 16;
  double wavelength_m = 1550e-9;
  double lop_dbm = 10.0;
  double opl_db = 28.7;
  double distance_km = 0.0;
  Scenario scenario = Scenario::kCd;
  // Master switch for every stochastic impairment (laser, driver, APD, amplifiers).
  bool noise_enabled = true;

  double sample_rate_hz() const { return symbol_rate_baud * sim_sps; }
  void validate() const;
};

struct FiberParams {
  double loss_db_per_km = 0.2;
  double cd_ps_nm_km = 16.0;
  // Printed as "8 ps/nm/km"; interpreted as ps/nm^2/km. Typical SSMF is 0.08.
  double cd_slope_ps_nm2_km = 8.0;
  double n2_m2_per_w = 2.6e-20;
  double effective_area_um2 = 80.0;
  double step_km = 0.5;

  void validate() const;
};

struct TransmitterParams {
  double laser_linewidth_hz = 1e6;
  double rin_db_per_hz = -130.0;
  bool rin_enabled = true;
  double eam_bandwidth_ghz = 55.0;
  double eam_alpha_chirp = 0.7;
  double eam_extinction_db = 10.0;
  // Curvature of the saturating transmittance; 0 gives a linear drive-to-power map.
  double eam_saturation = 1.0;
  double drive_noise_a_per_rthz = 2e-12;
  // Peak-to-peak driver current the normalized drive level maps onto.
  double drive_full_scale_a = 0.02;
  double bessel_cutoff_ghz = 37.5;

  void validate() const;
};

struct ReceiverParams {
  double apd_responsivity_a_per_w = 0.9;
  double apd_gain = 8.0;
  double ionization_k = 0.4;
  double thermal_noise_a_per_rthz = 1e-12;
  bool shot_noise_enabled = true;
  double tia_ohms = 100.0;
  double postamp_gain_db = 10.0;
  double postamp_noise_a_per_rthz = 2e-12;
  double bandwidth_ghz = 55.0;
  double bessel_cutoff_ghz = 37.5;

  void validate() const;
};

struct JitterParams {
  bool enabled = true;  // only honoured in the Realistic scenario
  double rms_ui = 0.1;
  // Shifts are clipped to +-shape_std UI.
  double shape_std = 0.5;
  bool skip_boundary_transitions = true;

  void validate() const;
};

struct PhysicalConfig {
  LinkConfig link;
  FiberParams fiber;
  TransmitterParams tx;
  ReceiverParams rx;
  JitterParams jitter;

  void validate() const;
};

// Scenario rules: CD-only disables Kerr, chirp and jitter.
TransmitterParams effective_transmitter(const TransmitterParams& tx, Scenario scenario);
double effective_gamma_per_w_m(const FiberParams& fiber, const LinkConfig& link);
bool jitter_active(const JitterParams& jitter, Scenario scenario);

nlohmann::json to_json(const PhysicalConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
PhysicalConfig physical_config_from_json(const nlohmann::json& j);

std::uint64_t config_hash(const nlohmann::json& j);
std::string hash_hex(std::uint64_t hash);

}  // namespace ponlab::link
