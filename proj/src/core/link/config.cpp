#include "link/config.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "common/error.hpp"
#include "common/json_reader.hpp"
#include "common/rng.hpp"

namespace ponlab::link {

using json_util::Reader;

Scenario parse_scenario(const std::string& name) {
  if (name == "CD" || name == "cd") return Scenario::kCd;
  if (name == "Realistic" || name == "realistic") return Scenario::kRealistic;
  fail(ErrorCode::kInvalidArgument, "unknown scenario '" + name + "' (expected CD|Realistic)");
}

std::string to_string(Scenario scenario) { return scenario == Scenario::kCd ? "CD" : "Realistic"; }

void LinkConfig::validate() const {
  require(symbol_rate_baud > 0.0, ErrorCode::kInvalidArgument, "symbol_rate must be positive");
  require(sim_sps >= 4 && sim_sps % 2 == 0, ErrorCode::kInvalidArgument, "sim_sps must be even and >= 4");
  require(wavelength_m > 0.0, ErrorCode::kInvalidArgument, "wavelength must be positive");
  require(distance_km >= 0.0, ErrorCode::kInvalidArgument, "distance_km must be >= 0");
  require(opl_db >= 0.0, ErrorCode::kInvalidArgument, "opl_db must be >= 0");
}

void FiberParams::validate() const {
  require(step_km > 0.0, ErrorCode::kInvalidArgument, "fiber step_km must be positive");
  require(loss_db_per_km >= 0.0 && cd_ps_nm_km >= 0.0 && cd_slope_ps_nm2_km >= 0.0 && n2_m2_per_w >= 0.0 &&
              effective_area_um2 > 0.0,
          ErrorCode::kInvalidArgument, "fiber parameters must be non-negative");
}

void TransmitterParams::validate() const {
  require(eam_bandwidth_ghz > 0.0 && bessel_cutoff_ghz > 0.0, ErrorCode::kInvalidArgument,
          "transmitter bandwidths must be positive");
  require(laser_linewidth_hz >= 0.0 && eam_extinction_db > 0.0 && drive_full_scale_a > 0.0 &&
              drive_noise_a_per_rthz >= 0.0 && eam_saturation >= 0.0,
          ErrorCode::kInvalidArgument, "invalid transmitter parameters");
}

void ReceiverParams::validate() const {
  require(ionization_k >= 0.0 && ionization_k <= 1.0, ErrorCode::kInvalidArgument, "ionization_k must be in [0,1]");
  require(apd_gain >= 1.0, ErrorCode::kInvalidArgument, "apd_gain must be >= 1");
  require(bandwidth_ghz > 0.0 && bessel_cutoff_ghz > 0.0, ErrorCode::kInvalidArgument,
          "receiver bandwidths must be positive");
  require(apd_responsivity_a_per_w > 0.0 && tia_ohms > 0.0 && thermal_noise_a_per_rthz >= 0.0 &&
              postamp_noise_a_per_rthz >= 0.0,
          ErrorCode::kInvalidArgument, "invalid receiver parameters");
}

void JitterParams::validate() const {
  require(rms_ui >= 0.0, ErrorCode::kInvalidArgument, "jitter rms_ui must be >= 0");
  require(shape_std > 0.0 && shape_std <= 0.5, ErrorCode::kInvalidArgument, "jitter shape_std must be in (0, 0.5]");
}

void PhysicalConfig::validate() const {
  link.validate();
  fiber.validate();
  tx.validate();
  rx.validate();
  jitter.validate();
  require(link.opl_db + 1e-12 >= fiber.loss_db_per_km * link.distance_km, ErrorCode::kInvalidArgument,
          "opl_db is smaller than the fiber loss at this distance");
}

TransmitterParams effective_transmitter(const TransmitterParams& tx, Scenario scenario) {
  TransmitterParams out = tx;
  if (scenario == Scenario::kCd) out.eam_alpha_chirp = 0.0;
  return out;
}

double effective_gamma_per_w_m(const FiberParams& fiber, const LinkConfig& link) {
  if (link.scenario == Scenario::kCd) return 0.0;
  return 2.0 * std::numbers::pi * fiber.n2_m2_per_w / (link.wavelength_m * fiber.effective_area_um2 * 1e-12);
}

bool jitter_active(const JitterParams& jitter, Scenario scenario) {
  return jitter.enabled && scenario == Scenario::kRealistic;
}

nlohmann::json to_json(const PhysicalConfig& c) {
  return {
      {"link",
       {{"symbol_rate_baud", c.link.symbol_rate_baud},
        {"sim_sps", c.link.sim_sps},
        {"wavelength_m", c.link.wavelength_m},
        {"lop_dbm", c.link.lop_dbm},
        {"opl_db", c.link.opl_db},
        {"distance_km", c.link.distance_km},
        {"scenario", to_string(c.link.scenario)},
        {"noise_enabled", c.link.noise_enabled}}},
      {"fiber",
       {{"loss_db_per_km", c.fiber.loss_db_per_km},
        {"cd_ps_nm_km", c.fiber.cd_ps_nm_km},
        {"cd_slope_ps_nm2_km", c.fiber.cd_slope_ps_nm2_km},
        {"n2_m2_per_w", c.fiber.n2_m2_per_w},
        {"effective_area_um2", c.fiber.effective_area_um2},
        {"step_km", c.fiber.step_km}}},
      {"transmitter",
       {{"laser_linewidth_hz", c.tx.laser_linewidth_hz},
        {"rin_db_per_hz", c.tx.rin_db_per_hz},
        {"rin_enabled", c.tx.rin_enabled},
        {"eam_bandwidth_ghz", c.tx.eam_bandwidth_ghz},
        {"eam_alpha_chirp", c.tx.eam_alpha_chirp},
        {"eam_extinction_db", c.tx.eam_extinction_db},
        {"eam_saturation", c.tx.eam_saturation},
        {"drive_noise_a_per_rthz", c.tx.drive_noise_a_per_rthz},
        {"drive_full_scale_a", c.tx.drive_full_scale_a},
        {"bessel_cutoff_ghz", c.tx.bessel_cutoff_ghz}}},
      {"receiver",
       {{"apd_responsivity_a_per_w", c.rx.apd_responsivity_a_per_w},
        {"apd_gain", c.rx.apd_gain},
        {"ionization_k", c.rx.ionization_k},
        {"thermal_noise_a_per_rthz", c.rx.thermal_noise_a_per_rthz},
        {"shot_noise_enabled", c.rx.shot_noise_enabled},
        {"tia_ohms", c.rx.tia_ohms},
        {"postamp_gain_db", c.rx.postamp_gain_db},
        {"postamp_noise_a_per_rthz", c.rx.postamp_noise_a_per_rthz},
        {"bandwidth_ghz", c.rx.bandwidth_ghz},
        {"bessel_cutoff_ghz", c.rx.bessel_cutoff_ghz}}},
      {"jitter",
       {{"enabled", c.jitter.enabled},
        {"rms_ui", c.jitter.rms_ui},
        {"shape_std", c.jitter.shape_std},
        {"skip_boundary_transitions", c.jitter.skip_boundary_transitions}}},
  };
}

PhysicalConfig physical_config_from_json(const nlohmann::json& j) {
  PhysicalConfig c;
  Reader top(j, "physical");
  nlohmann::json empty = nlohmann::json::object();
  auto section = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    return it == j.end() ? empty : *it;
  };
  nlohmann::json dummy;
  top.field("link", dummy).field("fiber", dummy).field("transmitter", dummy).field("receiver", dummy).field("jitter", dummy);
  top.finish();

  std::string scenario = to_string(c.link.scenario);
  Reader(section("link"), "link")
      .field("symbol_rate_baud", c.link.symbol_rate_baud)
      .field("sim_sps", c.link.sim_sps)
      .field("wavelength_m", c.link.wavelength_m)
      .field("lop_dbm", c.link.lop_dbm)
      .field("opl_db", c.link.opl_db)
      .field("distance_km", c.link.distance_km)
      .field("scenario", scenario)
      .field("noise_enabled", c.link.noise_enabled)
      .finish();
  c.link.scenario = parse_scenario(scenario);
  Reader(section("fiber"), "fiber")
      .field("loss_db_per_km", c.fiber.loss_db_per_km)
      .field("cd_ps_nm_km", c.fiber.cd_ps_nm_km)
      .field("cd_slope_ps_nm2_km", c.fiber.cd_slope_ps_nm2_km)
      .field("n2_m2_per_w", c.fiber.n2_m2_per_w)
      .field("effective_area_um2", c.fiber.effective_area_um2)
      .field("step_km", c.fiber.step_km)
      .finish();
  Reader(section("transmitter"), "transmitter")
      .field("laser_linewidth_hz", c.tx.laser_linewidth_hz)
      .field("rin_db_per_hz", c.tx.rin_db_per_hz)
      .field("rin_enabled", c.tx.rin_enabled)
      .field("eam_bandwidth_ghz", c.tx.eam_bandwidth_ghz)
      .field("eam_alpha_chirp", c.tx.eam_alpha_chirp)
      .field("eam_extinction_db", c.tx.eam_extinction_db)
      .field("eam_saturation", c.tx.eam_saturation)
      .field("drive_noise_a_per_rthz", c.tx.drive_noise_a_per_rthz)
      .field("drive_full_scale_a", c.tx.drive_full_scale_a)
      .field("bessel_cutoff_ghz", c.tx.bessel_cutoff_ghz)
      .finish();
  Reader(section("receiver"), "receiver")
      .field("apd_responsivity_a_per_w", c.rx.apd_responsivity_a_per_w)
      .field("apd_gain", c.rx.apd_gain)
      .field("ionization_k", c.rx.ionization_k)
      .field("thermal_noise_a_per_rthz", c.rx.thermal_noise_a_per_rthz)
      .field("shot_noise_enabled", c.rx.shot_noise_enabled)
      .field("tia_ohms", c.rx.tia_ohms)
      .field("postamp_gain_db", c.rx.postamp_gain_db)
      .field("postamp_noise_a_per_rthz", c.rx.postamp_noise_a_per_rthz)
      .field("bandwidth_ghz", c.rx.bandwidth_ghz)
      .field("bessel_cutoff_ghz", c.rx.bessel_cutoff_ghz)
      .finish();
  Reader(section("jitter"), "jitter")
      .field("enabled", c.jitter.enabled)
      .field("rms_ui", c.jitter.rms_ui)
      .field("shape_std", c.jitter.shape_std)
      .field("skip_boundary_transitions", c.jitter.skip_boundary_transitions)
      .finish();
  c.validate();
  return c;
}

std::uint64_t config_hash(const nlohmann::json& j) { return fnv1a64(j.dump()); }

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace ponlab::link
