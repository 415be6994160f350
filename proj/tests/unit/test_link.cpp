#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "link/bessel.hpp"
#include "link/fft.hpp"
#include "link/fiber.hpp"
#include "link/jitter.hpp"
#include "link/pipeline.hpp"
#include "link/receiver.hpp"
#include "link/sync.hpp"
#include "link/transmitter.hpp"

using namespace ponlab;
using namespace ponlab::link;

namespace {

double relative_rms(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

// Power-weighted rms width of |E|^2, with the centre estimated on the circle.
double rms_width_samples(const OpticalField& f) {
  const double n = static_cast<double>(f.size());
  double total = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    total += std::norm(f.samples[i]);
    mean += std::norm(f.samples[i]) * static_cast<double>(i);
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double d = static_cast<double>(i) - mean;
    if (d > n / 2) d -= n;
    if (d < -n / 2) d += n;
    var += std::norm(f.samples[i]) * d * d;
  }
  return std::sqrt(var / total);
}

OpticalField gaussian_pulse(std::size_t n, double fs, double t0_s) {
  OpticalField f;
  f.sample_rate_hz = fs;
  f.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(n) / 2) / fs;
    f.samples[i] = std::exp(-t * t / (2.0 * t0_s * t0_s)) * 1e-2;
  }
  return f;
}

OpticalField random_field(std::size_t n, double fs, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  OpticalField f;
  f.sample_rate_hz = fs;
  f.samples.resize(n);
  for (auto& s : f.samples) s = {0.1 + 0.01 * g(rng), 0.01 * g(rng)};
  return f;
}

PhysicalConfig quiet_config() {
  PhysicalConfig c;
  c.link.noise_enabled = false;
  return c;
}

// |H|^2 of the 4th-order Bessel low-pass evaluated from its polynomial, scaled
// so the 3 dB point sits at fc.
double bessel_power_gain(double f, double fc, double w3) {
  const double w = w3 * f / fc;
  const double w2 = w * w;
  const double re = w2 * w2 - 45.0 * w2 + 105.0;
  const double im = -10.0 * w2 * w + 105.0 * w;
  return 105.0 * 105.0 / (re * re + im * im);
}

}  // namespace

TEST_CASE("propagation constants") {
  FiberParams f;
  const double b2_ps2_km = beta2_s2_per_m(f, 1550e-9) * 1e24 * 1e3;
  CHECK(b2_ps2_km == doctest::Approx(-20.394).epsilon(1e-3));
  f.cd_slope_ps_nm2_km = 0.0;
  CHECK(beta3_s3_per_m(f, 1550e-9) * 1e36 * 1e3 == doctest::Approx(0.0336).epsilon(1e-2));
  CHECK(loss_neper_per_m(f) * 1e3 == doctest::Approx(0.2 * std::log(10.0) / 10.0));
}

TEST_CASE("fiber: zero distance is the identity") {
  PhysicalConfig c = quiet_config();
  const OpticalField in = random_field(1024, c.link.sample_rate_hz(), 1);
  const OpticalField out = fiber_propagate(in, c.fiber, c.link);
  CHECK(out.samples == in.samples);
}

TEST_CASE("fiber: lossless CD operator is all-pass") {
  PhysicalConfig c = quiet_config();
  c.fiber.loss_db_per_km = 0.0;
  c.link.distance_km = 20.0;
  const OpticalField in = random_field(4096, c.link.sample_rate_hz(), 2);
  const OpticalField out = fiber_propagate(in, c.fiber, c.link);
  std::vector<Complex> a = in.samples;
  std::vector<Complex> b = out.samples;
  fft_forward(a);
  fft_forward(b);
  double peak = 0.0;
  for (const auto& v : a) peak = std::max(peak, std::abs(v));
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(std::abs(a[k]) - std::abs(b[k])));
  CHECK(worst / peak < 1e-12);
}

TEST_CASE("fiber: Gaussian pulse broadening matches the analytic formula") {
  PhysicalConfig c = quiet_config();
  c.fiber.loss_db_per_km = 0.0;
  c.fiber.cd_slope_ps_nm2_km = 0.0;
  const double t0 = 10e-12;
  const double fs = c.link.sample_rate_hz();
  for (double km : {2.0, 4.9, 9.8, 20.0}) {
    c.link.distance_km = km;
    const OpticalField in = gaussian_pulse(8192, fs, t0);
    const OpticalField out = fiber_propagate(in, c.fiber, c.link);
    const double b2z = beta2_s2_per_m(c.fiber, c.link.wavelength_m) * km * 1e3;
    const double expected = std::sqrt(1.0 + std::pow(b2z / (t0 * t0), 2.0));
    const double measured = rms_width_samples(out) / rms_width_samples(in);
    CHECK(measured == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("fiber: 10 km at 0.2 dB/km drops energy by 2 dB") {
  PhysicalConfig c = quiet_config();
  c.link.distance_km = 10.0;
  const OpticalField in = random_field(2048, c.link.sample_rate_hz(), 3);
  const OpticalField out = fiber_propagate(in, c.fiber, c.link);
  CHECK(std::abs(10.0 * std::log10(out.energy_j() / in.energy_j()) + 2.0) < 1e-9);
}

TEST_CASE("fiber: split-step without Kerr equals one-shot dispersion") {
  PhysicalConfig c = quiet_config();
  c.link.distance_km = 17.3;
  const OpticalField in = random_field(4096, c.link.sample_rate_hz(), 4);
  const OpticalField reference = dispersion_one_shot(in, c.fiber, c.link);
  for (double step : {0.1, 0.5, 3.0, 17.3, 50.0}) {
    c.fiber.step_km = step;
    CHECK(relative_rms(fiber_propagate(in, c.fiber, c.link).samples, reference.samples) < 1e-9);
  }
}

TEST_CASE("fiber: halving the step barely changes the Realistic output") {
  PhysicalConfig c = quiet_config();
  c.link.scenario = Scenario::kRealistic;
  c.link.distance_km = 20.0;
  const auto symbols = generate_rns_pam4(2048, 5);
  const OpticalField in = shape_and_modulate(symbols, c.tx, c.link, 6);
  c.fiber.step_km = 0.5;
  const OpticalField coarse = fiber_propagate(in, c.fiber, c.link);
  c.fiber.step_km = 0.25;
  const OpticalField fine = fiber_propagate(in, c.fiber, c.link);
  CHECK(relative_rms(coarse.samples, fine.samples) < 1e-3);
}

TEST_CASE("transmitter: RNS determinism and statistics") {
  const auto a = generate_rns_pam4(1 << 16, 42);
  CHECK(a == generate_rns_pam4(1 << 16, 42));
  const auto b = generate_rns_pam4(1024, 43);
  CHECK(!std::equal(b.begin(), b.end(), a.begin()));
  std::array<std::size_t, 4> counts{};
  for (Symbol s : a) {
    REQUIRE(s < 4);
    ++counts[s];
  }
  for (std::size_t n : counts) CHECK(std::abs(static_cast<double>(n) / a.size() - 0.25) < 0.02);
  CHECK_THROWS_AS(generate_rns_pam4(0, 1), Error);
}

TEST_CASE("transmitter: launch power and phase") {
  PhysicalConfig c = quiet_config();
  c.link.scenario = Scenario::kRealistic;
  const auto symbols = generate_rns_pam4(4096, 7);
  SUBCASE("noisy launch power is 10 dBm") {
    PhysicalConfig noisy;
    const OpticalField f = shape_and_modulate(symbols, noisy.tx, noisy.link, 8);
    CHECK(std::abs(10.0 * std::log10(f.mean_power_w() / 1e-3) - 10.0) < 0.01);
  }
  SUBCASE("no chirp, no laser noise: constant phase") {
    c.tx.eam_alpha_chirp = 0.0;
    const OpticalField f = shape_and_modulate(symbols, c.tx, c.link, 8);
    const double phase0 = std::arg(f.samples[0]);
    double worst = 0.0;
    for (const auto& s : f.samples) worst = std::max(worst, std::abs(std::arg(s) - phase0));
    CHECK(worst < 1e-12);
  }
  SUBCASE("constant stream: constant intensity") {
    const std::vector<Symbol> constant(512, 2);
    const OpticalField f = shape_and_modulate(constant, c.tx, c.link, 8);
    for (const auto& s : f.samples) CHECK(std::norm(s) == doctest::Approx(1e-2).epsilon(1e-9));
  }
  SUBCASE("filter cutoff above Nyquist is rejected") {
    c.link.symbol_rate_baud = 20e9;
    c.link.sim_sps = 4;
    CHECK_THROWS_AS(shape_and_modulate(symbols, c.tx, c.link, 8), Error);
  }
}

TEST_CASE("transmitter: EAM transmittance spans the extinction ratio monotonically") {
  TransmitterParams tx;
  CHECK(eam_power_transmittance(0.0, tx) == doctest::Approx(0.1));
  CHECK(eam_power_transmittance(1.0, tx) == doctest::Approx(1.0));
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = eam_power_transmittance(i / 100.0, tx);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("jitter: statistics and boundaries") {
  PhysicalConfig c = quiet_config();
  const std::size_t n_sym = 1 << 14;
  const auto symbols = generate_rns_pam4(n_sym, 9);
  const OpticalField f = shape_and_modulate(symbols, c.tx, c.link, 10);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const JitterResult j = apply_timing_jitter(f, c.jitter, c.link.sim_sps, 0.0, seed);
    CHECK(j.shifts_ui.front() == 0.0);
    CHECK(j.shifts_ui.back() == 0.0);
    double s2 = 0.0;
    for (std::size_t k = 1; k + 1 < n_sym; ++k) s2 += j.shifts_ui[k] * j.shifts_ui[k];
    const double std_ui = std::sqrt(s2 / static_cast<double>(n_sym - 2));
    CHECK(std::abs(std_ui - 0.1) < 0.005);
    for (double s : j.shifts_ui) CHECK(std::abs(s) <= 0.5);
    CHECK(j.field.size() == f.size());
  }
  JitterParams off = c.jitter;
  off.rms_ui = 0.0;
  CHECK(apply_timing_jitter(f, off, c.link.sim_sps, 3.7, 11).field.samples == f.samples);
}

TEST_CASE("jitter: rectangular transitions move by the drawn shift") {
  const int sps = 16;
  const std::size_t n_sym = 64;
  OpticalField f;
  f.sample_rate_hz = 800e9;
  for (std::size_t k = 0; k < n_sym; ++k)
    for (int i = 0; i < sps; ++i) f.samples.emplace_back(k % 2 ? 1.0 : 0.0, 0.0);
  JitterParams j;
  const JitterResult r = apply_timing_jitter(f, j, sps, 0.0, 14);
  for (std::size_t k = 1; k + 1 < n_sym; ++k) {
    // Linear resampling smears the edge when a neighbouring symbol is squeezed.
    if (r.shifts_ui[k] - r.shifts_ui[k - 1] < -0.25 || r.shifts_ui[k + 1] - r.shifts_ui[k] < -0.25) continue;
    const double edge = (static_cast<double>(k) + r.shifts_ui[k]) * sps;
    const auto after = static_cast<std::size_t>(std::ceil(edge + 1e-9));
    const auto before = static_cast<std::size_t>(std::floor(edge - 1e-9)) - 2;
    const double level = k % 2 ? 1.0 : 0.0;
    CHECK(r.field.samples[after + 1].real() == doctest::Approx(level));
    CHECK(r.field.samples[before].real() == doctest::Approx(1.0 - level));
  }
}

TEST_CASE("receiver: excess noise factor") {
  CHECK(excess_noise_factor(8.0, 0.4) == doctest::Approx(4.325).epsilon(1e-12));
  CHECK(excess_noise_factor(1.0, 0.4) == doctest::Approx(1.0));
}

TEST_CASE("receiver: noiseless output is proportional to power") {
  PhysicalConfig c = quiet_config();
  OpticalField f;
  f.sample_rate_hz = c.link.sample_rate_hz();
  f.samples.assign(1024, std::polar(std::sqrt(2e-5), 0.3));
  const ElectricalWaveform w = detect(f, c.rx, c.link, 1);
  const double expected = 0.9 * 8.0 * 2e-5 * 100.0 * std::pow(10.0, 0.5);
  for (double v : w.samples) CHECK(v == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("receiver: dark-input noise variance matches PSD times noise bandwidth") {
  PhysicalConfig c;
  OpticalField f;
  const double fs = c.link.sample_rate_hz();
  f.sample_rate_hz = fs;
  f.samples.assign(1 << 16, 0.0);
  const ElectricalWaveform w = detect(f, c.rx, c.link, 99);
  double mean = 0.0;
  for (double v : w.samples) mean += v;
  mean /= w.samples.size();
  double var = 0.0;
  for (double v : w.samples) var += (v - mean) * (v - mean);
  var /= w.samples.size();

  // Trapezoidal integral of |H|^2 over [0, fs/2]; the 3 dB point of the
  // prototype is found independently by bisection on the polynomial.
  double lo = 1.0;
  double hi = 4.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bessel_power_gain(1.0, 1.0 / mid, 1.0) > 0.5 ? lo : hi) = mid;
  }
  const double w3 = 0.5 * (lo + hi);
  const int steps = 200000;
  double bandwidth = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double fr = 0.5 * fs * i / steps;
    bandwidth += (i == 0 || i == steps ? 0.5 : 1.0) * bessel_power_gain(fr, c.rx.bessel_cutoff_ghz * 1e9, w3);
  }
  bandwidth *= 0.5 * fs / steps;
  const double psd = 1e-24 + 4e-24;
  const double gain = 100.0 * std::pow(10.0, 0.5);
  const double expected = psd * bandwidth * gain * gain;
  CHECK(var == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("receiver: excess path loss") {
  LinkConfig l;
  FiberParams f;
  l.distance_km = 20.0;
  CHECK(excess_path_loss_db(l, f) == doctest::Approx(24.7));
  l.distance_km = 200.0;
  CHECK_THROWS_AS(excess_path_loss_db(l, f), Error);
}

TEST_CASE("sync: recovers a constructed lag") {
  LinkConfig cfg;
  const auto symbols = generate_rns_pam4(2048, 21);
  const std::size_t sps = static_cast<std::size_t>(cfg.sim_sps);
  for (int lag : {7, 0, 23, -5}) {
    ElectricalWaveform w;
    w.sample_rate_hz = cfg.sample_rate_hz();
    const std::size_t n = symbols.size() * sps;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = static_cast<std::size_t>((static_cast<long>(i) - lag + static_cast<long>(n)) %
                                                 static_cast<long>(n));
      w.samples[i] = 0.5 + 0.1 * symbol_amplitude(symbols[src / sps]);
    }
    const SymbolFrame frame = synchronize_downsample(w, symbols, cfg);
    CHECK(frame.lag_samples == lag);
    CHECK(frame.size() == symbols.size());
    for (std::size_t k = 0; k < symbols.size(); ++k)
      REQUIRE(frame.soft[k] == doctest::Approx(0.5 + 0.1 * symbol_amplitude(symbols[k])));
  }
}

TEST_CASE("sync: flat waveforms are ambiguous") {
  LinkConfig cfg;
  const auto symbols = generate_rns_pam4(256, 22);
  ElectricalWaveform w;
  w.samples.assign(symbols.size() * cfg.sim_sps, 1.0);
  try {
    synchronize_downsample(w, symbols, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAmbiguous);
  }
  w.samples.resize(10);
  CHECK_THROWS_AS(synchronize_downsample(w, symbols, cfg), Error);
}

TEST_CASE("pipeline: noiseless back-to-back has an open eye") {
  PhysicalConfig c = quiet_config();
  for (Scenario s : {Scenario::kCd, Scenario::kRealistic}) {
    c.link.scenario = s;
    c.jitter.enabled = false;
    const CaptureResult r = simulate_capture(c, 4096, 5, 0);
    std::array<double, 4> min{1e300, 1e300, 1e300, 1e300};
    std::array<double, 4> max{-1e300, -1e300, -1e300, -1e300};
    for (std::size_t k = 0; k < r.frame.size(); ++k) {
      min[r.frame.symbols[k]] = std::min(min[r.frame.symbols[k]], r.frame.soft[k]);
      max[r.frame.symbols[k]] = std::max(max[r.frame.symbols[k]], r.frame.soft[k]);
    }
    for (int l = 0; l < 3; ++l) CHECK(max[l] < min[l + 1]);
  }
}

TEST_CASE("pipeline: determinism and common random numbers") {
  PhysicalConfig c;
  c.link.distance_km = 5.0;
  const CaptureResult a = simulate_capture(c, 1024, 77, 1);
  const CaptureResult b = simulate_capture(c, 1024, 77, 1);
  CHECK(a.frame.soft == b.frame.soft);
  CHECK(a.frame.symbols == b.frame.symbols);
  const CaptureSeeds s5 = capture_seeds(77, 1, 5.0);
  const CaptureSeeds s7 = capture_seeds(77, 1, 7.0);
  CHECK(s5.symbols == s7.symbols);
  CHECK(s5.transmitter == s7.transmitter);
  CHECK(s5.receiver != s7.receiver);
  CHECK(capture_seeds(77, 2, 5.0).symbols != s5.symbols);
}

TEST_CASE("pipeline: dumps round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "ponlab_test_link";
  std::filesystem::remove_all(dir);
  OpticalField f = random_field(256, 800e9, 31);
  write_waveform_dump(dir / "wave.bin", f, 31, "abc");
  const OpticalField g = read_waveform_dump(dir / "wave.bin");
  REQUIRE(g.size() == f.size());
  CHECK(g.sample_rate_hz == f.sample_rate_hz);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(g.samples[i] - f.samples[i]) < 1e-7);
  const auto sidecar = nlohmann::json::parse(io::read_text_file(dir / "wave.bin.json"));
  CHECK(sidecar.at("config_hash") == "abc");

  SymbolFrame frame;
  frame.symbols = {0, 1, 2, 3, 3};
  frame.soft = {-3.0, -1.0, 1.0, 3.0, 2.5};
  frame.lag_samples = -4;
  frame.phase_offset = 2;
  nlohmann::json header;
  write_symbol_frame(dir / "frame.bin", frame, {{"seed", 5}});
  const SymbolFrame back = read_symbol_frame(dir / "frame.bin", &header);
  CHECK(back.symbols == frame.symbols);
  CHECK(back.soft == frame.soft);
  CHECK(back.lag_samples == -4);
  CHECK(header.at("seed") == 5);
  std::filesystem::remove_all(dir);
}
