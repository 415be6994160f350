#include "link/jitter.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"

namespace ponlab::link {
namespace {

std::complex<double> sample_circular(const std::vector<std::complex<double>>& x, double t) {
  const double n = static_cast<double>(x.size());
  t = std::fmod(t, n);
  if (t < 0.0) t += n;
  const auto i0 = static_cast<std::size_t>(std::floor(t));
  const double frac = t - std::floor(t);
  const std::size_t i1 = (i0 + 1) % x.size();
  return (1.0 - frac) * x[i0 % x.size()] + frac * x[i1];
}

}  // namespace

JitterResult apply_timing_jitter(const OpticalField& field, const JitterParams& jitter, int sim_sps,
                                 double knot_offset_samples, std::uint64_t seed) {
  jitter.validate();
  require(sim_sps > 0 && field.size() % static_cast<std::size_t>(sim_sps) == 0, ErrorCode::kInvalidArgument,
          "field length is not a whole number of symbols");
  const std::size_t n_sym = field.size() / static_cast<std::size_t>(sim_sps);
  JitterResult result;
  result.shifts_ui.assign(n_sym, 0.0);
  if (jitter.rms_ui == 0.0 || n_sym < 3) {
    result.field = field;
    return result;
  }

  Rng rng = make_rng(seed, "jitter");
  std::normal_distribution<double> gauss(0.0, jitter.rms_ui);
  const std::size_t first = jitter.skip_boundary_transitions ? 1 : 0;
  const std::size_t last = jitter.skip_boundary_transitions ? n_sym - 1 : n_sym;
  for (std::size_t k = first; k < last; ++k) {
    double shift = gauss(rng);
    if (std::abs(shift) > jitter.shape_std) {
      shift = std::copysign(jitter.shape_std, shift);
      ++result.clipped;
    }
    result.shifts_ui[k] = shift;
  }
  if (result.clipped > 0)
    log::warning("timing jitter: clipped " + std::to_string(result.clipped) + " shifts to +-" +
                 std::to_string(jitter.shape_std) + " UI");

  // Knots e_k = (k + shift_k) * sps in coordinates u = t - knot_offset. Output
  // u in [e_k, e_{k+1}) reads source k*sps + (u - e_k) * sps / (e_{k+1} - e_k).
  const double sps = static_cast<double>(sim_sps);
  const std::size_t n = field.size();
  result.field.sample_rate_hz = field.sample_rate_hz;
  result.field.samples.resize(n);
  auto knot = [&](std::size_t k) {
    const double shift = k < n_sym ? result.shifts_ui[k] : 0.0;
    return (static_cast<double>(k) + shift) * sps;
  };
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) - knot_offset_samples;
    double source = u;
    if (u >= 0.0) {
      while (k < n_sym && knot(k + 1) <= u) ++k;
      const double e0 = knot(k);
      const double e1 = knot(k + 1);
      source = static_cast<double>(k) * sps + (e1 > e0 ? (u - e0) * sps / (e1 - e0) : 0.0);
    }
    result.field.samples[i] = sample_circular(field.samples, source + knot_offset_samples);
  }
  return result;
}

}  // namespace ponlab::link
