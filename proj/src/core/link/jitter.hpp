#pragma once

#include <cstdint>
#include <vector>

#include "link/config.hpp"
#include "link/signal.hpp"

namespace ponlab::link {

struct JitterResult {
  OpticalField field;
  std::vector<double> shifts_ui;  // per-symbol displacement of its leading transition
  std::size_t clipped = 0;
};

/// Displaces each interior symbol transition by a Gaussian draw of rms_ui unit
/// intervals by piecewise-linearly warping the time axis between transitions
/// and resampling the field. Knots sit at k*sps + knot_offset_samples so they
/// coincide with where the filtered transitions actually occur.
JitterResult apply_timing_jitter(const OpticalField& field, const JitterParams& jitter, int sim_sps,
                                 double knot_offset_samples, std::uint64_t seed);

}  // namespace ponlab::link
