#include "equalize/ffe.hpp"

#include <cmath>

#include "common/error.hpp"
#include "metrics/ber.hpp"

namespace ponlab::eq {

void FfeConfig::validate() const {
  require(n_taps % 2 == 1, ErrorCode::kInvalidArgument, "FFE tap count must be odd");
  require(mu >= 0.0, ErrorCode::kInvalidArgument, "FFE step size must be >= 0");
}

double slice_normalized(double y, const data::NormStats& target_stats) {
  return target_stats.apply(link::symbol_amplitude(metrics::slice_level(target_stats.invert(y))));
}

FfeResult ffe_equalize(std::span<const double> x, std::span<const double> targets, const FfeConfig& cfg,
                       const data::NormStats& target_stats, std::span<const std::uint8_t> supervised) {
  cfg.validate();
  require(x.size() == targets.size(), ErrorCode::kShapeMismatch, "FFE: input and target lengths differ");
  require(x.size() >= cfg.n_taps, ErrorCode::kInvalidArgument, "FFE: sequence shorter than the filter");
  require(supervised.empty() || supervised.size() == x.size(), ErrorCode::kShapeMismatch,
          "FFE: supervision mask length mismatch");
  const auto half = static_cast<std::ptrdiff_t>(cfg.n_taps / 2);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  FfeResult r;
  r.taps.assign(cfg.n_taps, 0.0);
  r.taps[cfg.n_taps / 2] = 1.0;
  r.output.resize(x.size());
  r.tap_norm.resize(x.size());
  std::vector<double> window(cfg.n_taps);
  std::size_t trained = 0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double y = 0.0;
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
      const std::ptrdiff_t k = i + j;
      const double v = (k >= 0 && k < n) ? x[static_cast<std::size_t>(k)] : 0.0;
      window[static_cast<std::size_t>(j + half)] = v;
      y += r.taps[static_cast<std::size_t>(j + half)] * v;
    }
    r.output[static_cast<std::size_t>(i)] = y;
    const bool may_train = supervised.empty() || supervised[static_cast<std::size_t>(i)] != 0;
    double e;
    if (may_train && trained < cfg.training_symbols) {
      e = targets[static_cast<std::size_t>(i)] - y;
      ++trained;
    } else {
      e = slice_normalized(y, target_stats) - y;
    }
    double norm2 = 0.0;
    for (std::size_t t = 0; t < cfg.n_taps; ++t) {
      r.taps[t] += cfg.mu * e * window[t];
      norm2 += r.taps[t] * r.taps[t];
    }
    r.tap_norm[static_cast<std::size_t>(i)] = std::sqrt(norm2);
    require(std::isfinite(norm2) && norm2 <= 1e12, ErrorCode::kDiverged,
            "FFE diverged at step " + std::to_string(i) + " (||w|| > 1e6)");
  }
  return r;
}

}  // namespace ponlab::eq
