#include "metrics/complexity.hpp"

#include <algorithm>
#include <cstdlib>

#include "common/error.hpp"

namespace ponlab::metrics {

std::int64_t rmps_dnn(const ComplexityParams& p) {
  require(!p.n_layers.empty(), ErrorCode::kInvalidArgument, "rmps_dnn needs at least one hidden layer");
  std::int64_t per_experiment = p.n_s * p.n_c * p.n_layers.front();
  for (std::size_t i = 1; i < p.n_layers.size(); ++i) per_experiment += p.n_layers[i - 1] * p.n_layers[i];
  per_experiment += p.n_layers.back() * p.n_o;
  return p.n_e * per_experiment;
}

std::int64_t rmps_scinet(const ComplexityParams& p) {
  require(p.levels >= 0 && p.levels < 62, ErrorCode::kInvalidArgument, "bad level count");
  require(p.n_s % (std::int64_t{1} << p.levels) == 0, ErrorCode::kInfeasible,
          "n_s must be divisible by 2^L");
  // Doubled bracket keeps the halves integral.
  std::int64_t twice = 2 * (p.n_s * p.n_e + p.n_s) + 60;
  for (std::int64_t l = 1; l <= p.levels; ++l) twice += 1800 * p.n_h + (p.n_s >> l);
  const std::int64_t doubled = p.n_s * twice;
  require(doubled % 2 == 0, ErrorCode::kNumerical, "rmps_scinet: non-integral result");
  return doubled / 2;
}

double prb(double rmps, double mber) {
  require(mber >= 0.0 && mber <= 1.0, ErrorCode::kInvalidArgument, "mBER must be in [0, 1]");
  return rmps * mber;
}

double complexity_reduction_percent(double reference, double ours) {
  require(reference > 0.0, ErrorCode::kInvalidArgument, "reference complexity must be positive");
  return 100.0 * (reference - ours) / reference;
}

std::vector<InstantiationMatch> search_scinet_instantiations(std::int64_t target, std::size_t limit,
                                                             std::int64_t fixed_n_s, std::int64_t fixed_levels) {
  std::vector<InstantiationMatch> all;
  for (std::int64_t log_ns = 2; log_ns <= 8; ++log_ns) {
    const std::int64_t n_s = std::int64_t{1} << log_ns;
    if (fixed_n_s && n_s != fixed_n_s) continue;
    for (std::int64_t levels = 1; levels <= std::min<std::int64_t>(5, log_ns); ++levels) {
      if (fixed_levels && levels != fixed_levels) continue;
      for (std::int64_t n_h = 1; n_h <= 16; ++n_h)
        for (std::int64_t n_e = 1; n_e <= 64; ++n_e) {
          ComplexityParams p;
          p.levels = levels;
          p.n_h = n_h;
          p.n_s = n_s;
          p.n_e = n_e;
          const std::int64_t v = rmps_scinet(p);
          all.push_back({p, v, v - target});
        }
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::llabs(a.residual) < std::llabs(b.residual);
  });
  if (all.size() > limit) all.resize(limit);
  return all;
}

nlohmann::json to_json(const ComplexityParams& p) {
  return {{"L", p.levels}, {"n_h", p.n_h}, {"n_s", p.n_s}, {"n_e", p.n_e},
          {"n_c", p.n_c},  {"n_layers", p.n_layers}, {"n_o", p.n_o}};
}

}  // namespace ponlab::metrics
