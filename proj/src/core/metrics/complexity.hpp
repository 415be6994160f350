#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace ponlab::metrics {

// Symbols of the complexity expressions. Layer widths n_1..n_3 are only used
// by the DNN count.
struct ComplexityParams {
  std::int64_t levels = 3;        // L
  std::int64_t n_h = 1;           // conv features
  std::int64_t n_s = 64;          // window size / input length
  std::int64_t n_e = 1;           // number of experiments
  std::int64_t n_c = 1;           // input channels
  std::vector<std::int64_t> n_layers{60, 64, 18};
  std::int64_t n_o = 1;
};

// n_e * (n_s*n_c*n_1 + n_1*n_2 + n_2*n_3 + n_3*n_o), generalized to any depth.
std::int64_t rmps_dnn(const ComplexityParams& p);

// n_s * [(n_s*n_e + n_s) + sum_{l=1..L} (1800*n_h + n_s/2^l)/2 + 30], evaluated
// in exact integer arithmetic. Throws when n_s is not divisible by 2^L.
std::int64_t rmps_scinet(const ComplexityParams& p);

double prb(double rmps, double mber);

// Relative reduction of `ours` against `reference`, in percent.
double complexity_reduction_percent(double reference, double ours);

struct InstantiationMatch {
  ComplexityParams params;
  std::int64_t value = 0;
  std::int64_t residual = 0;  // value - target
};

/// Scans n_s in {4..256} (powers of two), L <= min(5, log2 n_s), n_h in
/// [1, 16], n_e in [1, 64] for the instantiations closest to `target`.
/// Exact matches come first; at most `limit` results.
std::vector<InstantiationMatch> search_scinet_instantiations(std::int64_t target, std::size_t limit = 5,
                                                             std::int64_t fixed_n_s = 0, std::int64_t fixed_levels = 0);

nlohmann::json to_json(const ComplexityParams& p);

}  // namespace ponlab::metrics
