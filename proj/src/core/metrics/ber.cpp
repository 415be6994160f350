#include "metrics/ber.hpp"

#include <algorithm>
#include <bit>

#include "common/error.hpp"

namespace ponlab::metrics {

Symbol slice_level(double a) {
  if (a <= -2.0) return 0;
  if (a <= 0.0) return 1;
  if (a <= 2.0) return 2;
  return 3;
}

BerReport count_ber(std::span<const Symbol> decisions, std::span<const Symbol> truth) {
  require(decisions.size() == truth.size(), ErrorCode::kShapeMismatch,
          "count_ber: " + std::to_string(decisions.size()) + " decisions vs " + std::to_string(truth.size()) +
              " symbols");
  BerReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const unsigned diff = link::kGrayBits[decisions[i] & 3u] ^ link::kGrayBits[truth[i] & 3u];
    r.bit_errors += static_cast<unsigned>(std::popcount(diff));
    if (diff) {
      ++r.symbol_errors;
      ++r.errors_by_level[truth[i] & 3u];
    }
  }
  r.symbols_counted = truth.size();
  r.bits_counted = 2 * truth.size();
  if (r.bits_counted) {
    r.ber = static_cast<double>(r.bit_errors) / static_cast<double>(r.bits_counted);
    r.ser = static_cast<double>(r.symbol_errors) / static_cast<double>(r.symbols_counted);
  }
  return r;
}

void merge(BerReport& into, const BerReport& o) {
  into.bit_errors += o.bit_errors;
  into.bits_counted += o.bits_counted;
  into.symbol_errors += o.symbol_errors;
  into.symbols_counted += o.symbols_counted;
  for (int l = 0; l < 4; ++l) into.errors_by_level[l] += o.errors_by_level[l];
  if (into.bits_counted) {
    into.ber = static_cast<double>(into.bit_errors) / static_cast<double>(into.bits_counted);
    into.ser = static_cast<double>(into.symbol_errors) / static_cast<double>(into.symbols_counted);
  }
}

double median_ber(std::span<const double> bers) {
  require(!bers.empty(), ErrorCode::kInvalidArgument, "median of an empty BER list");
  std::vector<double> v(bers.begin(), bers.end());
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

double median_ber(std::span<const BerReport> reports) {
  std::vector<double> v;
  for (const auto& r : reports) v.push_back(r.ber);
  return median_ber(v);
}

}  // namespace ponlab::metrics
