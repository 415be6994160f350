#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "link/signal.hpp"

namespace ponlab::metrics {

using link::Symbol;

// Nearest PAM-4 level for an amplitude on the {-3,-1,1,3} scale. Thresholds
// sit at -2, 0, 2; a value exactly on a threshold goes to the lower level.
Symbol slice_level(double amplitude);

struct BerReport {
  std::uint64_t bit_errors = 0;
  std::uint64_t bits_counted = 0;
  std::uint64_t symbol_errors = 0;
  std::uint64_t symbols_counted = 0;
  std::array<std::uint64_t, 4> errors_by_level{};  // symbol errors keyed by true level
  double ber = 0.0;
  double ser = 0.0;
};

// Gray-mapped bit comparison of decisions against the transmitted symbols.
BerReport count_ber(std::span<const Symbol> decisions, std::span<const Symbol> truth);
void merge(BerReport& into, const BerReport& other);

// Lower median (element (n-1)/2 of the sorted values).
double median_ber(std::span<const double> bers);
double median_ber(std::span<const BerReport> reports);

}  // namespace ponlab::metrics
