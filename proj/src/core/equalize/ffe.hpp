#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "data/dataset.hpp"

namespace ponlab::eq {

struct FfeConfig {
  std::size_t n_taps = 21;
  double mu = 1e-3;
  std::size_t training_symbols = 4000;

  void validate() const;
};

struct FfeResult {
  std::vector<double> output;    // equalized sequence, same scale as the targets
  std::vector<double> taps;      // final coefficients
  std::vector<double> tap_norm;  // ||w|| after each update
};

/// LMS-adapted FIR filter over x (samples outside the sequence read as 0).
/// The first `training_symbols` positions with supervised[n] != 0 (all
/// positions when the mask is empty) use e = target - y; every other position
/// is decision-directed with e = slice(y) - y. Slicing happens on the PAM-4
/// amplitude scale after inverting `target_stats`. Taps start as a centre
/// spike. Throws kDiverged when ||w|| exceeds 1e6.
FfeResult ffe_equalize(std::span<const double> x, std::span<const double> targets, const FfeConfig& cfg,
                       const data::NormStats& target_stats = {}, std::span<const std::uint8_t> supervised = {});

// Nearest PAM-4 level expressed back in the normalized target scale.
double slice_normalized(double y, const data::NormStats& target_stats);

}  // namespace ponlab::eq
