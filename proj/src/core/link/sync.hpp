#pragma once

#include <span>

#include "link/config.hpp"
#include "link/signal.hpp"

namespace ponlab::link {

/// Finds the waveform lag by circular cross-correlation against the ideal
/// rectangular symbol waveform, picks the intra-symbol sampling phase with the
/// largest variance of per-level means, and returns one soft sample per
/// transmitted symbol.
SymbolFrame synchronize_downsample(const ElectricalWaveform& wave, std::span<const Symbol> tx_symbols,
                                   const LinkConfig& cfg);

}  // namespace ponlab::link
