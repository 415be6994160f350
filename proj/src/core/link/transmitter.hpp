#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "link/config.hpp"
#include "link/signal.hpp"

namespace ponlab::link {

/// Seeded i.i.d. uniform PAM-4 level indices (no periodic pattern, unlike a PRBS).
std::vector<Symbol> generate_rns_pam4(std::size_t n_symbols, std::uint64_t seed);

/// Power transmittance of the modulator for a normalized drive level
/// (0 = lowest, 1 = highest). Spans [10^(-ER/10), 1] on [0, 1] with a smooth
/// tanh-shaped saturation.
double eam_power_transmittance(double drive, const TransmitterParams& tx);

/// DC group delay (in simulation samples) of the transmitter's electrical and
/// modulator filters; level transitions appear this far after the symbol edge.
double transmitter_group_delay_samples(const TransmitterParams& tx, const LinkConfig& cfg);

/// Rectangular PAM-4 drive -> driver noise -> Bessel filters -> EAM
/// transmittance and alpha-chirp -> laser RIN and phase noise. Output mean
/// power equals the configured launch power.
OpticalField shape_and_modulate(std::span<const Symbol> symbols, const TransmitterParams& tx, const LinkConfig& cfg,
                                std::uint64_t seed);

}  // namespace ponlab::link
