#pragma once

#include <cstdint>

#include "link/config.hpp"
#include "link/signal.hpp"

namespace ponlab::link {

// McIntyre excess noise factor F(M) = k*M + (1 - k)*(2 - 1/M).
double excess_noise_factor(double gain, double ionization_k);

// Flat attenuator for the part of the optical path loss not spent in fiber.
double excess_path_loss_db(const LinkConfig& cfg, const FiberParams& fiber);
OpticalField attenuate(const OpticalField& field, double loss_db);

/// APD (responsivity, gain, shot noise with excess factor) -> APD bandwidth ->
/// thermal and post-amplifier input noise -> TIA -> post-amplifier gain ->
/// 4th-order Bessel receive filter.
ElectricalWaveform detect(const OpticalField& field, const ReceiverParams& rx, const LinkConfig& cfg,
                          std::uint64_t seed);

}  // namespace ponlab::link
