#pragma once

#include "link/config.hpp"
#include "link/signal.hpp"

namespace ponlab::link {

// Propagation constants in SI units.
double beta2_s2_per_m(const FiberParams& fiber, double wavelength_m);
double beta3_s3_per_m(const FiberParams& fiber, double wavelength_m);
double loss_neper_per_m(const FiberParams& fiber);  // power attenuation coefficient

/// Symmetric split-step Fourier propagation over cfg.distance_km: half linear
/// step (loss, beta2, beta3) / full Kerr step exp(i*gamma*|E|^2*dz) / half
/// linear step. The CD scenario runs with gamma = 0. A step longer than the
/// span collapses to a single step; zero distance returns the input.
OpticalField fiber_propagate(const OpticalField& field, const FiberParams& fiber, const LinkConfig& cfg);

/// The linear part of the fiber applied once over the whole span.
OpticalField dispersion_one_shot(const OpticalField& field, const FiberParams& fiber, const LinkConfig& cfg);

}  // namespace ponlab::link
