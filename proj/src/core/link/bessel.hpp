#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ponlab::link {

// 4th-order Bessel-Thomson low-pass, H(s) = 105 / (s^4 + 10 s^3 + 45 s^2 + 105 s + 105),
// with the frequency axis scaled so |H| = 1/sqrt(2) at the cutoff.
std::complex<double> bessel4_response(double frequency_hz, double cutoff_hz);

// Normalized angular frequency where the prototype polynomial is 3 dB down (~2.1139).
double bessel4_prototype_3db_frequency();

// Filters a real waveform in the frequency domain (circular). Each cutoff in
// `cutoffs_hz` contributes one cascaded Bessel section.
void apply_bessel_filters(std::vector<double>& waveform, double sample_rate_hz, std::span<const double> cutoffs_hz);

// Throws when a filter cutoff lies at or above Nyquist of the simulation grid.
void check_cutoff_below_nyquist(double cutoff_hz, double sample_rate_hz, const char* what);

}  // namespace ponlab::link
