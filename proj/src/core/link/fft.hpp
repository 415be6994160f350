#pragma once

#include <complex>
#include <vector>

namespace ponlab::link {

using Complex = std::complex<double>;

// In-place transforms backed by FFTW. `inverse` includes the 1/N factor, so
// inverse(forward(x)) == x up to rounding. Safe to call from several threads.
void fft_forward(std::vector<Complex>& data);
void fft_inverse(std::vector<Complex>& data);

// Angular frequency (rad/s) of FFT bin k for an N-point grid at sample_rate.
double bin_angular_frequency(std::size_t k, std::size_t n, double sample_rate);

}  // namespace ponlab::link
