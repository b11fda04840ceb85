#pragma once

#include <complex>
#include <vector>

namespace fxlearn {

// In-place radix-2 complex FFT, unnormalized. inverse=true uses e^{+iwt}
// (callers scale by 1/N themselves when they need a true inverse).
// Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false);

// Forward FFT of a real signal zero-padded/truncated to n points; returns the
// full complex spectrum of length n.
std::vector<std::complex<double>> fft_real(const std::vector<double>& x, std::size_t n);

// Symmetric Hann window of length n.
std::vector<double> hann_window(std::size_t n);

}  // namespace fxlearn
