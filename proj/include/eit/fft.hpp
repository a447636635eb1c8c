#pragma once
#include <complex>
#include <vector>

namespace eit {

// In-place radix-2 complex FFT. n must be a power of two.
// sign = -1: forward (no scaling), sign = +1: inverse (no scaling).
void fft_inplace(std::vector<std::complex<double>>& a, int sign);

// Forward DFT coefficients F_m = (1/N) sum_j f_j e^{-2*pi*i*m*j/N},
// m = 0..N-1 (so f(theta) = sum_m F_m e^{i*m*theta} with theta_j = 2*pi*j/N).
std::vector<std::complex<double>> dft_coefficients(const std::vector<double>& f);

} // namespace eit
