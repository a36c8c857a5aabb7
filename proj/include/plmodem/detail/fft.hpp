#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace plmodem::detail {

// Real-input FFT, returns n/2+1 bins. Thread-safe (planning is serialized).
std::vector<std::complex<double>> rfft(std::span<const double> x);

// Inverse of rfft; n is the desired real output length. Normalized by 1/n.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum,
                          std::size_t n);

} // namespace plmodem::detail
