#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace scde::detail {

// In-place iterative radix-2 FFT; a.size() must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace scde::detail
