#pragma once

#include <complex>
#include <vector>

#include "expheat/spectral_grid.hpp"

namespace expheat::detail {

/// In-place unnormalized n-dimensional DFT; sign = -1 forward, +1 backward.
void fft_inplace(std::vector<std::complex<double>>& data, const GridSpec& grid, int sign);

} // namespace expheat::detail
