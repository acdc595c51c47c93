#pragma once

#include <complex>
#include <vector>

#include "prnu/plane.hpp"

namespace prnu::detail {

using Spectrum = std::vector<std::complex<double>>;

// Unnormalized 2-D DFT of a real plane, row-major width x height.
Spectrum fft2(const RealPlane& p);

// Inverse DFT scaled by 1/(w*h); returns the real part.
RealPlane ifft2_real(const Spectrum& s, int width, int height);

} // namespace prnu::detail
