#pragma once

#include "prnu/plane.hpp"

namespace prnu::wavelet {

// Periodized 2-D orthonormal DWT with the 8-tap Daubechies filter pair, in
// Mallat layout: after level l the approximation occupies the top-left
// (w >> l) x (h >> l) corner. Dimensions must be divisible by 2^levels.
void forward(RealPlane& p, int levels);
void inverse(RealPlane& p, int levels);

// Periodic local mean of squared values over a square window of odd size.
RealPlane local_mean_of_squares(const RealPlane& p, int window);

// Local variance estimate for a zero-mean band: min over 3/5/7/9 windows of
// max(0, mean(c^2) - noise_var).
RealPlane min_window_variance(const RealPlane& band, double noise_var);

} // namespace prnu::wavelet
