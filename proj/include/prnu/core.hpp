#pragma once

#include <span>

#include "prnu/pattern.hpp"
#include "prnu/plane.hpp"

namespace prnu::core {

struct DenoiseParams {
  int levels = 4;
  double noise_var = 4.0; // sigma_0^2, intensity units squared
};

// Noise residue W = frame - denoise(frame), with the wavelet-domain local
// Wiener denoiser. Frames must be at least 32x32.
RealPlane extract_residue(const RealPlane& frame, const DenoiseParams& params = {});
RealPlane extract_residue(const BytePlane& frame, const DenoiseParams& params = {});

// Running sums of the weighted maximum-likelihood estimator:
//   K = sum(I * W * M) / sum(I^2 * M)
class Accumulator {
public:
  Accumulator() = default;
  Accumulator(int width, int height);

  int width() const noexcept { return numerator_.width(); }
  int height() const noexcept { return numerator_.height(); }
  int frame_count() const noexcept { return frames_; }
  const RealPlane& numerator() const noexcept { return numerator_; }
  const RealPlane& denominator() const noexcept { return denominator_; }

  void accumulate(const RealPlane& frame, const RealPlane& residue, const WeightMap& weights);
  // Unweighted form; the reference the weighted path must reproduce for M = 1.
  void accumulate(const RealPlane& frame, const RealPlane& residue);

  // Plane-wise sum of two partial accumulators.
  void merge(const Accumulator& other);

  friend bool operator==(const Accumulator&, const Accumulator&) = default;

private:
  RealPlane numerator_;
  RealPlane denominator_;
  int frames_ = 0;
};

inline constexpr double kFinalizeEpsilon = 1e-6;

PrnuPattern finalize(const Accumulator& acc);

// Removes row means, then column means (one pass each).
PrnuPattern zero_mean(const PrnuPattern& p);

// Suppresses peaky spectral components: each DFT magnitude is replaced by the
// part a local Wiener filter classifies as noise, phase preserved. The noise
// level is the pattern's own standard deviation unless given.
PrnuPattern wiener_fft(const PrnuPattern& p);
PrnuPattern wiener_fft(const PrnuPattern& p, double sigma);

// zero_mean followed by wiener_fft.
PrnuPattern postprocess(const PrnuPattern& p);

// Cyclic cross-correlation c(k,l) = 1/(w*h) * sum_ij a(i,j) b(i+k, j+l),
// indices modulo the plane size; plane(l, k) holds c for row shift k and
// column shift l.
RealPlane cross_correlation(const PrnuPattern& a, const PrnuPattern& b);

struct PceResult {
  double peak_corr = 0.0; // c(0,0)
  double pce = 0.0;
  int peak_row = 0;       // argmax |c|, row shift
  int peak_col = 0;       // argmax |c|, column shift
  int exclusion_halfwidth = 5;
};

inline constexpr int kDefaultExclusionHalfwidth = 5;
inline constexpr double kMatchThreshold = 60.0;

PceResult pce(const PrnuPattern& test, const PrnuPattern& reference,
              int exclusion_halfwidth = kDefaultExclusionHalfwidth);

} // namespace prnu::core
