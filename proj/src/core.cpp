#include "prnu/core.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "prnu/wavelet.hpp"

namespace prnu::core {
namespace {

RealPlane reflect_pad(const RealPlane& p, int w, int h) {
  RealPlane out(w, h);
  auto mirror = [](int i, int n) {
    const int period = 2 * n;
    i %= period;
    return i < n ? i : period - 1 - i;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out(x, y) = p(mirror(x, p.width()), mirror(y, p.height()));
  return out;
}

void denoise_band(RealPlane& coeffs, int x0, int y0, int bw, int bh, double noise_var) {
  RealPlane band(bw, bh);
  for (int y = 0; y < bh; ++y)
    for (int x = 0; x < bw; ++x)
      band(x, y) = coeffs(x0 + x, y0 + y);
  const RealPlane var = wavelet::min_window_variance(band, noise_var);
  for (int y = 0; y < bh; ++y)
    for (int x = 0; x < bw; ++x)
      // Keep the part of the coefficient the Wiener filter attributes to noise.
      coeffs(x0 + x, y0 + y) = band(x, y) * noise_var / (var(x, y) + noise_var);
}

} // namespace

RealPlane extract_residue(const RealPlane& frame, const DenoiseParams& params) {
  if (frame.width() < 32 || frame.height() < 32)
    throw DimensionError("residue extraction needs at least 32x32 samples");
  if (params.levels < 1 || !(params.noise_var > 0.0))
    throw ConfigError("invalid denoiser parameters");

  const int m = 1 << params.levels;
  const int pw = (frame.width() + m - 1) / m * m;
  const int ph = (frame.height() + m - 1) / m * m;
  RealPlane coeffs = (pw == frame.width() && ph == frame.height()) ? frame
                                                                   : reflect_pad(frame, pw, ph);
  wavelet::forward(coeffs, params.levels);
  for (int l = 0; l < params.levels; ++l) {
    const int bw = pw >> (l + 1);
    const int bh = ph >> (l + 1);
    denoise_band(coeffs, bw, 0, bw, bh, params.noise_var);
    denoise_band(coeffs, 0, bh, bw, bh, params.noise_var);
    denoise_band(coeffs, bw, bh, bw, bh, params.noise_var);
  }
  // The coarsest approximation belongs entirely to the denoised image.
  const int aw = pw >> params.levels;
  const int ah = ph >> params.levels;
  for (int y = 0; y < ah; ++y)
    for (int x = 0; x < aw; ++x)
      coeffs(x, y) = 0.0;
  wavelet::inverse(coeffs, params.levels);

  if (pw == frame.width() && ph == frame.height())
    return coeffs;
  RealPlane out(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x)
      out(x, y) = coeffs(x, y);
  return out;
}

RealPlane extract_residue(const BytePlane& frame, const DenoiseParams& params) {
  return extract_residue(to_real(frame), params);
}

Accumulator::Accumulator(int width, int height)
    : numerator_(width, height, 0.0), denominator_(width, height, 0.0) {}

void Accumulator::accumulate(const RealPlane& frame, const RealPlane& residue,
                             const WeightMap& weights) {
  require_same_shape(numerator_, frame, "accumulate(frame)");
  require_same_shape(numerator_, residue, "accumulate(residue)");
  require_same_shape(numerator_, weights, "accumulate(weights)");
  const auto i = frame.samples();
  const auto w = residue.samples();
  const auto m = weights.weights().samples();
  auto num = numerator_.samples();
  auto den = denominator_.samples();
  for (std::size_t k = 0; k < num.size(); ++k) {
    num[k] += i[k] * w[k] * m[k];
    den[k] += i[k] * i[k] * m[k];
  }
  ++frames_;
}

void Accumulator::accumulate(const RealPlane& frame, const RealPlane& residue) {
  require_same_shape(numerator_, frame, "accumulate(frame)");
  require_same_shape(numerator_, residue, "accumulate(residue)");
  const auto i = frame.samples();
  const auto w = residue.samples();
  auto num = numerator_.samples();
  auto den = denominator_.samples();
  for (std::size_t k = 0; k < num.size(); ++k) {
    num[k] += i[k] * w[k];
    den[k] += i[k] * i[k];
  }
  ++frames_;
}

void Accumulator::merge(const Accumulator& other) {
  require_same_shape(numerator_, other.numerator_, "merge");
  auto num = numerator_.samples();
  auto den = denominator_.samples();
  const auto onum = other.numerator_.samples();
  const auto oden = other.denominator_.samples();
  for (std::size_t k = 0; k < num.size(); ++k) {
    num[k] += onum[k];
    den[k] += oden[k];
  }
  frames_ += other.frames_;
}

PrnuPattern finalize(const Accumulator& acc) {
  if (acc.frame_count() < 1)
    throw Error("cannot finalize an empty accumulator");
  RealPlane k(acc.width(), acc.height());
  const auto num = acc.numerator().samples();
  const auto den = acc.denominator().samples();
  auto out = k.samples();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = num[i] / std::max(den[i], kFinalizeEpsilon);
  return PrnuPattern(std::move(k));
}

PrnuPattern zero_mean(const PrnuPattern& p) {
  RealPlane v = p.values();
  const int w = v.width();
  const int h = v.height();
  for (int y = 0; y < h; ++y) {
    auto row = v.row(y);
    double mean = 0.0;
    for (double s : row)
      mean += s;
    mean /= w;
    for (double& s : row)
      s -= mean;
  }
  std::vector<double> col_mean(w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      col_mean[x] += v(x, y);
  for (double& c : col_mean)
    c /= h;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      v(x, y) -= col_mean[x];
  return PrnuPattern(std::move(v));
}

PrnuPattern wiener_fft(const PrnuPattern& p) {
  const auto s = p.values().samples();
  const double n = static_cast<double>(s.size());
  double mean = 0.0;
  for (double v : s)
    mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : s)
    var += (v - mean) * (v - mean);
  return wiener_fft(p, std::sqrt(var / n));
}

PrnuPattern wiener_fft(const PrnuPattern& p, double sigma) {
  const int w = p.width();
  const int h = p.height();
  if (!(sigma > 0.0))
    return PrnuPattern(w, h);

  auto spectrum = detail::fft2(p.values());
  const double norm = 1.0 / std::sqrt(static_cast<double>(w) * h);
  RealPlane magnitude(w, h);
  auto mag = magnitude.samples();
  for (std::size_t i = 0; i < mag.size(); ++i)
    mag[i] = std::abs(spectrum[i]) * norm;

  const double noise_var = sigma * sigma;
  const RealPlane var = wavelet::min_window_variance(magnitude, noise_var);
  const auto v = var.samples();
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    spectrum[i] *= noise_var / (v[i] + noise_var);
  return PrnuPattern(detail::ifft2_real(spectrum, w, h));
}

PrnuPattern postprocess(const PrnuPattern& p) { return wiener_fft(zero_mean(p)); }

RealPlane cross_correlation(const PrnuPattern& a, const PrnuPattern& b) {
  require_same_shape(a, b, "cross_correlation");
  const int w = a.width();
  const int h = a.height();
  const auto fa = detail::fft2(a.values());
  auto fb = detail::fft2(b.values());
  for (std::size_t i = 0; i < fb.size(); ++i)
    fb[i] *= std::conj(fa[i]);
  RealPlane c = detail::ifft2_real(fb, w, h);
  const double scale = 1.0 / (static_cast<double>(w) * h);
  for (double& v : c.samples())
    v *= scale;
  return c;
}

PceResult pce(const PrnuPattern& test, const PrnuPattern& reference, int exclusion_halfwidth) {
  require_same_shape(test, reference, "pce");
  const int w = test.width();
  const int h = test.height();
  const int side = 2 * exclusion_halfwidth + 1;
  if (exclusion_halfwidth < 0 || side > w || side > h ||
      static_cast<long long>(side) * side >= static_cast<long long>(w) * h)
    throw ConfigError("PCE exclusion region must be smaller than the correlation plane");

  const RealPlane c = cross_correlation(test, reference);
  PceResult r;
  r.exclusion_halfwidth = exclusion_halfwidth;
  r.peak_corr = c(0, 0);

  auto cyclic_distance = [](int i, int n) { return std::min(i, n - i); };
  double energy = 0.0;
  long long count = 0;
  double best = -1.0;
  for (int k = 0; k < h; ++k)
    for (int l = 0; l < w; ++l) {
      const double v = c(l, k);
      if (std::abs(v) > best) {
        best = std::abs(v);
        r.peak_row = k;
        r.peak_col = l;
      }
      if (cyclic_distance(k, h) <= exclusion_halfwidth &&
          cyclic_distance(l, w) <= exclusion_halfwidth)
        continue;
      energy += v * v;
      ++count;
    }
  const double floor = energy / static_cast<double>(count);
  r.pce = floor > 0.0 ? r.peak_corr * r.peak_corr / floor : 0.0;
  return r;
}

} // namespace prnu::core
