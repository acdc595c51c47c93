#include "prnu/wavelet.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace prnu::wavelet {
namespace {

// Daubechies 4 vanishing moments (8 taps), orthonormal.
constexpr std::array<double, 8> kLow = {
    0.23037781330885523, 0.71484657055254150, 0.63088076792959040, -0.02798376941698385,
    -0.18703481171888114, 0.03084138183598697, 0.03288301166698295, -0.01059740178499728};

constexpr std::array<double, 8> make_high() {
  std::array<double, 8> g{};
  for (std::size_t k = 0; k < 8; ++k)
    g[k] = (k % 2 == 0 ? 1.0 : -1.0) * kLow[7 - k];
  return g;
}
constexpr std::array<double, 8> kHigh = make_high();

// One analysis step on a strided line of length n (even).
void analyze(double* line, int n, int stride, std::vector<double>& tmp) {
  tmp.assign(n, 0.0);
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double x = line[static_cast<std::ptrdiff_t>((2 * i + k) % n) * stride];
      a += kLow[k] * x;
      d += kHigh[k] * x;
    }
    tmp[i] = a;
    tmp[half + i] = d;
  }
  for (int i = 0; i < n; ++i)
    line[static_cast<std::ptrdiff_t>(i) * stride] = tmp[i];
}

void synthesize(double* line, int n, int stride, std::vector<double>& tmp) {
  tmp.assign(n, 0.0);
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    const double a = line[static_cast<std::ptrdiff_t>(i) * stride];
    const double d = line[static_cast<std::ptrdiff_t>(half + i) * stride];
    for (int k = 0; k < 8; ++k)
      tmp[(2 * i + k) % n] += kLow[k] * a + kHigh[k] * d;
  }
  for (int i = 0; i < n; ++i)
    line[static_cast<std::ptrdiff_t>(i) * stride] = tmp[i];
}

void check_dims(const RealPlane& p, int levels) {
  const int m = 1 << levels;
  if (levels < 1 || p.width() % m != 0 || p.height() % m != 0 || p.width() < m ||
      p.height() < m)
    throw DimensionError("plane dimensions must be divisible by 2^levels");
}

} // namespace

void forward(RealPlane& p, int levels) {
  check_dims(p, levels);
  std::vector<double> tmp;
  const int stride = p.width();
  for (int l = 0; l < levels; ++l) {
    const int w = p.width() >> l;
    const int h = p.height() >> l;
    for (int y = 0; y < h; ++y)
      analyze(p.data() + static_cast<std::ptrdiff_t>(y) * stride, w, 1, tmp);
    for (int x = 0; x < w; ++x)
      analyze(p.data() + x, h, stride, tmp);
  }
}

void inverse(RealPlane& p, int levels) {
  check_dims(p, levels);
  std::vector<double> tmp;
  const int stride = p.width();
  for (int l = levels - 1; l >= 0; --l) {
    const int w = p.width() >> l;
    const int h = p.height() >> l;
    for (int x = 0; x < w; ++x)
      synthesize(p.data() + x, h, stride, tmp);
    for (int y = 0; y < h; ++y)
      synthesize(p.data() + static_cast<std::ptrdiff_t>(y) * stride, w, 1, tmp);
  }
}

RealPlane local_mean_of_squares(const RealPlane& p, int window) {
  const int w = p.width();
  const int h = p.height();
  const int r = window / 2;
  RealPlane rows(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) {
        const double v = p(((x + k) % w + w) % w, y);
        s += v * v;
      }
      rows(x, y) = s;
    }
  RealPlane out(w, h);
  const double norm = 1.0 / (static_cast<double>(window) * window);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k)
        s += rows(x, ((y + k) % h + h) % h);
      out(x, y) = s * norm;
    }
  return out;
}

RealPlane min_window_variance(const RealPlane& band, double noise_var) {
  RealPlane est(band.width(), band.height(), 0.0);
  bool first = true;
  for (int window : {3, 5, 7, 9}) {
    const RealPlane m = local_mean_of_squares(band, window);
    auto e = est.samples();
    auto ms = m.samples();
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double v = std::max(0.0, ms[i] - noise_var);
      e[i] = first ? v : std::min(e[i], v);
    }
    first = false;
  }
  return est;
}

} // namespace prnu::wavelet
