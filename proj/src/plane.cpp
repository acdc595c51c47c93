#include "prnu/pattern.hpp"
#include "prnu/plane.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prnu {

RealPlane to_real(const BytePlane& p) {
  RealPlane out(p.width(), p.height());
  std::ranges::transform(p.samples(), out.samples().begin(),
                         [](std::uint8_t v) { return static_cast<double>(v); });
  return out;
}

BytePlane to_bytes_clipped(const RealPlane& p) {
  BytePlane out(p.width(), p.height());
  std::ranges::transform(p.samples(), out.samples().begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  });
  return out;
}

void PrnuPattern::check() const {
  if (values_.width() <= 0 || values_.height() <= 0)
    throw DimensionError("pattern dimensions must be positive");
  for (double v : values_.samples())
    if (!std::isfinite(v))
      throw Error("pattern contains non-finite values");
}

WeightMap::WeightMap(int width, int height, double fill) : weights_(width, height, fill) {
  if (!(fill >= 0.0) || !std::isfinite(fill))
    throw Error("weights must be finite and non-negative");
}

WeightMap::WeightMap(RealPlane weights) : weights_(std::move(weights)) {
  for (double w : weights_.samples())
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error("weights must be finite and non-negative");
}

void WeightMap::fill_rect(int x, int y, int w, int h, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw Error("weights must be finite and non-negative");
  if (x < 0 || y < 0 || x + w > width() || y + h > height())
    throw DimensionError("weight rectangle outside map");
  for (int yy = y; yy < y + h; ++yy)
    for (int xx = x; xx < x + w; ++xx)
      weights_(xx, yy) = weight;
}

double WeightMap::sum() const noexcept {
  return std::accumulate(weights_.samples().begin(), weights_.samples().end(), 0.0);
}

} // namespace prnu
