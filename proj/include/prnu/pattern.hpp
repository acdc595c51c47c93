#pragma once

#include "prnu/plane.hpp"

namespace prnu {

// Real-valued multiplicative sensor factor, estimated or ground truth.
class PrnuPattern {
public:
  PrnuPattern() = default;
  PrnuPattern(int width, int height) : values_(width, height, 0.0) { check(); }
  explicit PrnuPattern(RealPlane values) : values_(std::move(values)) { check(); }

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  const RealPlane& values() const noexcept { return values_; }
  RealPlane& values() noexcept { return values_; }

  double operator()(int x, int y) const noexcept { return values_(x, y); }

  friend bool operator==(const PrnuPattern&, const PrnuPattern&) = default;

private:
  void check() const;

  RealPlane values_;
};

// Per-pixel contribution weights; a binary mask is the 0/1 special case.
class WeightMap {
public:
  WeightMap() = default;
  WeightMap(int width, int height, double fill = 1.0);
  explicit WeightMap(RealPlane weights);

  int width() const noexcept { return weights_.width(); }
  int height() const noexcept { return weights_.height(); }
  const RealPlane& weights() const noexcept { return weights_; }
  double operator()(int x, int y) const noexcept { return weights_(x, y); }

  // Sets every pixel of the rectangle; negative or non-finite weights throw.
  void fill_rect(int x, int y, int w, int h, double weight);

  double sum() const noexcept;

  friend bool operator==(const WeightMap&, const WeightMap&) = default;

private:
  RealPlane weights_;
};

} // namespace prnu
