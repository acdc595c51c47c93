#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "prnu/codec/types.hpp"
#include "prnu/pattern.hpp"

namespace prnu::comp {

inline constexpr int kDefaultMaskThreshold = 28;
inline constexpr int kBaseQp = 15;

// QP -> contribution weight. Log-linear between anchors, flat below the first
// anchor, last segment's slope continued up to the cutoff, zero above it.
struct WeightCurve {
  std::vector<std::pair<int, double>> anchors; // ascending qp
  int base_qp = kBaseQp;
  int cutoff_qp = kDefaultMaskThreshold;

  double operator()(int qp) const;

  // Throws ConfigError unless weights are finite and non-negative, weight at
  // base_qp is 1 and the curve is non-increasing for qp >= 10.
  void validate() const;
};

// Anchors (10, 1.74), (15, 1.0), (25, 0.25); zero above qp 28.
WeightCurve default_curve();

// 1 for qp <= threshold, 0 above: binary masking as a weight curve.
WeightCurve step_curve(int threshold);

// One row per integer qp 1..51, header "qp,weight".
void write_curve_csv(const WeightCurve& curve, const std::filesystem::path& path);
WeightCurve read_curve_csv(const std::filesystem::path& path);

// Throws DimensionError if the macroblocks do not tile the frame exactly.
WeightMap binary_mask(std::span<const codec::MacroblockMeta> frame_meta, int width, int height,
                      int threshold_qp = kDefaultMaskThreshold);
WeightMap weight_map(std::span<const codec::MacroblockMeta> frame_meta, int width, int height,
                     const WeightCurve& curve);

// Curve from mean single-frame PCE per qp: sqrt(PCE(qp) / PCE(15)), negatives
// clamped, isotonic (non-increasing) for qp >= 10, renormalized at qp 15.
WeightCurve curve_from_pce(const std::map<int, double>& mean_pce,
                           int cutoff_qp = kDefaultMaskThreshold);

// Pool-adjacent-violators fit of a non-increasing sequence (unit weights).
std::vector<double> isotonic_non_increasing(std::span<const double> values);

struct SpliceRanking {
  // Blocks above this qp are ranked last and carry weight 0.
  int mask_threshold_qp = kDefaultMaskThreshold;
  bool use_intensity = true; // brighter blocks first
  bool use_texture = true;   // lower residual energy first
};

struct SplicedFrame {
  RealPlane residue;
  RealPlane intensity; // empty when no intensities were supplied
  WeightMap weights;
};

// For every macroblock position, ranks that position's blocks across all
// frames and emits spliced frame j holding the j-th best block there. Blocks
// keep their grid position. Ties keep frame order.
std::vector<SplicedFrame> splice_frames(std::span<const RealPlane> residues,
                                        std::span<const RealPlane> intensities,
                                        std::span<const std::vector<codec::MacroblockMeta>> meta,
                                        const SpliceRanking& ranking = {});

} // namespace prnu::comp
