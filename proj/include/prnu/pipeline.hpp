#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "prnu/codec/decoder.hpp"
#include "prnu/core.hpp"
#include "prnu/frame_io.hpp"
#include "prnu/qp_comp.hpp"

namespace prnu::pipeline {

// How macroblock qp shapes each frame's contribution to the estimate.
enum class Compensation { None, Mask, Weight };

std::string to_string(Compensation c);
Compensation compensation_from_string(const std::string& name);

struct EstimateOptions {
  Compensation compensation = Compensation::None;
  int mask_threshold_qp = comp::kDefaultMaskThreshold;
  comp::WeightCurve curve = comp::default_curve();
  core::DenoiseParams denoise;
  int threads = 1;
};

// One decoded frame ready for estimation.
struct FrameEvidence {
  int display_index = 0;
  codec::FrameType type = codec::FrameType::I;
  int qp = 0;
  RealPlane intensity;
  RealPlane residue;
  std::vector<codec::MacroblockMeta> meta;
};

// Residues of every returned frame, in the decoder's display order.
std::vector<FrameEvidence> prepare_evidence(const codec::DecodeOutput& decoded,
                                            const core::DenoiseParams& denoise = {},
                                            int threads = 1);
std::vector<FrameEvidence> prepare_evidence(const io::RawVideo& video,
                                            const core::DenoiseParams& denoise = {},
                                            int threads = 1);

WeightMap frame_weights(const FrameEvidence& frame, const EstimateOptions& options);

core::Accumulator accumulate(std::span<const FrameEvidence> frames, const EstimateOptions& options);

// accumulate, finalize, zero_mean, wiener_fft.
PrnuPattern estimate(std::span<const FrameEvidence> frames, const EstimateOptions& options);

// Pattern from one frame alone (unweighted), postprocessed like a full estimate.
PrnuPattern single_frame_pattern(const FrameEvidence& frame);

// PCE of each frame's single-frame pattern against the reference.
std::vector<double> single_frame_pce(std::span<const FrameEvidence> frames,
                                     const PrnuPattern& reference, int threads = 1);

// Mean single-frame PCE per qp against the reference, then curve_from_pce.
// Every decode must be an intervention decode of a constant-qp stream.
comp::WeightCurve calibrate_curve(const PrnuPattern& reference,
                                  const std::map<int, codec::DecodeOutput>& decoded_by_qp,
                                  int threads = 1);

} // namespace prnu::pipeline
