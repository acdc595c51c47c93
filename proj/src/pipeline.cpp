#include "prnu/pipeline.hpp"

#include <numeric>

#include "prnu/error.hpp"
#include "prnu/parallel.hpp"

namespace prnu::pipeline {
namespace {
constexpr std::size_t kAccumulateChunks = 8;
} // namespace

std::string to_string(Compensation c) {
  switch (c) {
  case Compensation::None: return "none";
  case Compensation::Mask: return "mask";
  case Compensation::Weight: return "weight";
  }
  return "none";
}

Compensation compensation_from_string(const std::string& name) {
  if (name == "none")
    return Compensation::None;
  if (name == "mask")
    return Compensation::Mask;
  if (name == "weight")
    return Compensation::Weight;
  throw ConfigError("unknown compensation '" + name + "' (expected none, mask or weight)");
}

std::vector<FrameEvidence> prepare_evidence(const codec::DecodeOutput& decoded,
                                            const core::DenoiseParams& denoise, int threads) {
  const std::size_t n = decoded.frames.size();
  std::vector<FrameEvidence> out(n);
  std::map<int, std::size_t> slot;
  for (std::size_t i = 0; i < n; ++i) {
    out[i].display_index = decoded.display_indices[i];
    out[i].type = decoded.frame_types[i];
    out[i].qp = decoded.frame_qp[i];
    slot[decoded.display_indices[i]] = i;
  }
  for (const auto& m : decoded.meta)
    out[slot.at(m.frame_index)].meta.push_back(m);

  parallel_for(n, threads, [&](std::size_t i) {
    out[i].intensity = to_real(decoded.frames[i]);
    out[i].residue = core::extract_residue(out[i].intensity, denoise);
  });
  return out;
}

std::vector<FrameEvidence> prepare_evidence(const io::RawVideo& video,
                                            const core::DenoiseParams& denoise, int threads) {
  const std::size_t n = video.frames.size();
  std::vector<FrameEvidence> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    out[i].display_index = static_cast<int>(i);
    out[i].intensity = to_real(video.frames[i]);
    out[i].residue = core::extract_residue(out[i].intensity, denoise);
  });
  return out;
}

WeightMap frame_weights(const FrameEvidence& frame, const EstimateOptions& options) {
  const int w = frame.intensity.width();
  const int h = frame.intensity.height();
  switch (options.compensation) {
  case Compensation::None:
    return WeightMap(w, h, 1.0);
  case Compensation::Mask:
    return comp::binary_mask(frame.meta, w, h, options.mask_threshold_qp);
  case Compensation::Weight:
    return comp::weight_map(frame.meta, w, h, options.curve);
  }
  return WeightMap(w, h, 1.0);
}

core::Accumulator accumulate(std::span<const FrameEvidence> frames,
                             const EstimateOptions& options) {
  if (frames.empty())
    throw ConfigError("no frames to estimate from");
  const int w = frames.front().intensity.width();
  const int h = frames.front().intensity.height();

  // The chunk count is fixed, not tied to the thread count, so the summation
  // order and therefore the result is the same however many workers run.
  const std::size_t chunks = std::min<std::size_t>(frames.size(), kAccumulateChunks);
  std::vector<core::Accumulator> partial(chunks, core::Accumulator(w, h));
  parallel_for(chunks, options.threads, [&](std::size_t c) {
    const std::size_t begin = frames.size() * c / chunks;
    const std::size_t end = frames.size() * (c + 1) / chunks;
    for (std::size_t i = begin; i < end; ++i) {
      if (options.compensation == Compensation::None)
        partial[c].accumulate(frames[i].intensity, frames[i].residue);
      else
        partial[c].accumulate(frames[i].intensity, frames[i].residue,
                              frame_weights(frames[i], options));
    }
  });
  for (std::size_t c = 1; c < chunks; ++c)
    partial[0].merge(partial[c]);
  return std::move(partial[0]);
}

PrnuPattern estimate(std::span<const FrameEvidence> frames, const EstimateOptions& options) {
  return core::postprocess(core::finalize(accumulate(frames, options)));
}

PrnuPattern single_frame_pattern(const FrameEvidence& frame) {
  core::Accumulator acc(frame.intensity.width(), frame.intensity.height());
  acc.accumulate(frame.intensity, frame.residue);
  return core::postprocess(core::finalize(acc));
}

std::vector<double> single_frame_pce(std::span<const FrameEvidence> frames,
                                     const PrnuPattern& reference, int threads) {
  std::vector<double> out(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t i) {
    out[i] = core::pce(single_frame_pattern(frames[i]), reference).pce;
  });
  return out;
}

comp::WeightCurve calibrate_curve(const PrnuPattern& reference,
                                  const std::map<int, codec::DecodeOutput>& decoded_by_qp,
                                  int threads) {
  if (!decoded_by_qp.contains(comp::kBaseQp))
    throw ConfigError("calibration grid must include qp 15");
  std::map<int, double> mean_pce;
  for (const auto& [qp, decoded] : decoded_by_qp) {
    if (decoded.frames.empty())
      throw ConfigError("calibration video for qp " + std::to_string(qp) + " has no frames");
    for (const auto& f : decoded.frames)
      require_same_shape(f, reference.values(), "calibration reference");
    const auto evidence = prepare_evidence(decoded, {}, threads);
    const auto pces = single_frame_pce(evidence, reference, threads);
    mean_pce[qp] = std::accumulate(pces.begin(), pces.end(), 0.0) / static_cast<double>(pces.size());
  }
  return comp::curve_from_pce(mean_pce);
}

} // namespace prnu::pipeline
