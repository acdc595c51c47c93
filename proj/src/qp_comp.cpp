#include "prnu/qp_comp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>

#include "prnu/error.hpp"

namespace prnu::comp {
namespace {

double interpolate(std::pair<int, double> a, std::pair<int, double> b, double qp) {
  const double t = (qp - a.first) / static_cast<double>(b.first - a.first);
  if (a.second > 0.0 && b.second > 0.0)
    return std::exp(std::log(a.second) + t * (std::log(b.second) - std::log(a.second)));
  return a.second + t * (b.second - a.second);
}

void check_tiling(std::span<const codec::MacroblockMeta> meta, int width, int height) {
  if (width <= 0 || height <= 0)
    throw DimensionError("frame dimensions must be positive");
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(width) * height, 0);
  for (const auto& m : meta) {
    if (m.x < 0 || m.y < 0 || m.width <= 0 || m.height <= 0 || m.x + m.width > width ||
        m.y + m.height > height)
      throw DimensionError("macroblock outside frame");
    for (int y = m.y; y < m.y + m.height; ++y)
      for (int x = m.x; x < m.x + m.width; ++x) {
        auto& c = covered[static_cast<std::size_t>(y) * width + x];
        if (c)
          throw DimensionError("overlapping macroblocks in metadata");
        c = 1;
      }
  }
  if (std::ranges::find(covered, 0) != covered.end())
    throw DimensionError("macroblock metadata leaves a coverage gap");
}

} // namespace

double WeightCurve::operator()(int qp) const {
  if (qp > cutoff_qp || anchors.empty())
    return 0.0;
  if (qp <= anchors.front().first)
    return anchors.front().second;
  for (std::size_t i = 1; i < anchors.size(); ++i)
    if (qp <= anchors[i].first)
      return interpolate(anchors[i - 1], anchors[i], qp);
  if (anchors.size() == 1)
    return anchors.back().second;
  return std::max(0.0, interpolate(anchors[anchors.size() - 2], anchors.back(), qp));
}

void WeightCurve::validate() const {
  if (anchors.empty())
    throw ConfigError("weight curve has no anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto [qp, w] = anchors[i];
    if (qp < codec::kMinQp || qp > codec::kMaxQp)
      throw ConfigError("weight curve anchor qp out of range");
    if (i > 0 && qp <= anchors[i - 1].first)
      throw ConfigError("weight curve anchors must be strictly ascending");
    if (!std::isfinite(w) || w < 0.0)
      throw ConfigError("weight curve weights must be finite and non-negative");
  }
  if (std::abs((*this)(base_qp) - 1.0) > 1e-9)
    throw ConfigError("weight curve must equal 1 at the base qp");
  for (int qp = 10; qp < codec::kMaxQp; ++qp)
    if ((*this)(qp + 1) > (*this)(qp) + 1e-12)
      throw ConfigError("weight curve must be non-increasing for qp >= 10");
}

WeightCurve default_curve() {
  WeightCurve c;
  c.anchors = {{10, 1.74}, {15, 1.0}, {25, 0.25}};
  c.base_qp = kBaseQp;
  c.cutoff_qp = kDefaultMaskThreshold;
  return c;
}

WeightCurve step_curve(int threshold) {
  WeightCurve c;
  c.anchors = {{codec::kMinQp, 1.0}};
  c.cutoff_qp = threshold;
  return c;
}

void write_curve_csv(const WeightCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << "qp,weight\n" << std::setprecision(17);
  for (int qp = codec::kMinQp; qp <= codec::kMaxQp; ++qp)
    out << qp << ',' << curve(qp) << '\n';
  if (!out)
    throw IoError("write failed for " + path.string());
}

WeightCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open weight curve " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("qp,weight", 0) != 0)
    throw ConfigError(path.string() + ": expected header 'qp,weight'");
  WeightCurve c;
  c.cutoff_qp = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r")
      continue;
    std::istringstream row(line);
    int qp = 0;
    char comma = 0;
    double w = 0.0;
    if (!(row >> qp >> comma >> w) || comma != ',')
      throw ConfigError(path.string() + ": malformed row '" + line + "'");
    c.anchors.emplace_back(qp, w);
    if (w > 0.0)
      c.cutoff_qp = std::max(c.cutoff_qp, qp);
  }
  c.validate();
  return c;
}

WeightMap binary_mask(std::span<const codec::MacroblockMeta> meta, int width, int height,
                      int threshold_qp) {
  check_tiling(meta, width, height);
  WeightMap map(width, height, 0.0);
  for (const auto& m : meta)
    map.fill_rect(m.x, m.y, m.width, m.height, m.qp <= threshold_qp ? 1.0 : 0.0);
  return map;
}

WeightMap weight_map(std::span<const codec::MacroblockMeta> meta, int width, int height,
                     const WeightCurve& curve) {
  check_tiling(meta, width, height);
  WeightMap map(width, height, 0.0);
  for (const auto& m : meta)
    map.fill_rect(m.x, m.y, m.width, m.height, curve(m.qp));
  return map;
}

std::vector<double> isotonic_non_increasing(std::span<const double> values) {
  struct Pool {
    double sum;
    int count;
    double mean() const { return sum / count; }
  };
  std::vector<Pool> pools;
  for (double v : values) {
    pools.push_back({v, 1});
    while (pools.size() > 1 && pools[pools.size() - 2].mean() < pools.back().mean()) {
      pools[pools.size() - 2].sum += pools.back().sum;
      pools[pools.size() - 2].count += pools.back().count;
      pools.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& p : pools)
    out.insert(out.end(), static_cast<std::size_t>(p.count), p.mean());
  return out;
}

WeightCurve curve_from_pce(const std::map<int, double>& mean_pce, int cutoff_qp) {
  const auto base = mean_pce.find(kBaseQp);
  if (base == mean_pce.end())
    throw ConfigError("calibration grid must include qp 15");
  if (!(base->second > 0.0))
    throw ConfigError("calibration PCE at qp 15 must be positive");

  WeightCurve c;
  c.cutoff_qp = cutoff_qp;
  std::vector<double> tail;
  for (const auto& [qp, value] : mean_pce) {
    const double w = std::sqrt(std::max(0.0, value / base->second));
    c.anchors.emplace_back(qp, w);
    if (qp >= 10)
      tail.push_back(w);
  }
  const auto fitted = isotonic_non_increasing(tail);
  std::size_t k = 0;
  for (auto& [qp, w] : c.anchors)
    if (qp >= 10)
      w = fitted[k++];

  double at_base = 1.0;
  for (const auto& [qp, w] : c.anchors)
    if (qp == kBaseQp)
      at_base = w;
  if (at_base > 0.0)
    for (auto& a : c.anchors)
      a.second /= at_base;
  return c;
}

std::vector<SplicedFrame> splice_frames(std::span<const RealPlane> residues,
                                        std::span<const RealPlane> intensities,
                                        std::span<const std::vector<codec::MacroblockMeta>> meta,
                                        const SpliceRanking& ranking) {
  const std::size_t n = residues.size();
  if (n == 0)
    return {};
  if (meta.size() != n || (!intensities.empty() && intensities.size() != n))
    throw DimensionError("splice: residues, intensities and metadata counts differ");
  const int width = residues.front().width();
  const int height = residues.front().height();
  for (std::size_t f = 0; f < n; ++f) {
    require_same_shape(residues.front(), residues[f], "splice");
    if (!intensities.empty())
      require_same_shape(residues.front(), intensities[f], "splice");
    check_tiling(meta[f], width, height);
  }

  struct Candidate {
    std::size_t frame;
    const codec::MacroblockMeta* block;
    double intensity;
    bool valid;
  };

  std::vector<SplicedFrame> out(n);
  for (auto& s : out) {
    s.residue = RealPlane(width, height);
    if (!intensities.empty())
      s.intensity = RealPlane(width, height);
    s.weights = WeightMap(width, height, 0.0);
  }

  // Each frame's metadata tiles the frame; key positions by (x, y).
  std::map<std::pair<int, int>, std::vector<Candidate>> positions;
  for (std::size_t f = 0; f < n; ++f)
    for (const auto& m : meta[f]) {
      double mean = 0.0;
      if (!intensities.empty()) {
        for (int y = m.y; y < m.y + m.height; ++y)
          for (int x = m.x; x < m.x + m.width; ++x)
            mean += intensities[f](x, y);
        mean /= static_cast<double>(m.width) * m.height;
      }
      positions[{m.x, m.y}].push_back({f, &m, mean, m.qp <= ranking.mask_threshold_qp});
    }

  for (auto& [pos, candidates] : positions) {
    const auto& first = *candidates.front().block;
    for (const auto& c : candidates)
      if (c.block->width != first.width || c.block->height != first.height)
        throw DimensionError("splice: macroblock layout differs between frames");
    std::ranges::stable_sort(candidates, [&](const Candidate& a, const Candidate& b) {
      if (a.valid != b.valid)
        return a.valid;
      if (a.block->qp != b.block->qp)
        return a.block->qp < b.block->qp;
      if (ranking.use_intensity && !intensities.empty() && a.intensity != b.intensity)
        return a.intensity > b.intensity;
      if (ranking.use_texture && a.block->residual_energy != b.block->residual_energy)
        return a.block->residual_energy < b.block->residual_energy;
      return false;
    });
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const auto& c = candidates[j];
      const auto& m = *c.block;
      auto& dst = out[j];
      for (int y = m.y; y < m.y + m.height; ++y)
        for (int x = m.x; x < m.x + m.width; ++x) {
          dst.residue(x, y) = residues[c.frame](x, y);
          if (!intensities.empty())
            dst.intensity(x, y) = intensities[c.frame](x, y);
        }
      dst.weights.fill_rect(m.x, m.y, m.width, m.height, c.valid ? 1.0 : 0.0);
    }
  }
  return out;
}

} // namespace prnu::comp
