#include "fft.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

namespace prnu::detail {
namespace {

// Planning is not thread-safe in FFTW; execution on fresh arrays is.
fftw_plan cached_plan(int width, int height, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(width, height, sign);
  if (auto it = plans.find(key); it != plans.end())
    return it->second;
  Spectrum scratch(static_cast<std::size_t>(width) * height);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_2d(height, width, buf, buf, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(key, plan);
  return plan;
}

} // namespace

Spectrum fft2(const RealPlane& p) {
  Spectrum s(p.samples().begin(), p.samples().end());
  auto* buf = reinterpret_cast<fftw_complex*>(s.data());
  fftw_execute_dft(cached_plan(p.width(), p.height(), FFTW_FORWARD), buf, buf);
  return s;
}

RealPlane ifft2_real(const Spectrum& s, int width, int height) {
  Spectrum work = s;
  auto* buf = reinterpret_cast<fftw_complex*>(work.data());
  fftw_execute_dft(cached_plan(width, height, FFTW_BACKWARD), buf, buf);
  RealPlane out(width, height);
  const double scale = 1.0 / (static_cast<double>(width) * height);
  auto o = out.samples();
  for (std::size_t i = 0; i < o.size(); ++i)
    o[i] = work[i].real() * scale;
  return out;
}

} // namespace prnu::detail
