#ifndef VTV_METRICS_HPP
#define VTV_METRICS_HPP

#include <cmath>
#include <limits>

#include "vtv/image.hpp"

namespace vtv {

/// Peak signal-to-noise ratio in dB on the [0, 255] scale:
/// 10 log10(255^2 N / ||ref - test||^2). Identical images give +infinity.
template <typename Scalar>
Scalar psnr(const Image<Scalar>& ref, const Image<Scalar>& test) {
  require_same_size(ref, test, "psnr");
  const Scalar err = (ref - test).squaredNorm();
  if (err == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar n = static_cast<Scalar>(ref.size());
  return Scalar(10) * std::log10(Scalar(255) * Scalar(255) * n / err);
}

}  // namespace vtv

#endif  // VTV_METRICS_HPP
