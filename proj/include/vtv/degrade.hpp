#ifndef VTV_DEGRADE_HPP
#define VTV_DEGRADE_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "vtv/degradation_op.hpp"

namespace vtv {

/// Additive white Gaussian noise: standard deviation in intensity units.
struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Identifier recorded in run metadata for the noise generator below.
inline constexpr const char* kNoiseGeneratorId = "mt19937_64/box-muller-53bit";

/// Standard normal variates from std::mt19937_64 via the Box-Muller
/// transform on 53-bit uniforms. Both the engine and the transform are fully
/// specified, so a seed gives the same stream on every conforming platform
/// (std::normal_distribution does not guarantee that).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1)
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// u + sigma z, z drawn in row-major pixel order.
template <typename Scalar>
Image<Scalar> gaussian_noise(const Image<Scalar>& u, const NoiseSpec& spec) {
  if (spec.sigma < 0.0) throw ConfigError("gaussian_noise: negative sigma");
  Image<Scalar> out = u;
  if (spec.sigma == 0.0) return out;
  NormalSource normal(spec.seed);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.data()[i] += static_cast<Scalar>(spec.sigma * normal());
  }
  return out;
}

/// Horizontal motion blur: 1 x length, uniform taps 1/length.
template <typename Scalar = double>
Kernel<Scalar> motion_blur_kernel(int length, double angle_degrees = 0.0) {
  if (angle_degrees != 0.0) {
    throw UnsupportedAngle("motion_blur_kernel: only angle 0 is supported");
  }
  if (length < 1 || length % 2 == 0) {
    throw ConfigError("motion_blur_kernel: length must be odd and >= 1, got " +
                      std::to_string(length));
  }
  return Kernel<Scalar>(Kernel<Scalar>::Taps::Constant(1, length, Scalar(1) / Scalar(length)));
}

/// f = A u + noise.
template <typename Scalar>
Image<Scalar> apply_degradation(const Image<Scalar>& u, const DegradationOp<Scalar>& op,
                                const NoiseSpec& noise) {
  return gaussian_noise(op.apply(u), noise);
}

/// Deterministic piecewise-smooth test scene on [0, 255]: a shaded
/// background, a disk, a ring, a dark slab, a checker patch and a smooth bump.
template <typename Scalar = double>
Image<Scalar> synthetic_scene(Eigen::Index rows = 256, Eigen::Index cols = 256) {
  Image<Scalar> u(rows, cols);
  const double h = static_cast<double>(rows);
  const double w = static_cast<double>(cols);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index l = 0; l < cols; ++l) {
      const double y = (static_cast<double>(k) + 0.5) / h;
      const double x = (static_cast<double>(l) + 0.5) / w;
      double v = 70.0 + 60.0 * x + 15.0 * std::sin(2.0 * std::numbers::pi * y);
      const double bump = std::exp(-((x - 0.3) * (x - 0.3) + (y - 0.75) * (y - 0.75)) / 0.01);
      v += 50.0 * bump;
      const double disk = std::hypot(x - 0.3, y - 0.32);
      if (disk < 0.17) v = 205.0 - 60.0 * disk;
      const double ring = std::hypot(x - 0.7, y - 0.68);
      if (ring > 0.1 && ring < 0.19) v = 175.0;
      if (y > 0.55 && y < 0.9 && x > 0.08 && x < 0.2) v = 25.0;
      if (y > 0.08 && y < 0.3 && x > 0.6 && x < 0.92) {
        const bool odd = (static_cast<int>(x * 32.0) + static_cast<int>(y * 32.0)) % 2 != 0;
        v = odd ? 150.0 : 95.0;
      }
      u(k, l) = static_cast<Scalar>(v);
    }
  }
  return u;
}

}  // namespace vtv

#endif  // VTV_DEGRADE_HPP
