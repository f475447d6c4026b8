#ifndef VTV_IMAGE_HPP
#define VTV_IMAGE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace vtv {

// Row-major pixel grid. rows() is the height (first index k), cols() the
// width (second index l). Intensities live on [0, 255] by convention.
template <typename Scalar>
using Image = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-frequency complex gain of a circular convolution operator, laid out
// like the image it acts on.
template <typename Scalar>
using OperatorSymbol =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Imaged = Image<double>;
using OperatorSymbold = OperatorSymbol<double>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ChannelMismatch : public Error {
 public:
  using Error::Error;
};

/// A frequency bin of a denominator symbol fell below the singularity floor.
class SingularSymbol : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterate picked up NaN or Inf.
class NonFinite : public Error {
 public:
  using Error::Error;
};

class UnsupportedAngle : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------

/// Small convolution kernel with odd extents, centred on the origin.
///
/// Taps are addressed by signed offsets: `at(p, q)` with p in [-ry, ry]
/// (vertical) and q in [-rx, rx] (horizontal). Square kernels have
/// ry == rx == r; the motion-blur PSF is the 1 x length case.
template <typename Scalar>
class Kernel {
 public:
  using Taps = Image<Scalar>;

  Kernel() : taps_(Taps::Ones(1, 1)) {}

  explicit Kernel(Taps taps) : taps_(std::move(taps)) {
    if (taps_.rows() % 2 == 0 || taps_.cols() % 2 == 0) {
      throw DimensionMismatch("kernel extents must be odd, got " + std::to_string(taps_.rows()) +
                              "x" + std::to_string(taps_.cols()));
    }
  }

  static Kernel identity() { return Kernel(); }

  /// Outer product `column * row^T` of two odd-length 1-D filters.
  template <typename ColVec, typename RowVec>
  static Kernel outer(const ColVec& column, const RowVec& row) {
    Taps t = column * row.transpose();
    return Kernel(std::move(t));
  }

  Eigen::Index radius_y() const { return taps_.rows() / 2; }
  Eigen::Index radius_x() const { return taps_.cols() / 2; }
  bool is_square() const { return taps_.rows() == taps_.cols(); }

  Scalar at(Eigen::Index p, Eigen::Index q) const {
    return taps_(p + radius_y(), q + radius_x());
  }

  const Taps& taps() const { return taps_; }
  Scalar tap_sum() const { return taps_.sum(); }

  /// Point reflection K(-p, -q).
  Kernel flipped() const { return Kernel(Taps(taps_.reverse())); }

  /// Zero-pads to a square of halfwidth max(ry, rx); the operator is unchanged.
  Kernel padded_square() const {
    const Eigen::Index r = std::max(radius_y(), radius_x());
    Taps t = Taps::Zero(2 * r + 1, 2 * r + 1);
    t.block(r - radius_y(), r - radius_x(), taps_.rows(), taps_.cols()) = taps_;
    return Kernel(std::move(t));
  }

  Kernel scaled(Scalar s) const { return Kernel(Taps(taps_ * s)); }

  bool operator==(const Kernel& other) const {
    return taps_.rows() == other.taps_.rows() && taps_.cols() == other.taps_.cols() &&
           taps_ == other.taps_;
  }

 private:
  Taps taps_;
};

using Kerneld = Kernel<double>;

// ---------------------------------------------------------------------------
// Small helpers shared across modules.

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

template <typename A, typename B>
void require_same_size(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b,
                       const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
  }
}

/// Frobenius inner product of two equally sized images.
template <typename Scalar>
Scalar inner(const Image<Scalar>& a, const Image<Scalar>& b) {
  require_same_size(a, b, "inner");
  return (a.array() * b.array()).sum();
}

/// Unit impulse at (0, 0).
template <typename Scalar>
Image<Scalar> impulse(Eigen::Index height, Eigen::Index width) {
  Image<Scalar> u = Image<Scalar>::Zero(height, width);
  u(0, 0) = Scalar(1);
  return u;
}

}  // namespace vtv

#endif  // VTV_IMAGE_HPP
