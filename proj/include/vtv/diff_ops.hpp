#ifndef VTV_DIFF_OPS_HPP
#define VTV_DIFF_OPS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "vtv/convolution.hpp"
#include "vtv/image.hpp"

namespace vtv {

enum class Shrinkage { Anisotropic, Isotropic };

/// Horizontal (x, along a row) and vertical (y, down a column) differences.
template <typename Scalar>
struct Gradient {
  Image<Scalar> x;
  Image<Scalar> y;

  static Gradient zero(Eigen::Index rows, Eigen::Index cols) {
    return {Image<Scalar>::Zero(rows, cols), Image<Scalar>::Zero(rows, cols)};
  }

  Gradient& operator+=(const Gradient& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Gradient& operator-=(const Gradient& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend Gradient operator+(Gradient a, const Gradient& b) { return a += b; }
  friend Gradient operator-(Gradient a, const Gradient& b) { return a -= b; }

  Scalar squared_norm() const { return x.squaredNorm() + y.squaredNorm(); }
  bool all_finite() const { return x.allFinite() && y.allFinite(); }
};

/// One Gradient per feature channel.
template <typename Scalar>
struct VectorField {
  std::vector<Gradient<Scalar>> channels;

  static VectorField zero(std::size_t m, Eigen::Index rows, Eigen::Index cols) {
    return {std::vector<Gradient<Scalar>>(m, Gradient<Scalar>::zero(rows, cols))};
  }

  std::size_t size() const { return channels.size(); }
  Gradient<Scalar>& operator[](std::size_t i) { return channels[i]; }
  const Gradient<Scalar>& operator[](std::size_t i) const { return channels[i]; }

  Scalar squared_norm() const {
    Scalar s(0);
    for (const auto& g : channels) s += g.squared_norm();
    return s;
  }
};

template <typename Scalar>
Scalar inner(const Gradient<Scalar>& a, const Gradient<Scalar>& b) {
  return inner(a.x, b.x) + inner(a.y, b.y);
}

/// Forward differences with periodic wrap.
template <typename Scalar>
Gradient<Scalar> grad(const Image<Scalar>& u) {
  Gradient<Scalar> g{-u, -u};
  add_rolled(g.x, u, 0, -1, Scalar(1));
  add_rolled(g.y, u, -1, 0, Scalar(1));
  return g;
}

/// Exact adjoint of grad: backward differences, i.e. the negated divergence.
template <typename Scalar>
Image<Scalar> grad_adjoint(const Gradient<Scalar>& p) {
  require_same_size(p.x, p.y, "grad_adjoint");
  Image<Scalar> out = -p.x - p.y;
  add_rolled(out, p.x, 0, 1, Scalar(1));
  add_rolled(out, p.y, 1, 0, Scalar(1));
  return out;
}

/// Symbol-free form of grad_adjoint(grad(u)) = -Laplacian(u), periodic.
template <typename Scalar>
Kernel<Scalar> negative_laplacian_kernel() {
  typename Kernel<Scalar>::Taps t(3, 3);
  t << 0, -1, 0, -1, 4, -1, 0, -1, 0;
  return Kernel<Scalar>(std::move(t));
}

/// sum |gx| + |gy|.
template <typename Scalar>
Scalar tv_aniso(const Gradient<Scalar>& g) {
  return g.x.cwiseAbs().sum() + g.y.cwiseAbs().sum();
}

/// sum sqrt(gx^2 + gy^2).
template <typename Scalar>
Scalar tv_iso(const Gradient<Scalar>& g) {
  return (g.x.array().square() + g.y.array().square()).sqrt().sum();
}

/// Weighted sum of per-channel TV. Empty weights means all ones.
template <typename Scalar>
Scalar vtv(const VectorField<Scalar>& p, const std::vector<Scalar>& weights = {},
           Shrinkage flavor = Shrinkage::Anisotropic) {
  if (!weights.empty() && weights.size() != p.size()) {
    throw ChannelMismatch("vtv: weight count differs from channel count");
  }
  Scalar total(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Scalar w = weights.empty() ? Scalar(1) : weights[i];
    total += w * (flavor == Shrinkage::Anisotropic ? tv_aniso(p[i]) : tv_iso(p[i]));
  }
  return total;
}

/// sgn(v) max(|v| - t, 0), with sgn(0) = 0.
template <typename Scalar>
Scalar soft_threshold(Scalar v, Scalar t) {
  const Scalar mag = std::abs(v) - t;
  if (!(mag > Scalar(0))) return Scalar(0);
  return v > Scalar(0) ? mag : -mag;
}

template <typename Scalar>
Image<Scalar> soft_threshold(const Image<Scalar>& v, Scalar t) {
  return v.unaryExpr([t](Scalar x) { return soft_threshold(x, t); });
}

/// Component-wise shrinkage of one gradient pair.
template <typename Scalar>
Gradient<Scalar> shrink(const Gradient<Scalar>& v, Scalar t) {
  return {soft_threshold(v.x, t), soft_threshold(v.y, t)};
}

/// Shrinks the pixel-wise vector (gx, gy) towards zero by t in magnitude.
template <typename Scalar>
Gradient<Scalar> shrink_iso(const Gradient<Scalar>& v, Scalar t) {
  const auto mag = (v.x.array().square() + v.y.array().square()).sqrt().eval();
  const auto scale =
      (mag > t).select((mag - t) / mag.max(std::numeric_limits<Scalar>::min()), Scalar(0)).eval();
  return {(v.x.array() * scale).matrix(), (v.y.array() * scale).matrix()};
}

/// Channel-wise shrinkage with threshold t[i] on channel i.
template <typename Scalar>
VectorField<Scalar> shrink(const VectorField<Scalar>& v, const std::vector<Scalar>& t,
                           Shrinkage flavor = Shrinkage::Anisotropic) {
  if (t.size() != v.size()) throw ChannelMismatch("shrink: threshold count differs");
  VectorField<Scalar> out;
  out.channels.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (t[i] < Scalar(0)) throw ConfigError("shrink: negative threshold");
    out.channels.push_back(flavor == Shrinkage::Anisotropic ? shrink(v[i], t[i])
                                                            : shrink_iso(v[i], t[i]));
  }
  return out;
}

}  // namespace vtv

#endif  // VTV_DIFF_OPS_HPP
