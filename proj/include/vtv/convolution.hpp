#ifndef VTV_CONVOLUTION_HPP
#define VTV_CONVOLUTION_HPP

#include "vtv/image.hpp"

namespace vtv {

namespace detail {

inline Eigen::Index wrap(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace detail

/// out(k, l) += weight * f((k - s) mod h, (l - t) mod w), done as four block updates.
template <typename Scalar>
void add_rolled(Image<Scalar>& out, const Image<Scalar>& f, Eigen::Index s, Eigen::Index t,
                Scalar weight) {
  const Eigen::Index h = f.rows();
  const Eigen::Index w = f.cols();
  s = detail::wrap(s, h);
  t = detail::wrap(t, w);
  auto acc = [&](Eigen::Index dr, Eigen::Index dc, Eigen::Index sr, Eigen::Index sc,
                 Eigen::Index nr, Eigen::Index nc) {
    if (nr > 0 && nc > 0) out.block(dr, dc, nr, nc) += weight * f.block(sr, sc, nr, nc);
  };
  acc(s, t, 0, 0, h - s, w - t);
  acc(0, t, h - s, 0, s, w - t);
  acc(s, 0, 0, w - t, h - s, t);
  acc(0, 0, h - s, w - t, s, t);
}

/// Circular convolution: out(k,l) = sum_{p,q} f((k-p) mod h, (l-q) mod w) K(p,q).
template <typename Scalar>
Image<Scalar> conv_circular(const Image<Scalar>& f, const Kernel<Scalar>& kernel) {
  Image<Scalar> out = Image<Scalar>::Zero(f.rows(), f.cols());
  const Eigen::Index ry = kernel.radius_y();
  const Eigen::Index rx = kernel.radius_x();
  for (Eigen::Index p = -ry; p <= ry; ++p) {
    for (Eigen::Index q = -rx; q <= rx; ++q) {
      const Scalar tap = kernel.at(p, q);
      if (tap != Scalar(0)) add_rolled(out, f, p, q, tap);
    }
  }
  return out;
}

/// Adjoint of conv_circular: correlation with K, i.e. convolution with K(-p,-q).
template <typename Scalar>
Image<Scalar> conv_adjoint(const Image<Scalar>& f, const Kernel<Scalar>& kernel) {
  Image<Scalar> out = Image<Scalar>::Zero(f.rows(), f.cols());
  const Eigen::Index ry = kernel.radius_y();
  const Eigen::Index rx = kernel.radius_x();
  for (Eigen::Index p = -ry; p <= ry; ++p) {
    for (Eigen::Index q = -rx; q <= rx; ++q) {
      const Scalar tap = kernel.at(p, q);
      if (tap != Scalar(0)) add_rolled(out, f, -p, -q, tap);
    }
  }
  return out;
}

}  // namespace vtv

#endif  // VTV_CONVOLUTION_HPP
