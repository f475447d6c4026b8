#ifndef VTV_DEGRADATION_OP_HPP
#define VTV_DEGRADATION_OP_HPP

#include <optional>

#include "vtv/convolution.hpp"
#include "vtv/fft.hpp"

namespace vtv {

/// The forward operator A of f = A u + noise: identity or a circular blur.
template <typename Scalar>
class DegradationOp {
 public:
  enum class Kind { Identity, Blur };

  static DegradationOp identity() { return DegradationOp(); }
  static DegradationOp blur(Kernel<Scalar> psf) { return DegradationOp(std::move(psf)); }

  Kind kind() const { return psf_ ? Kind::Blur : Kind::Identity; }
  bool is_identity() const { return !psf_; }
  const Kernel<Scalar>& psf() const { return *psf_; }

  Image<Scalar> apply(const Image<Scalar>& u) const {
    return psf_ ? conv_circular(u, *psf_) : u;
  }

  Image<Scalar> apply_adjoint(const Image<Scalar>& v) const {
    return psf_ ? conv_adjoint(v, *psf_) : v;
  }

  /// Symbol of A (all ones for the identity).
  OperatorSymbol<Scalar> symbol(Eigen::Index rows, Eigen::Index cols) const {
    if (!psf_) return OperatorSymbol<Scalar>::Ones(rows, cols);
    return kernel_symbol(*psf_, rows, cols);
  }

  /// Symbol of A*A, i.e. |A(w)|^2.
  Image<Scalar> normal_symbol(Eigen::Index rows, Eigen::Index cols) const {
    if (!psf_) return Image<Scalar>::Ones(rows, cols);
    return kernel_symbol(*psf_, rows, cols).cwiseAbs2();
  }

 private:
  DegradationOp() = default;
  explicit DegradationOp(Kernel<Scalar> psf) : psf_(std::move(psf)) {}

  std::optional<Kernel<Scalar>> psf_;
};

using DegradationOpd = DegradationOp<double>;

}  // namespace vtv

#endif  // VTV_DEGRADATION_OP_HPP
