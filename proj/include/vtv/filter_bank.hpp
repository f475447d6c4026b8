#ifndef VTV_FILTER_BANK_HPP
#define VTV_FILTER_BANK_HPP

#include <cmath>
#include <vector>

#include "vtv/convolution.hpp"
#include "vtv/fft.hpp"
#include "vtv/image.hpp"

namespace vtv {

enum class ChannelRole { Lowpass, Detail };

/// Ordered set of m feature kernels. Channel 0 is the one given the
/// distinguished (lambda_1, gamma_1) weights by the solver.
template <typename Scalar>
class FilterBank {
 public:
  FilterBank(std::vector<Kernel<Scalar>> kernels, std::vector<ChannelRole> roles)
      : kernels_(std::move(kernels)), roles_(std::move(roles)) {
    if (kernels_.empty()) throw ConfigError("filter bank needs at least one kernel");
    if (roles_.size() != kernels_.size()) throw ConfigError("filter bank: one role per kernel");
  }

  explicit FilterBank(std::vector<Kernel<Scalar>> kernels)
      : FilterBank(kernels, default_roles(kernels.size())) {}

  /// m = 1 with the identity kernel: the feature model collapses to plain TV.
  static FilterBank identity() { return FilterBank({Kernel<Scalar>::identity()}); }

  std::size_t size() const { return kernels_.size(); }
  const Kernel<Scalar>& kernel(std::size_t i) const { return kernels_[i]; }
  const std::vector<Kernel<Scalar>>& kernels() const { return kernels_; }
  ChannelRole role(std::size_t i) const { return roles_[i]; }
  const std::vector<ChannelRole>& roles() const { return roles_; }

  /// Copy with kernel i multiplied by s. Used as a negative control for UEP checks.
  FilterBank with_scaled_kernel(std::size_t i, Scalar s) const {
    FilterBank copy = *this;
    copy.kernels_.at(i) = copy.kernels_.at(i).scaled(s);
    return copy;
  }

 private:
  static std::vector<ChannelRole> default_roles(std::size_t m) {
    std::vector<ChannelRole> roles(m, ChannelRole::Detail);
    if (m > 0) roles[0] = ChannelRole::Lowpass;
    return roles;
  }

  std::vector<Kernel<Scalar>> kernels_;
  std::vector<ChannelRole> roles_;
};

using FilterBankd = FilterBank<double>;

/// m feature images of common size.
template <typename Scalar>
struct FeatureStack {
  std::vector<Image<Scalar>> channels;

  std::size_t size() const { return channels.size(); }
  Image<Scalar>& operator[](std::size_t i) { return channels[i]; }
  const Image<Scalar>& operator[](std::size_t i) const { return channels[i]; }

  Scalar squared_norm() const {
    Scalar s(0);
    for (const auto& c : channels) s += c.squaredNorm();
    return s;
  }
};

template <typename Scalar>
Scalar inner(const FeatureStack<Scalar>& a, const FeatureStack<Scalar>& b) {
  if (a.size() != b.size()) throw ChannelMismatch("inner: channel counts differ");
  Scalar s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

/// Piecewise-linear B-spline tight frame, one level, nine 3x3 kernels.
///
/// With the 1-D filters h1 = [1 2 1]/4, h2 = sqrt(2)/4 [1 0 -1] and
/// h3 = [-1 2 -1]/4, kernel n = 3(i-1)+j is the outer product h_i^T h_j:
/// h_i runs down the rows, h_j across the columns.
template <typename Scalar = double>
FilterBank<Scalar> bspline_bank() {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  const Scalar quarter = Scalar(0.25);
  const Scalar s2 = std::sqrt(Scalar(2)) / Scalar(4);
  const Vec3 h[3] = {Vec3(quarter, 2 * quarter, quarter), Vec3(s2, Scalar(0), -s2),
                     Vec3(-quarter, 2 * quarter, -quarter)};
  std::vector<Kernel<Scalar>> kernels;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) kernels.push_back(Kernel<Scalar>::outer(h[i], h[j]));
  }
  return FilterBank<Scalar>(std::move(kernels));
}

/// Feature images F_i u = u (*) K_i.
template <typename Scalar>
FeatureStack<Scalar> analyze(const Image<Scalar>& u, const FilterBank<Scalar>& bank) {
  FeatureStack<Scalar> out;
  out.channels.reserve(bank.size());
  for (const auto& k : bank.kernels()) out.channels.push_back(conv_circular(u, k));
  return out;
}

/// F* g = sum_i F_i* g_i.
template <typename Scalar>
Image<Scalar> synthesize_adjoint(const FeatureStack<Scalar>& g, const FilterBank<Scalar>& bank) {
  if (g.size() != bank.size()) {
    throw ChannelMismatch("synthesize_adjoint: stack has " + std::to_string(g.size()) +
                          " channels, bank has " + std::to_string(bank.size()));
  }
  Image<Scalar> out = Image<Scalar>::Zero(g[0].rows(), g[0].cols());
  for (std::size_t i = 0; i < g.size(); ++i) {
    require_same_size(g[i], g[0], "synthesize_adjoint");
    out += conv_adjoint(g[i], bank.kernel(i));
  }
  return out;
}

/// sum_i |K_i^(w)|^2 per frequency, the symbol of F*F.
template <typename Scalar>
Image<Scalar> frame_operator_symbol(const FilterBank<Scalar>& bank, Eigen::Index rows,
                                    Eigen::Index cols) {
  Image<Scalar> total = Image<Scalar>::Zero(rows, cols);
  for (const auto& k : bank.kernels()) total += kernel_symbol(k, rows, cols).cwiseAbs2();
  return total;
}

/// Largest deviation of F*F from the identity over all frequency bins.
template <typename Scalar>
Scalar verify_uep(const FilterBank<Scalar>& bank, Eigen::Index rows, Eigen::Index cols) {
  return (frame_operator_symbol(bank, rows, cols).array() - Scalar(1)).abs().maxCoeff();
}

}  // namespace vtv

#endif  // VTV_FILTER_BANK_HPP
