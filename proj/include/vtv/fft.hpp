#ifndef VTV_FFT_HPP
#define VTV_FFT_HPP

#include <unsupported/Eigen/FFT>

#include "vtv/convolution.hpp"
#include "vtv/image.hpp"

namespace vtv {

/// 2-D DFT built from Eigen's 1-D FFT along rows then columns.
///
/// Holds the 1-D plans, so an instance is a per-worker object; do not share
/// one between threads. The inverse includes the 1/(h*w) normalisation.
template <typename Scalar>
class Fft2 {
 public:
  using Complex = std::complex<Scalar>;
  using Spectrum = OperatorSymbol<Scalar>;

  Spectrum forward(const Image<Scalar>& x) {
    Spectrum s = x.template cast<Complex>();
    transform(s, false);
    return s;
  }

  Spectrum forward(Spectrum s) {
    transform(s, false);
    return s;
  }

  Spectrum inverse(Spectrum s) {
    transform(s, true);
    return s;
  }

  /// Real part of the inverse transform.
  Image<Scalar> inverse_real(Spectrum s) {
    transform(s, true);
    return s.real();
  }

 private:
  using Line = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  void transform(Spectrum& s, bool inverse) {
    Line in;
    Line out;
    for (Eigen::Index k = 0; k < s.rows(); ++k) {
      in = s.row(k).transpose();
      run(out, in, inverse);
      s.row(k) = out.transpose();
    }
    for (Eigen::Index l = 0; l < s.cols(); ++l) {
      in = s.col(l);
      run(out, in, inverse);
      s.col(l) = out;
    }
  }

  void run(Line& out, const Line& in, bool inverse) {
    if (in.size() == 1) {
      out = in;
      return;
    }
    if (inverse) {
      fft_.inv(out, in);
    } else {
      fft_.fwd(out, in);
    }
  }

  Eigen::FFT<Scalar> fft_;
};

/// Transfer function of conv_circular(., kernel) on a rows x cols grid.
///
/// The kernel is embedded with its centre at index (0, 0) and negative
/// offsets wrapped, so multiplying by this symbol in the frequency domain is
/// exactly circular convolution.
template <typename Scalar>
OperatorSymbol<Scalar> kernel_symbol(const Kernel<Scalar>& kernel, Eigen::Index rows,
                                     Eigen::Index cols) {
  if (rows < 1 || cols < 1) throw DimensionMismatch("kernel_symbol: empty grid");
  Image<Scalar> embedded = Image<Scalar>::Zero(rows, cols);
  const Eigen::Index ry = kernel.radius_y();
  const Eigen::Index rx = kernel.radius_x();
  for (Eigen::Index p = -ry; p <= ry; ++p) {
    for (Eigen::Index q = -rx; q <= rx; ++q) {
      embedded(detail::wrap(p, rows), detail::wrap(q, cols)) += kernel.at(p, q);
    }
  }
  Fft2<Scalar> fft;
  return fft.forward(embedded);
}

inline constexpr double kDefaultSingularFloor = 1e-12;

/// Smallest |bin| of a symbol.
template <typename Scalar>
Scalar min_modulus(const OperatorSymbol<Scalar>& symbol) {
  return symbol.cwiseAbs().minCoeff();
}

/// Solves Op(u) = numerator for the circular operator whose symbol is
/// `denominator`: u = Re IFFT(FFT(numerator) ./ denominator).
template <typename Scalar>
Image<Scalar> solve_diagonal(const Image<Scalar>& numerator,
                             const OperatorSymbol<Scalar>& denominator, Fft2<Scalar>& fft,
                             Scalar floor = Scalar(kDefaultSingularFloor)) {
  require_same_size(numerator, denominator, "solve_diagonal");
  const Scalar smallest = min_modulus(denominator);
  if (!(smallest >= floor)) {
    throw SingularSymbol("solve_diagonal: denominator bin of modulus " + std::to_string(smallest) +
                         " is below the floor " + std::to_string(floor));
  }
  OperatorSymbol<Scalar> spectrum = fft.forward(numerator);
  spectrum.array() /= denominator.array();
  return fft.inverse_real(std::move(spectrum));
}

template <typename Scalar>
Image<Scalar> solve_diagonal(const Image<Scalar>& numerator,
                             const OperatorSymbol<Scalar>& denominator,
                             Scalar floor = Scalar(kDefaultSingularFloor)) {
  Fft2<Scalar> fft;
  return solve_diagonal(numerator, denominator, fft, floor);
}

/// Applies a circular operator given by its symbol.
template <typename Scalar>
Image<Scalar> apply_symbol(const Image<Scalar>& x, const OperatorSymbol<Scalar>& symbol,
                           Fft2<Scalar>& fft) {
  require_same_size(x, symbol, "apply_symbol");
  OperatorSymbol<Scalar> spectrum = fft.forward(x);
  spectrum.array() *= symbol.array();
  return fft.inverse_real(std::move(spectrum));
}

}  // namespace vtv

#endif  // VTV_FFT_HPP
