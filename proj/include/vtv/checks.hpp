#ifndef VTV_CHECKS_HPP
#define VTV_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vtv/filter_bank.hpp"

namespace vtv {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      ///< worst observed error
  double threshold = 0.0;  ///< pass iff value <= threshold (or < for strict checks)
};

/// Uniform [lo, hi) image from a seeded mt19937_64.
Imaged random_image(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = 0.0,
                    double hi = 1.0);

// Invariant checks run by `vtv-restore selftest`. Each draws its own seeded
// random data, so results are reproducible.

CheckResult check_uep(const FilterBankd& bank, const std::vector<Eigen::Index>& sizes);
CheckResult check_conv_adjoint(int trials, Eigen::Index min_size, Eigen::Index max_size);
CheckResult check_frame_adjoint(const FilterBankd& bank, int trials, Eigen::Index min_size,
                                Eigen::Index max_size);
CheckResult check_grad_adjoint(int trials, Eigen::Index min_size, Eigen::Index max_size);
CheckResult check_perfect_reconstruction(const FilterBankd& bank, int trials, Eigen::Index size);
CheckResult check_prox(int trials);
CheckResult check_rof_reduction(Eigen::Index size, int iterations);

/// The full selftest battery. `bank` is the bank under test (normally
/// bspline_bank()); adjoint checks start at `min_size`.
std::vector<CheckResult> run_selftest(const FilterBankd& bank, Eigen::Index min_size = 4);

}  // namespace vtv

#endif  // VTV_CHECKS_HPP
