#include "vtv/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vtv/diff_ops.hpp"
#include "vtv/solver.hpp"

namespace vtv {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::Index pick_size(std::mt19937_64& rng, Eigen::Index lo, Eigen::Index hi) {
  return lo + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

Kerneld random_kernel(std::mt19937_64& rng, Eigen::Index r) {
  Kerneld::Taps t(2 * r + 1, 2 * r + 1);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng, -1.0, 1.0);
  return Kerneld(std::move(t));
}

double relative_gap(double lhs, double rhs) {
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

CheckResult finish(std::string name, double worst, double threshold) {
  return {std::move(name), worst <= threshold, worst, threshold};
}

}  // namespace

Imaged random_image(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo,
                    double hi) {
  std::mt19937_64 rng(seed);
  Imaged u(rows, cols);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = uniform(rng, lo, hi);
  return u;
}

CheckResult check_uep(const FilterBankd& bank, const std::vector<Eigen::Index>& sizes) {
  double worst = 0.0;
  for (auto n : sizes) worst = std::max(worst, verify_uep(bank, n, n));
  // strict: deviation must be below 1e-12
  return {"uep identity", worst < 1e-12, worst, 1e-12};
}

CheckResult check_conv_adjoint(int trials, Eigen::Index min_size, Eigen::Index max_size) {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto h = pick_size(rng, min_size, max_size);
    const auto w = pick_size(rng, min_size, max_size);
    const Kerneld k = random_kernel(rng, 1 + static_cast<Eigen::Index>(rng() % 2));
    const Imaged u = random_image(h, w, rng());
    const Imaged v = random_image(h, w, rng());
    worst = std::max(worst, relative_gap(inner(conv_circular(u, k), v), inner(u, conv_adjoint(v, k))));
  }
  return finish("conv adjoint dot-test", worst, 1e-10);
}

CheckResult check_frame_adjoint(const FilterBankd& bank, int trials, Eigen::Index min_size,
                                Eigen::Index max_size) {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto h = pick_size(rng, min_size, max_size);
    const auto w = pick_size(rng, min_size, max_size);
    const Imaged u = random_image(h, w, rng());
    FeatureStack<double> g;
    for (std::size_t i = 0; i < bank.size(); ++i) g.channels.push_back(random_image(h, w, rng()));
    worst = std::max(worst, relative_gap(inner(analyze(u, bank), g), inner(u, synthesize_adjoint(g, bank))));
  }
  return finish("analysis/synthesis adjoint dot-test", worst, 1e-10);
}

CheckResult check_grad_adjoint(int trials, Eigen::Index min_size, Eigen::Index max_size) {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto h = pick_size(rng, min_size, max_size);
    const auto w = pick_size(rng, min_size, max_size);
    const Imaged u = random_image(h, w, rng());
    const Gradient<double> p{random_image(h, w, rng()), random_image(h, w, rng())};
    worst = std::max(worst, relative_gap(inner(grad(u), p), inner(u, grad_adjoint(p))));
  }
  return finish("grad adjoint dot-test", worst, 1e-10);
}

CheckResult check_perfect_reconstruction(const FilterBankd& bank, int trials, Eigen::Index size) {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Imaged u = random_image(size, size, rng());
    worst = std::max(worst, (synthesize_adjoint(analyze(u, bank), bank) - u).cwiseAbs().maxCoeff());
  }
  return {"perfect reconstruction", worst < 1e-12, worst, 1e-12};
}

CheckResult check_prox(int trials) {
  std::mt19937_64 rng(505);
  constexpr double step = 1e-4;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double v = uniform(rng, -5.0, 5.0);
    const double thr = uniform(rng, 0.0, 3.0);
    const auto lo = static_cast<long>(std::floor(std::min(0.0, v) / step)) - 2;
    const auto hi = static_cast<long>(std::ceil(std::max(0.0, v) / step)) + 2;
    double best = 0.0;
    double best_cost = INFINITY;
    for (long k = lo; k <= hi; ++k) {
      const double d = static_cast<double>(k) * step;
      const double cost = thr * std::abs(d) + 0.5 * (d - v) * (d - v);
      if (cost < best_cost) {
        best_cost = cost;
        best = d;
      }
    }
    worst = std::max(worst, std::abs(best - soft_threshold(v, thr)));
  }
  return finish("shrinkage vs grid-search prox", worst, 2e-4);
}

CheckResult check_rof_reduction(Eigen::Index size, int iterations) {
  const Imaged f = random_image(size, size, 606, 0.0, 255.0);
  const double lambda = 10.0;
  const double gamma = 1.0;
  SolverConfig cfg = SolverConfig::split(1, lambda, lambda, gamma, gamma, 1e-12, UUpdate::Full);
  SplitBregman<double> solver(f, DegradationOpd::identity(), FilterBankd::identity(), cfg);

  // Classical anisotropic split Bregman ROF: (I + gamma grad* grad) u = f + gamma grad*(d - b).
  const OperatorSymbold denom =
      (1.0 + gamma * kernel_symbol(negative_laplacian_kernel<double>(), size, size).real().array())
          .matrix()
          .cast<std::complex<double>>();
  Gradient<double> d = Gradient<double>::zero(size, size);
  Gradient<double> b = d;

  double worst = 0.0;
  for (int j = 0; j < iterations; ++j) {
    const Imaged rof_u = solve_diagonal<double>(f + gamma * grad_adjoint(d - b), denom);
    Gradient<double> v = grad(rof_u) + b;
    d = shrink(v, lambda / gamma);
    b = v - d;

    solver.step();
    const double scale = 1.0 + rof_u.cwiseAbs().maxCoeff();
    worst = std::max(worst, (solver.state().u - rof_u).cwiseAbs().maxCoeff() / scale);
  }
  return finish("ROF reduction (m = 1, identity kernel)", worst, 1e-10);
}

std::vector<CheckResult> run_selftest(const FilterBankd& bank, Eigen::Index min_size) {
  const Eigen::Index max_size = std::max<Eigen::Index>(min_size, 32);
  std::vector<CheckResult> out;
  out.push_back(check_uep(bank, {min_size, 16, 64}));
  out.push_back(check_conv_adjoint(100, min_size, max_size));
  out.push_back(check_frame_adjoint(bank, 100, min_size, max_size));
  out.push_back(check_grad_adjoint(100, min_size, max_size));
  out.push_back(check_perfect_reconstruction(bank, 20, std::max<Eigen::Index>(min_size, 16)));
  out.push_back(check_prox(1000));
  out.push_back(check_rof_reduction(std::max<Eigen::Index>(min_size, 16), 20));
  return out;
}

}  // namespace vtv
