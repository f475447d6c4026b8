#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "vtv/degrade.hpp"
#include "vtv/metrics.hpp"
#include "vtv/solver.hpp"

using vtv::DegradationOpd;
using vtv::FilterBankd;
using vtv::Imaged;
using vtv::SolverConfig;
using vtv::SplitBregman;
using vtv::UUpdate;

namespace {

double max_abs(const Imaged& a) { return a.cwiseAbs().maxCoeff(); }

Eigen::VectorXd flat(const Imaged& u) { return Eigen::Map<const Eigen::VectorXd>(u.data(), u.size()); }

Imaged unflat(const Eigen::VectorXd& v, Eigen::Index h, Eigen::Index w) {
  Imaged out(h, w);
  Eigen::Map<Eigen::VectorXd>(out.data(), v.size()) = v;
  return out;
}

// Energy written out with the loop oracles.
double energy_oracle(const Imaged& u, const Imaged& f, const vtv::Kerneld& psf, const FilterBankd& bank,
                     const std::vector<double>& lambda) {
  double reg = 0.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    Imaged gx, gy;
    oracle::grad(oracle::conv(u, bank.kernel(i)), gx, gy);
    reg += lambda[i] * (gx.cwiseAbs().sum() + gy.cwiseAbs().sum());
  }
  return reg + 0.5 * (oracle::conv(u, psf) - f).squaredNorm();
}

// Puts random d, b into the solver so the numerator is non-trivial.
void randomize_split(SplitBregman<double>& s, std::mt19937_64& rng) {
  auto& st = s.mutable_state();
  for (std::size_t i = 0; i < st.d.size(); ++i) {
    const auto h = st.u.rows(), w = st.u.cols();
    st.d[i] = {oracle::random_image(h, w, rng, -5, 5), oracle::random_image(h, w, rng, -5, 5)};
    st.b[i] = {oracle::random_image(h, w, rng, -5, 5), oracle::random_image(h, w, rng, -5, 5)};
  }
}

// A*(d - b) pieces assembled with dense matrices and solved by LU.
struct DenseSystem {
  Eigen::MatrixXd full, reduced;
  Eigen::VectorXd rhs;
};

DenseSystem dense_system(const SplitBregman<double>& s, const vtv::Kerneld& psf) {
  const auto h = s.observation().rows(), w = s.observation().cols();
  const FilterBankd& bank = s.bank();
  const auto& cfg = s.config();
  const Eigen::MatrixXd a = oracle::dense([&](const Imaged& x) { return oracle::conv(x, psf); }, h, w);
  const Eigen::MatrixXd d = oracle::dense_grad(h, w);
  DenseSystem sys;
  sys.full = a.transpose() * a;
  sys.reduced = sys.full + cfg.gamma[0] * d.transpose() * d;
  sys.rhs = a.transpose() * flat(s.observation());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const Eigen::MatrixXd fi =
        oracle::dense([&](const Imaged& x) { return oracle::conv(x, bank.kernel(i)); }, h, w);
    sys.full += cfg.gamma[i] * fi.transpose() * d.transpose() * d * fi;
    const auto& st = s.state();
    Eigen::VectorXd db(2 * h * w);
    db << flat(st.d[i].x - st.b[i].x), flat(st.d[i].y - st.b[i].y);
    sys.rhs += cfg.gamma[i] * fi.transpose() * d.transpose() * db;
  }
  return sys;
}

}  // namespace

TEST_CASE("energy: zero at the data for flat images, fidelity only for lambda = 0") {
  const FilterBankd bank = vtv::bspline_bank();
  const Imaged f = Imaged::Constant(6, 6, 10.0);
  const auto cfg = SolverConfig::split(9, 1.0, 1.0, 1.0, 1.0, 1e-3, UUpdate::Full);
  CHECK(vtv::energy(f, f, DegradationOpd::identity(), bank, cfg) == 0.0);
  std::mt19937_64 rng(51);
  const Imaged u = oracle::random_image(6, 6, rng, 0, 10);
  auto flat_cfg = cfg;
  flat_cfg.lambda.assign(9, 0.0);
  CHECK(vtv::energy(u, f, DegradationOpd::identity(), bank, flat_cfg) ==
        doctest::Approx(0.5 * (u - f).squaredNorm()));
}

TEST_CASE("energy matches the loop oracle with blur") {
  const FilterBankd bank = vtv::bspline_bank();
  std::mt19937_64 rng(52);
  const Imaged u = oracle::random_image(7, 9, rng, 0, 255), f = oracle::random_image(7, 9, rng, 0, 255);
  const auto psf = vtv::motion_blur_kernel<double>(3);
  const auto cfg = SolverConfig::split(9, 0.7, 0.3, 1.0, 1.0, 1e-3, UUpdate::Full);
  CHECK(vtv::energy(u, f, DegradationOpd::blur(psf), bank, cfg) ==
        doctest::Approx(energy_oracle(u, f, psf, bank, cfg.lambda)).epsilon(1e-12));
}

TEST_CASE("full u-update equals a dense linear solve") {
  std::mt19937_64 rng(53);
  const auto psf = vtv::motion_blur_kernel<double>(3);
  const Imaged f = oracle::random_image(6, 7, rng, 0, 255);
  auto cfg = SolverConfig::split(9, 0.1, 0.1, 0.4, 0.1, 1e-3, UUpdate::Full);
  cfg.gamma[4] = 0.9;  // full variant allows any positive gamma
  SplitBregman<double> s(f, DegradationOpd::blur(psf), vtv::bspline_bank(), cfg);
  randomize_split(s, rng);
  const DenseSystem sys = dense_system(s, psf);
  const Imaged want = unflat(sys.full.lu().solve(sys.rhs), 6, 7);
  const Imaged got = s.u_update_full();
  CHECK(max_abs(got - want) / max_abs(want) < 1e-10);
  CHECK(s.kkt_residual(got) < 1e-10);
}

TEST_CASE("reduced u-update equals a dense linear solve of its own system") {
  std::mt19937_64 rng(54);
  const auto psf = vtv::motion_blur_kernel<double>(3);
  const Imaged f = oracle::random_image(5, 8, rng, 0, 255);
  const auto cfg = SolverConfig::split(9, 0.1, 0.1, 0.7, 0.2, 1e-3, UUpdate::Reduced);
  SplitBregman<double> s(f, DegradationOpd::blur(psf), vtv::bspline_bank(), cfg);
  randomize_split(s, rng);
  const DenseSystem sys = dense_system(s, psf);
  const Imaged want = unflat(sys.reduced.lu().solve(sys.rhs), 5, 8);
  const Imaged got = s.u_update_reduced();
  CHECK(max_abs(got - want) / max_abs(want) < 1e-10);
  CHECK(s.reduced_residual(got) < 1e-10);
}

TEST_CASE("full and reduced u-updates agree when all gamma are equal") {
  std::mt19937_64 rng(55);
  const Imaged f = oracle::random_image(16, 16, rng, 0, 255);
  const auto cfg = SolverConfig::split(9, 1.0, 1.0, 2.0, 2.0, 1e-3, UUpdate::Full);
  SplitBregman<double> s(f, DegradationOpd::blur(vtv::motion_blur_kernel<double>(5)), vtv::bspline_bank(), cfg);
  randomize_split(s, rng);
  const Imaged full = s.u_update_full();
  const Imaged reduced = s.u_update_reduced();
  CHECK(max_abs(full - reduced) / max_abs(full) < 1e-10);
  // and along whole trajectories
  auto cfg_r = cfg;
  cfg_r.u_update = UUpdate::Reduced;
  SplitBregman<double> a(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg);
  SplitBregman<double> b(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg_r);
  double worst = 0.0;
  for (int j = 0; j < 15; ++j) {
    a.step();
    b.step();
    worst = std::max(worst, max_abs(a.state().u - b.state().u) / max_abs(a.state().u));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("reduced variant refuses non-uniform detail gamma") {
  auto cfg = SolverConfig::denoise_reduced();
  cfg.gamma[3] = 4.0;
  const Imaged f = Imaged::Ones(8, 8);
  CHECK_THROWS_AS(SplitBregman<double>(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg),
                  vtv::ConfigError);
  cfg.u_update = UUpdate::Full;
  SplitBregman<double> s(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg);
  CHECK_THROWS_AS(s.u_update_reduced(), vtv::ConfigError);
}

TEST_CASE("config validation") {
  const Imaged f = Imaged::Ones(8, 8);
  auto bad = SolverConfig::denoise_reduced();
  bad.lambda.pop_back();
  CHECK_THROWS_AS(vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), bad), vtv::ConfigError);
  bad = SolverConfig::denoise_reduced();
  bad.gamma[2] = 0.0;
  CHECK_THROWS_AS(vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), bad), vtv::ConfigError);
  bad = SolverConfig::denoise_reduced();
  bad.lambda[0] = -1.0;
  CHECK_THROWS_AS(vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), bad), vtv::ConfigError);
}

TEST_CASE("constant observation is a fixed point") {
  const Imaged f = Imaged::Constant(12, 10, 77.0);
  for (auto cfg : {SolverConfig::denoise_reduced(), SolverConfig::denoise_full()}) {
    const auto r = vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(max_abs(r.u.array() - 77.0) < 1e-9);
  }
  // with a normalised blur too
  const auto r = vtv::solve(f, DegradationOpd::blur(vtv::motion_blur_kernel<double>(9)), vtv::bspline_bank(),
                            SolverConfig::deblur_full());
  CHECK(r.iterations <= 2);
  CHECK(max_abs(r.u.array() - 77.0) < 1e-9);
}

TEST_CASE("m = 1 identity bank reproduces classical split Bregman ROF") {
  // Independent loop: dense Cholesky u-solve, explicit shrinkage.
  std::mt19937_64 rng(56);
  const int h = 10, w = 9;
  const Imaged f = oracle::random_image(h, w, rng, 0, 255);
  const double lambda = 15.0, gamma = 3.0;
  const Eigen::MatrixXd d = oracle::dense_grad(h, w);
  const Eigen::LLT<Eigen::MatrixXd> chol(Eigen::MatrixXd::Identity(h * w, h * w) + gamma * d.transpose() * d);
  Eigen::VectorXd dd = Eigen::VectorXd::Zero(2 * h * w), bb = dd;
  const Eigen::VectorXd fv = flat(f);

  SplitBregman<double> s(f, DegradationOpd::identity(), FilterBankd::identity(),
                         SolverConfig::split(1, lambda, lambda, gamma, gamma, 1e-12, UUpdate::Full));
  double worst = 0.0;
  for (int j = 0; j < 25; ++j) {
    const Eigen::VectorXd u = chol.solve(fv + gamma * d.transpose() * (dd - bb));
    const Eigen::VectorXd v = d * u + bb;
    const double t = lambda / gamma;
    dd = v.unaryExpr([t](double x) { return x > t ? x - t : (x < -t ? x + t : 0.0); });
    bb = v - dd;
    s.step();
    worst = std::max(worst, (flat(s.state().u) - u).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("every iterate satisfies the u-subproblem and d-subproblem optimality") {
  const Imaged clean = vtv::synthetic_scene<double>(32, 32);
  const Imaged f = vtv::gaussian_noise(clean, {20.0, 3});
  const auto cfg = SolverConfig::split(9, 2.0, 1.5, 12.0, 4.5, 1e-6, UUpdate::Full);
  SplitBregman<double> s(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg);
  std::mt19937_64 rng(57);
  for (int j = 0; j < 10; ++j) {
    const Imaged u = s.u_update_full();
    CHECK(s.kkt_residual(u) < 1e-8);
    s.accept(u);
    // d_i = argmin lambda_i |d| + gamma_i/2 (d - v)^2 with v = d_i + b_i (new b)
    for (int sample = 0; sample < 20; ++sample) {
      const std::size_t i = rng() % 9;
      const auto k = Eigen::Index(rng() % 32), l = Eigen::Index(rng() % 32);
      const double v = s.state().d[i].x(k, l) + s.state().b[i].x(k, l);
      const double want = oracle::prox_grid(v, cfg.lambda[i] / cfg.gamma[i]);
      CHECK(std::abs(s.state().d[i].x(k, l) - want) <= 1e-4);
    }
  }
}

TEST_CASE("split Bregman reaches the minimum energy on an 8 x 8 ROF problem") {
  Imaged f(8, 8);
  std::mt19937_64 rng(58);
  for (int k = 0; k < 8; ++k)
    for (int l = 0; l < 8; ++l) f(k, l) = (l < 4 ? 60.0 : 180.0) + (k >= 5 ? 40.0 : 0.0);
  f += oracle::random_image(8, 8, rng, -25, 25);
  const double lambda = 20.0;
  auto cfg = SolverConfig::split(1, lambda, lambda, 10.0, 10.0, 1e-13, UUpdate::Full);
  cfg.max_iter = 20000;
  const auto r = vtv::solve(f, DegradationOpd::identity(), FilterBankd::identity(), cfg);
  const Imaged ref = oracle::smoothed_tv_minimizer(f, lambda);
  const Eigen::MatrixXd d = oracle::dense_grad(8, 8);
  const double e_sb = oracle::rof_energy(flat(r.u), flat(f), d, lambda);
  const double e_ref = oracle::rof_energy(flat(ref), flat(f), d, lambda);
  MESSAGE("split Bregman " << e_sb << " vs smoothed-TV Newton " << e_ref << " after " << r.iterations);
  CHECK(std::abs(e_sb - e_ref) / e_ref <= 0.01);
}

TEST_CASE("denoising presets converge and improve PSNR") {
  const Imaged clean = vtv::synthetic_scene<double>(128, 128);
  const Imaged f = vtv::gaussian_noise(clean, {25.5, 1});
  for (auto cfg : {SolverConfig::denoise_reduced(), SolverConfig::denoise_full()}) {
    const auto r = vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg);
    CHECK(r.converged);
    CHECK(r.iterations <= 200);
    CHECK(r.trace.back() <= cfg.tol);
    if (cfg.u_update == UUpdate::Reduced) CHECK(vtv::psnr(clean, r.u) > vtv::psnr(clean, f) + 3.0);
  }
}

TEST_CASE("energy decreases overall along a run") {
  const Imaged clean = vtv::synthetic_scene<double>(64, 64);
  const Imaged f = vtv::gaussian_noise(clean, {25.5, 2});
  auto cfg = SolverConfig::denoise_full();
  cfg.record_trace = true;
  const auto r = vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), cfg);
  REQUIRE(r.energy_trace.size() == r.trace.size());
  const double e0 = vtv::energy(f, f, DegradationOpd::identity(), vtv::bspline_bank(), cfg);
  CHECK(r.energy_trace.back() < e0);
  // late iterates stay within 0.1% of the best seen
  const double best = *std::min_element(r.energy_trace.begin(), r.energy_trace.end());
  CHECK(r.energy_trace.back() <= best * 1.001);
}

TEST_CASE("solves are bitwise deterministic") {
  const Imaged f = vtv::gaussian_noise(vtv::synthetic_scene<double>(48, 48), {25.5, 4});
  const auto a = vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), SolverConfig::denoise_reduced());
  const auto b = vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), SolverConfig::denoise_reduced());
  CHECK(a.u == b.u);
  CHECK(a.trace == b.trace);
}

TEST_CASE("non-finite input and ill-posed operators are reported") {
  Imaged f = Imaged::Ones(8, 8);
  f(2, 3) = std::nan("");
  CHECK_THROWS_AS(vtv::solve(f, DegradationOpd::identity(), vtv::bspline_bank(), SolverConfig::denoise_reduced()),
                  vtv::NonFinite);
  // zero-mean PSF: denominator vanishes at DC
  vtv::Kerneld::Taps t(1, 3);
  t << 1, 0, -1;
  const Imaged g = Imaged::Ones(8, 8);
  CHECK_THROWS_AS(vtv::solve(g, DegradationOpd::blur(vtv::Kerneld(t)), vtv::bspline_bank(),
                             SolverConfig::deblur_full()),
                  vtv::SingularSymbol);
}

TEST_CASE("literal deblurring gamma order makes the reduced step unstable") {
  // gamma_1 = 0.1 < gamma_rest = 0.4: the reduced step under-weights the
  // detail channels and the iteration amplifies high frequencies.
  const Imaged clean = vtv::synthetic_scene<double>(64, 64);
  const auto op = DegradationOpd::blur(vtv::motion_blur_kernel<double>(9));
  const Imaged f = vtv::apply_degradation(clean, op, {5.0, 1});
  auto literal = SolverConfig::split(9, 0.004, 0.002, 0.1, 0.4, 5e-4, UUpdate::Reduced);
  bool unstable = false;
  try {
    const auto r = vtv::solve(f, op, vtv::bspline_bank(), literal);
    unstable = !r.converged || vtv::psnr(clean, r.u) < vtv::psnr(clean, f);
  } catch (const vtv::NonFinite&) {
    unstable = true;
  }
  CHECK(unstable);
  const auto r = vtv::solve(f, op, vtv::bspline_bank(), SolverConfig::deblur_reduced());
  CHECK(r.converged);
  CHECK(vtv::psnr(clean, r.u) > vtv::psnr(clean, f));
}

TEST_CASE("trace CSV layout") {
  vtv::SolveResult<double> r;
  r.trace = {0.5, 0.25};
  r.energy_trace = {10.0};
  std::ostringstream out;
  vtv::write_trace_csv(out, r);
  CHECK(out.str() == "iter,rel_err,energy\n1,0.5,10\n2,0.25,nan\n");
}
