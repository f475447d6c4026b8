#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vtv/degrade.hpp"

using vtv::Imaged;

TEST_CASE("sigma = 0 returns the input unchanged") {
  std::mt19937_64 rng(41);
  const Imaged u = oracle::random_image(9, 9, rng, 0, 255);
  CHECK(vtv::gaussian_noise(u, {0.0, 7}) == u);
  CHECK_THROWS_AS(vtv::gaussian_noise(u, {-1.0, 7}), vtv::ConfigError);
}

TEST_CASE("noise statistics over 10^6 draws") {
  const Imaged zero = Imaged::Zero(1000, 1000);
  const Imaged n = vtv::gaussian_noise(zero, {25.5, 123});
  const double mean = n.mean();
  const double sd = std::sqrt((n.array() - mean).square().sum() / double(n.size() - 1));
  CHECK(std::abs(sd - 25.5) / 25.5 < 0.005);
  // standard error of the mean is 25.5 / 1000
  CHECK(std::abs(mean) < 4 * 0.0255);
  // fraction within one sigma of a normal is 0.6827
  const double within = (n.array().abs() <= 25.5).cast<double>().mean();
  CHECK(within == doctest::Approx(0.6827).epsilon(0.005));
}

TEST_CASE("noise is reproducible per seed and differs across seeds") {
  const Imaged zero = Imaged::Zero(16, 16);
  CHECK(vtv::gaussian_noise(zero, {1.0, 5}) == vtv::gaussian_noise(zero, {1.0, 5}));
  CHECK(vtv::gaussian_noise(zero, {1.0, 5}) != vtv::gaussian_noise(zero, {1.0, 6}));
}

TEST_CASE("noise draws follow row-major order") {
  // A 1 x 8 and an 8 x 1 image see the same stream.
  const Imaged a = vtv::gaussian_noise(Imaged(Imaged::Zero(1, 8)), {2.0, 9});
  const Imaged b = vtv::gaussian_noise(Imaged(Imaged::Zero(8, 1)), {2.0, 9});
  for (int i = 0; i < 8; ++i) CHECK(a(0, i) == b(i, 0));
  vtv::NormalSource src(9);
  CHECK(a(0, 0) == 2.0 * src());
}

TEST_CASE("motion blur kernel") {
  const auto k = vtv::motion_blur_kernel<double>(9);
  CHECK(k.taps().rows() == 1);
  CHECK(k.taps().cols() == 9);
  CHECK(k.tap_sum() == doctest::Approx(1.0).epsilon(1e-15));
  for (int q = -4; q <= 4; ++q) CHECK(k.at(0, q) == doctest::Approx(1.0 / 9.0));
  CHECK_THROWS_AS(vtv::motion_blur_kernel<double>(9, 30.0), vtv::UnsupportedAngle);
  CHECK_THROWS_AS(vtv::motion_blur_kernel<double>(8), vtv::ConfigError);
  CHECK_THROWS_AS(vtv::motion_blur_kernel<double>(0), vtv::ConfigError);
  CHECK(vtv::motion_blur_kernel<double>(1) == vtv::Kerneld::identity());
}

TEST_CASE("blurring an impulse spreads it over nine columns") {
  const Imaged delta = vtv::impulse<double>(5, 16);
  const auto op = vtv::DegradationOpd::blur(vtv::motion_blur_kernel<double>(9));
  const Imaged b = op.apply(delta);
  for (int l = 0; l < 16; ++l) {
    const int q = l <= 4 ? l : l - 16;
    CHECK(b(0, l) == doctest::Approx(std::abs(q) <= 4 ? 1.0 / 9.0 : 0.0));
  }
  CHECK(b.bottomRows(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(b.sum() == doctest::Approx(1.0));
}

TEST_CASE("degradation operator adjoint and symbol") {
  std::mt19937_64 rng(42);
  const auto op = vtv::DegradationOpd::blur(vtv::motion_blur_kernel<double>(5));
  const Imaged u = oracle::random_image(10, 12, rng), v = oracle::random_image(10, 12, rng);
  CHECK(oracle::dot(op.apply(u), v) == doctest::Approx(oracle::dot(u, op.apply_adjoint(v))).epsilon(1e-12));
  const Imaged n = op.normal_symbol(10, 12);
  CHECK(n(0, 0) == doctest::Approx(1.0));
  CHECK((n - oracle::kernel_response(op.psf(), 10, 12).cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-12);
  const auto id = vtv::DegradationOpd::identity();
  CHECK(id.apply(u) == u);
  CHECK((id.normal_symbol(4, 4).array() == 1.0).all());
}

TEST_CASE("apply_degradation composes blur then noise") {
  std::mt19937_64 rng(43);
  const Imaged u = oracle::random_image(8, 8, rng, 0, 255);
  const auto op = vtv::DegradationOpd::blur(vtv::motion_blur_kernel<double>(3));
  const Imaged f = vtv::apply_degradation(u, op, vtv::NoiseSpec{2.0, 77});
  CHECK(f == vtv::gaussian_noise(op.apply(u), vtv::NoiseSpec{2.0, 77}));
}

TEST_CASE("synthetic scene is deterministic, in range and has edges") {
  const Imaged a = vtv::synthetic_scene<double>(), b = vtv::synthetic_scene<double>();
  CHECK(a.rows() == 256);
  CHECK(a.cols() == 256);
  CHECK(a == b);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() <= 255.0);
  CHECK(a.maxCoeff() - a.minCoeff() > 100.0);
}
