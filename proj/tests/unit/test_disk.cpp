#include <catch_amalgamated.hpp>

#include <random>

#include "isg/disk.hpp"

using namespace isg;
using Catch::Approx;

namespace {
cplx random_bulk(std::mt19937_64& rng, double rmax = 0.95) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(rmax * std::sqrt(u(rng)), 2.0 * kPi * u(rng));
}
}  // namespace

TEST_CASE("green closed form values", "[disk]") {
  CHECK(green(0.0, 0.5) == Approx(std::log(2.0) / (2.0 * kPi)).epsilon(1e-14));
  CHECK(green(0.0, 0.5) == Approx(0.11031862).margin(1e-8));
  CHECK(green(0.0, 0.999) == Approx(1.5924e-4).epsilon(1e-3));
  CHECK_THROWS_AS(green(0.3, 0.3), domain_error);
  CHECK_THROWS_AS(green(1.0, 0.3), domain_error);
}

TEST_CASE("green symmetry and positivity", "[disk]") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const cplx x = random_bulk(rng), y = random_bulk(rng);
    CHECK(green(x, y) == green(y, x));
  }
  for (int i = 0; i < 1000; ++i) CHECK(green(random_bulk(rng), random_bulk(rng)) > 0.0);
}

TEST_CASE("green minus log singularity tends to harmonic part", "[disk]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const cplx x = random_bulk(rng, 0.9);
    const cplx y = x + std::polar(1e-6, 1.0 + i);
    const double reg = green(x, y) + std::log(std::abs(x - y)) / (2.0 * kPi);
    CHECK(reg == Approx(harmonic_part(x, x)).margin(1e-6));
  }
}

TEST_CASE("harmonic part", "[disk]") {
  CHECK(harmonic_part(0.0, cplx(0.3, 0.4)) == 0.0);
  const cplx a(0.3, -0.2);
  CHECK(harmonic_part(a, a) == Approx(std::log(1.0 - std::norm(a)) / (2.0 * kPi)).epsilon(1e-14));
  CHECK(std::exp(2.0 * kPi * harmonic_part(a, a)) == Approx(conformal_radius(a)).epsilon(1e-14));
  const cplx b(-0.5, 0.1);
  CHECK(harmonic_part(a, b) == harmonic_part(b, a));
  CHECK_NOTHROW(harmonic_part(cplx(1.0, 0.0), 0.5));
}

TEST_CASE("Wirtinger derivatives of green match finite differences", "[disk]") {
  const cplx x(0.2, 0.1), y(-0.3, 0.4);
  const double h = 1e-6;
  const double gx = (green(x + h, y) - green(x - h, y)) / (2 * h);
  const double gy = (green(x + cplx(0, h), y) - green(x - cplx(0, h), y)) / (2 * h);
  const cplx dz = 0.5 * cplx(gx, -gy);
  CHECK(std::abs(dz - green_dz(x, y)) < 1e-8);
  CHECK(std::abs(std::conj(dz) - green_dzbar(x, y)) < 1e-8);
  // d_y of green_dz by finite differences in y.
  const cplx ex = (green_dz(x, y + h) - green_dz(x, y - h)) / (2 * h);
  const cplx ey = (green_dz(x, y + cplx(0, h)) - green_dz(x, y - cplx(0, h))) / (2 * h);
  CHECK(std::abs(0.5 * (ex - kI * ey) - green_dz_dw(x, y)) < 1e-6);
  CHECK(std::abs(0.5 * (ex + kI * ey) - green_dz_dwbar(x, y)) < 1e-6);
  auto gdiag = [](const cplx& z) { return harmonic_part(z, z); };
  const double dx = (gdiag(x + h) - gdiag(x - h)) / (2 * h);
  const double dy = (gdiag(x + cplx(0, h)) - gdiag(x - cplx(0, h))) / (2 * h);
  CHECK(std::abs(0.5 * cplx(dx, -dy) - diag_harmonic_dz(x)) < 1e-8);
}

TEST_CASE("mobius map to zero", "[disk]") {
  const cplx a(0.4, -0.3);
  const auto phi = mobius_to_zero(a);
  CHECK(std::abs(phi(a)) == 0.0);
  for (int k = 0; k < 32; ++k) CHECK(std::abs(std::abs(phi(std::polar(1.0, 2 * kPi * k / 32))) - 1.0) < 1e-14);
  CHECK(std::abs(phi.derivative(a) - 1.0 / (1.0 - std::norm(a))) < 1e-14);
  const cplx z(0.1, 0.2);
  CHECK(std::abs(phi.inverse(phi(z)) - z) < 1e-15);
  const double h = 1e-6;
  CHECK(std::abs((phi(z + h) - phi(z - h)) / (2 * h) - phi.derivative(z)) < 1e-8);
  CHECK_THROWS_AS(mobius_to_zero(cplx(1.0, 0.0)), domain_error);
}

TEST_CASE("boundary points and tangents", "[disk]") {
  CHECK(std::abs(boundary_tangent(BoundaryPoint(0.0)) - kI) < 1e-15);
  CHECK(std::abs(boundary_tangent(BoundaryPoint(kPi / 2)) + 1.0) < 1e-15);
  for (int k = 0; k < 50; ++k) CHECK(std::abs(std::abs(boundary_tangent(BoundaryPoint(0.37 * k))) - 1.0) < 1e-15);
  const BoundaryPoint p(-kPi / 2);
  CHECK(p.theta == Approx(1.5 * kPi));
  CHECK(BoundaryPoint(2 * kPi).theta == 0.0);
}
