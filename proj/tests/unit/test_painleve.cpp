#include <catch_amalgamated.hpp>

#include <cmath>

#include <boost/math/special_functions/zeta.hpp>

#include "isg/painleve.hpp"

using namespace isg;

namespace {

double residual_sup(const PainleveSolution& s, double lo, double hi) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < s.x.size(); ++i) {
    const double xm = 0.5 * (s.x[i] + s.x[i + 1]);
    const double r = std::exp(xm);
    if (r < lo || r > hi) continue;
    // interpolant second derivative at a midpoint, where no ODE value was used
    const auto p = s.at(r);
    const double res = p.ddeta - painleve_rhs(r, p.eta, p.deta);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace

TEST_CASE("painleve solution", "[painleve]") {
  const auto s = solve_eta(1e-3, 8.0);
  CHECK(residual_sup(s, 0.01, 6.0) < 1e-8);
  const auto p5 = s.at(5.0);
  CHECK(std::abs(p5.eta - (1.0 - 2.0 / M_PI * bessel_k0(10.0))) < 1e-8);
  double prev_eta = 0.0, prev_h = 1e300, prev_tail = -1e300;
  for (double lr = std::log(0.01); lr <= std::log(6.0); lr += 0.01) {
    const auto p = s.at(std::exp(lr));
    CHECK(p.eta > prev_eta);
    CHECK(p.eta > 0.0);
    CHECK(p.eta <= 1.0);
    CHECK(p.h0 > 0.0);
    CHECK(p.h0 < prev_h);
    CHECK(p.tail <= 0.0);
    CHECK(p.tail >= prev_tail);
    prev_eta = p.eta;
    prev_h = p.h0;
    prev_tail = p.tail;
  }
  CHECK(s.at(5e-4).extrapolated);
  CHECK_FALSE(s.at(1e-2).extrapolated);
  CHECK_THROWS(solve_eta(1e-4, 8.0));
  CHECK_THROWS(solve_eta(1e-3, 5.0));
  CHECK_THROWS(s.at(9.0));
}

TEST_CASE("painleve seed kernels", "[painleve]") {
  // Against the standard library implementation.
  for (double x : {1e-3, 0.1, 1.0, 7.5, 16.0, 32.0}) {
    CHECK(std::abs(bessel_k0(x) - std::cyl_bessel_k(0.0, x)) <= 1e-14 * std::cyl_bessel_k(0.0, x));
    CHECK(std::abs(bessel_k1(x) - std::cyl_bessel_k(1.0, x)) <= 1e-14 * std::cyl_bessel_k(1.0, x));
  }
}

TEST_CASE("scaling functions", "[painleve]") {
  const auto s = solve_eta(1e-3, 8.0);
  const double m = -1.0;
  std::vector<double> rs;
  for (double r = 0.01; r < 6.0; r *= 1.3) rs.push_back(r);
  const auto rows = scaling_functions(s, m, rs);
  for (const auto& row : rows) {
    const double t = std::tanh(row.h0);
    CHECK(std::abs(row.fs / row.fc - t * t) < 1e-12);
  }
  const double plateau = std::pow(sigma_constant(), -4.0) * std::sqrt(8.0);
  const auto far = scaling_functions(s, m, {6.0});
  CHECK(std::abs(far[0].fc / plateau - 1.0) < 1e-5);
  // A different mass rescales the distance and the prefactor.
  const auto m2 = scaling_functions(s, -2.0, {0.5});
  const auto m1 = scaling_functions(s, -1.0, {1.0});
  CHECK(std::abs(m2[0].fc / m1[0].fc - std::sqrt(2.0)) < 1e-12);
  // Halving the integrator tolerance leaves the tables unchanged.
  const auto s2 = solve_eta(1e-3, 8.0, 5e-14);
  const auto rows2 = scaling_functions(s2, m, rs);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(std::abs(rows2[i].fc / rows[i].fc - 1.0) < 1e-7);
  CHECK_THROWS(scaling_functions(s, 1.0, {1.0}));
  CHECK_THROWS(scaling_functions(s, -1.0, {20.0}));
  const auto csv = scaling_csv(rows);
  CHECK(csv.rfind("r,eta,h0,FC,FS\n", 0) == 0);
}

TEST_CASE("short-distance behaviour", "[painleve]") {
  // The asymptotic exponent of the doubled two-point function is -1/2; log corrections make
  // it visible only at small |m| r.
  const auto s = solve_eta(1e-3, 8.0);
  const auto rows = scaling_functions(s, -1.0, {1e-3 * 1.05, 2e-3});
  const double slope = std::log(rows[1].fc / rows[0].fc) / std::log(rows[1].r / rows[0].r);
  CHECK(slope < -0.45);
  CHECK(slope > -0.52);
}

TEST_CASE("sigma constant", "[painleve]") {
  const double h = 1e-4;
  const double zp = (boost::math::zeta(-1.0 + h) - boost::math::zeta(-1.0 - h)) / (2 * h);
  CHECK(std::abs(zeta_prime_minus_one() - zp) < 1e-8);
  CHECK(std::abs(zeta_prime_minus_one() + 0.16542114370045093) < 1e-15);
  CHECK(std::abs(sigma_constant() - 0.83871) < 1e-4);
  CHECK(sigma_constant() > 0.0);
}
