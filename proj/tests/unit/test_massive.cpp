#include <catch_amalgamated.hpp>

#include <random>

#include "isg/massive.hpp"

using namespace isg;

namespace {

const MassProfile kBump(1.0, cplx{-0.2, -0.3}, 0.35);
const std::vector<cplx> kSpins{cplx{0.3, 0.1}, cplx{-0.4, 0.4}};

cplx dbar_fd(const std::function<cplx(const cplx&)>& f, const cplx& z, double h) {
  const cplx dx = (f(z + h) - f(z - h)) / (2 * h);
  const cplx dy = (f(z + kI * h) - f(z - kI * h)) / (2 * h);
  return 0.5 * (dx + kI * dy);
}

}  // namespace

TEST_CASE("mass profile", "[massive]") {
  CHECK(kBump(cplx{-0.2, -0.3}) == 1.0);
  CHECK(kBump(cplx{0.2, -0.3}) == 0.0);
  CHECK(kBump.sup_norm() == 1.0);
  CHECK_THROWS_AS(MassProfile(1.0, cplx{0.7, 0.0}, 0.35), domain_error);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.35, 0.35);
  for (int t = 0; t < 50; ++t) {
    const cplx x = cplx{-0.2, -0.3} + cplx{u(rng), u(rng)};
    CHECK(kBump(x) <= kBump.sup_norm());
    const double h = 1e-6;
    const cplx fd = 0.5 * cplx{(kBump(x + h) - kBump(x - h)) / (2 * h), -(kBump(x + kI * h) - kBump(x - kI * h)) / (2 * h)};
    CHECK(std::abs(fd - kBump.dz(x)) < 1e-6);
    CHECK(2 * std::abs(kBump.dz(x)) <= kBump.gradient_bound() * 1.01);
  }
}

TEST_CASE("star combination", "[massive]") {
  const cplx p1{0.3, -1.2}, pi{2.0, 0.5};
  CHECK(star_combine(cplx{1, 0}, p1, pi) == p1);
  CHECK(star_combine(kI, p1, pi) == -pi);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    const cplx a{n(rng), n(rng)}, b{n(rng), n(rng)};
    const double s = n(rng);
    CHECK(std::abs(star_combine(a + s * b, p1, pi) - star_combine(a, p1, pi) - s * star_combine(b, p1, pi)) < 1e-13);
  }
}

TEST_CASE("first-order term", "[massive]") {
  const MassiveSeries s(kSpins, kBump);
  SECTION("kernel integrand equals the truncated energy integrand") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    int done = 0;
    while (done < 10) {
      const cplx z{u(rng), u(rng)}, w{u(rng), u(rng)};
      if (std::abs(z) > 0.9 || std::abs(w) > 0.9 || std::abs(z - w) < 0.05) continue;
      bool ok = true;
      for (const auto& a : kSpins) ok = ok && std::abs(z - a) > 0.05 && std::abs(w - a) > 0.05;
      if (!ok) continue;
      const cplx a = s.star_integrand(z, w), b = s.energy_integrand(z, w);
      CHECK(std::abs(a - b) < 1e-8 * std::max(1.0, std::abs(a)));
      ++done;
    }
  }
  SECTION("both routes integrate to the same value") {
    const cplx z{0.1, -0.2};
    const auto a = s.A1(z), b = s.A1_energy(z);
    CHECK(std::abs(a.value - b.value) < 1e-8);
  }
  SECTION("linearity in the profile, zero profile") {
    const MassiveSeries s2(kSpins, kBump.scaled(2.0));
    const MassiveSeries s0(kSpins, kBump.scaled(0.0));
    for (const cplx z : {cplx{0.5, 0.5}, cplx{-0.6, -0.6}, cplx{0.7, -0.2}}) {
      const cplx a = s.A1(z).value, b = s2.A1(z).value;
      CHECK(std::abs(b - 2.0 * a) <= 1e-10 * std::abs(a));
      CHECK(s0.A1(z).value == cplx{});
    }
  }
  SECTION("bound shape near the spins") {
    for (const auto& a : kSpins)
      for (double d : {0.1, 0.01, 0.001}) {
        const cplx z = a + d * std::polar(1.0, 0.7);
        const double v = std::abs(s.A1(z).value);
        CHECK(std::isfinite(v));
        CHECK(v * std::sqrt(d) < 1.0);
      }
  }
}

TEST_CASE("coefficients of the first-order term", "[massive]") {
  const MassiveSeries s(kSpins, kBump);
  const auto k = s.kernel_coefficients(1);
  const auto e1 = coefficient_beta_lambda(s, 1, 0.08);
  const auto e2 = coefficient_beta_lambda(s, 1, 0.04);
  CHECK(std::abs(e1.beta.real()) < 1e-6);
  CHECK(std::abs(k.beta.real()) < 1e-6);
  CHECK(std::abs(e1.lambda - e2.lambda) < 1e-5);
  // the extraction disk misses the support: contour alone and the kernel route agree
  CHECK(std::abs(e1.lambda - k.lambda) < 1e-9);
  CHECK(std::abs(e1.beta - k.beta) < 1e-9);
}

TEST_CASE("coefficients with the mass covering the spin", "[massive]") {
  const MassProfile bump(1.0, cplx{0.25, 0.05}, 0.3);
  const MassiveSeries s(kSpins, bump);
  const auto k = s.kernel_coefficients(1);
  const auto e = coefficient_beta_lambda(s, 1, 0.1);
  CHECK(std::abs(e.beta.real()) < 1e-6);
  CHECK(std::abs(e.lambda - k.lambda) < 1e-6);
}

TEST_CASE("green-riemann at first order", "[massive]") {
  const MassiveSeries s(kSpins, kBump);
  const cplx c{-0.2, -0.3};
  const double R = 0.42;
  const int M = 64;
  cplx loop{};
  for (int k = 0; k < M; ++k) {
    const cplx e = std::polar(1.0, 2 * kPi * (k + 0.5) / M);
    const cplx z = c + R * e;
    loop += s.A0(z) * s.A1(z).value * (kI * R * e) * (2 * kPi / M);
  }
  auto area = integrate_disk<double>([&](const cplx& z) { return kBump(z) * std::norm(s.A0(z)); }, {},
                                     {1e-10, 200000, kBump.support(), false});
  CHECK(std::abs(loop.imag()) < 1e-4);
  CHECK(std::abs(loop + 2.0 * area.value) < 1e-4);
}

TEST_CASE("truncated series solves the massive equation", "[massive]") {
  const MassiveSeries s(kSpins, kBump);
  const double m = 0.1, h = 1e-3;
  double worst = 0.0, norm = 0.0;
  for (const cplx z : {cplx{-0.2, -0.3}, cplx{-0.05, -0.35}, cplx{-0.3, -0.15}}) {
    auto f = [&](const cplx& w) { return s.truncated(m, w, 2); };
    const cplx res = dbar_fd(f, z, h) + kI * m * kBump(z) * std::conj(f(z));
    worst = std::max(worst, std::abs(res));
    norm = std::max(norm, std::abs(f(z)));
  }
  CHECK(worst < 1e-2 * norm);
  // the plain critical part alone leaves an order-m residual
  double crit = 0.0;
  const cplx z{-0.2, -0.3};
  auto f0 = [&](const cplx& w) { return s.A0(w); };
  crit = std::abs(dbar_fd(f0, z, h) + kI * m * kBump(z) * std::conj(f0(z)));
  CHECK(crit > 10 * worst);
}

TEST_CASE("spin log ratio", "[massive]") {
  MassiveOptions opt;
  opt.tol = 1e-7;
  const MassProfile bump(1.0, cplx{-0.2, -0.35}, 0.3);
  SECTION("zero mass") { CHECK(spin_log_ratio(0.0, bump, {cplx{0.3, 0.1}}, radial_path(cplx{0.3, 0.1})) == 0.0); }
  SECTION("path and order independence, agreement with the energy route") {
    const cplx a{0.3, 0.1}, b{-0.45, 0.3};
    const auto radial = spin_log_ratio_first_order(bump, {a, b}, radial_path(a), opt);
    const SpinPath dogleg{{std::polar(1.0, -0.9), cplx{0.55, -0.45}, cplx{0.45, 0.0}, a}};
    const auto bent = spin_log_ratio_first_order(bump, {a, b}, dogleg, opt);
    CHECK(std::abs(radial.value - bent.value) < 1e-4);
    // b first then a, versus a first then b
    const double pa = spin_log_ratio_first_order(bump, {a}, radial_path(a), opt).value.real();
    const double pb = spin_log_ratio_first_order(bump, {b}, radial_path(b), opt).value.real();
    const double ab = pb + radial.value.real();
    const double ba = pa + spin_log_ratio_first_order(bump, {b, a}, radial_path(b), opt).value.real();
    CHECK(std::abs(ab - ba) < 1e-6 * std::abs(ab));
    // first-order coefficient from the energy integrals
    const auto direct = pure_spin_taylor(1, {a, b}, bump);
    CHECK(std::abs(direct.value.real() - ab) < 1e-3 * std::abs(ab));
    // the m-derivative of the truncated ratio
    const double d = (spin_log_ratio(1e-3, bump, {a}, radial_path(a), 1, opt) -
                      spin_log_ratio(-1e-3, bump, {a}, radial_path(a), 1, opt)) /
                     2e-3;
    const auto one = pure_spin_taylor(1, {a}, bump);
    CHECK(std::abs(d - one.value.real()) < 1e-3 * std::abs(one.value.real()));
  }
  SECTION("path guard") {
    const SpinPath bad{{cplx{-0.8, 0.6}, cplx{-0.45, 0.32}, cplx{0.3, 0.1}}};
    CHECK_THROWS_AS(spin_log_ratio(0.1, bump, {cplx{0.3, 0.1}, cplx{-0.45, 0.3}}, bad, 1), path_error);
  }
}

TEST_CASE("pure spin and doubled coefficients", "[massive]") {
  const std::vector<cplx> sp{cplx{0.3, 0.1}};
  CHECK(pure_spin_taylor(0, sp, kBump).value == cplx{});
  const auto c1 = pure_spin_taylor(1, sp, kBump);
  CHECK(pure_spin_taylor(1, sp, kBump.scaled(2.0)).value == 2.0 * c1.value);
  CHECK(doubled_taylor(0, sp, {}, kBump).value == cplx{1.0});
  const auto d1 = doubled_taylor(1, sp, {}, kBump);
  CHECK(std::abs(d1.value - 2.0 * c1.value) < 1e-10);
  CHECK(doubled_taylor(1, sp, {}, kBump.scaled(-1.0)).value == -d1.value);
  SECTION("with an energy insertion") {
    const cplx w{0.5, 0.4};
    const CriticalSystem sys(sp);
    CHECK(std::abs(doubled_taylor(0, sp, {w}, kBump).value - 2.0 * sys.energy(w)) < 1e-14);
    const auto e1 = doubled_taylor(1, sp, {w}, kBump);
    const auto e1n = doubled_taylor(1, sp, {w}, kBump.scaled(-1.0));
    CHECK(std::abs(e1.value + e1n.value) < 1e-12);
  }
  SECTION("second order against the square of the single-copy series") {
    MassiveOptions o;
    o.tol = 1e-4;
    const auto c2 = pure_spin_taylor(2, sp, kBump, o);
    const auto d2 = doubled_taylor(2, sp, {}, kBump, o);
    const double sq = 2.0 * c2.value.real() + 2.0 * c1.value.real() * c1.value.real();
    CHECK(std::abs(d2.value.real() - sq) < 1e-4);
    CHECK(std::abs(doubled_taylor(2, sp, {}, kBump.scaled(-1.0), o).value - d2.value) < 1e-12);
  }
}
