#include <catch_amalgamated.hpp>

#include <map>
#include <random>

#include "isg/gff.hpp"

using namespace isg;

namespace {
cplx rp(std::mt19937_64& rng, double rmax = 0.9) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(rmax * std::sqrt(u(rng)), 2 * kPi * u(rng));
}

// Generating-function oracle: the mixed correlation is d^m/dz_1..dz_m at 0 of
// charge_correlation * exp(sum_{k<l} z_k z_l G_kl + i sum_k z_k sum_j gamma_j G(y_k, x_j)),
// evaluated by central differences in long double.
long double gf_mixed_two(const std::vector<Charge>& cfg, const cplx& y1, const cplx& y2, long double h) {
  auto F = [&](long double z1, long double z2) -> std::complex<long double> {
    std::complex<long double> s1 = 0, s2 = 0;
    for (const auto& c : cfg) {
      s1 += (long double)c.gamma * (long double)green(y1, c.x);
      s2 += (long double)c.gamma * (long double)green(y2, c.x);
    }
    const std::complex<long double> iu(0, 1);
    return std::exp(z1 * z2 * (long double)green(y1, y2) + iu * (z1 * s1 + z2 * s2));
  };
  const auto v = (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4 * h * h);
  return v.real() * (long double)charge_correlation(cfg);
}
}  // namespace

TEST_CASE("wick constants", "[gff]") {
  CHECK(wick_constant(0.0) == 1.0);
  CHECK(std::abs(wick_constant(2 * kSqrtPi) - std::exp((0.5772156649 - std::log(4.0)) / 2)) < 1e-9);
  CHECK(std::abs(wick_constant(2 * kSqrtPi) - 0.6672841) < 1e-7);
  CHECK(wick_constant(1.3) == wick_constant(-1.3));
}

TEST_CASE("charge correlations", "[gff]") {
  CHECK(charge_correlation({{0.0, kSqrtPi}}) == 1.0);
  const cplx x(0.2, 0), y(-0.2, 0);
  const double g = 2 * kSqrtPi;
  const double formula = std::exp(4 * kPi * green(x, y) - 2 * kPi * harmonic_part(x, x) - 2 * kPi * harmonic_part(y, y));
  CHECK(std::abs(charge_correlation({{x, g}, {y, -g}}) - formula) < 1e-14 * formula);
  std::mt19937_64 rng(1);
  std::vector<Charge> cfg, flipped;
  for (int i = 0; i < 4; ++i) {
    cfg.push_back({rp(rng), (i % 2 ? 1.0 : -2.0) * kSqrtPi});
    flipped.push_back({cfg.back().x, -cfg.back().gamma});
  }
  CHECK(std::abs(charge_correlation(cfg) - charge_correlation(flipped)) < 1e-15 * charge_correlation(cfg));
  CHECK_THROWS_AS(charge_correlation({{x, 1.0}, {x, 1.0}}), domain_error);
}

TEST_CASE("mixed correlations", "[gff]") {
  const std::vector<Charge> cfg{{cplx(0.1, 0.3), kSqrtPi}, {cplx(-0.4, 0.1), -2 * kSqrtPi}};
  CHECK(std::abs(mixed_correlation(cfg, {}) - charge_correlation(cfg)) < 1e-15);
  CHECK(std::abs(mixed_correlation({}, {{cplx(0.3, 0.1)}})) == 0.0);
  const cplx y1(0.2, -0.3), y2(-0.1, 0.5);
  CHECK(std::abs(mixed_correlation({}, {{y1}, {y2}}) - green(y1, y2)) < 1e-15);
  const long double fd0 = gf_mixed_two({}, y1, y2, 1e-5L);
  CHECK(std::abs((double)fd0 - green(y1, y2)) < 1e-7);
  const long double fd = gf_mixed_two(cfg, y1, y2, 1e-5L);
  CHECK(std::abs((double)fd - mixed_correlation(cfg, {{y1}, {y2}}).real()) < 1e-7);
  // Derivative insertions against finite differences of the underived correlation.
  const double h = 1e-6;
  auto plain = [&](const cplx& y) { return mixed_correlation(cfg, {{y}, {y2}}); };
  const cplx dx = (plain(y1 + h) - plain(y1 - h)) / (2 * h);
  const cplx dy = (plain(y1 + cplx(0, h)) - plain(y1 - cplx(0, h))) / (2 * h);
  CHECK(std::abs(mixed_correlation(cfg, {{y1, Deriv::dz}, {y2}}) - 0.5 * (dx - kI * dy)) < 1e-7);
  CHECK(std::abs(mixed_correlation(cfg, {{y1, Deriv::dzbar}, {y2}}) - 0.5 * (dx + kI * dy)) < 1e-7);
  // Permutation symmetry.
  const std::vector<Charge> rev{cfg[1], cfg[0]};
  const cplx y3(0.4, 0.4);
  const cplx a = mixed_correlation(cfg, {{y1, Deriv::dz}, {y2}, {y3, Deriv::dzbar}});
  const cplx b = mixed_correlation(rev, {{y3, Deriv::dzbar}, {y1, Deriv::dz}, {y2}});
  CHECK(std::abs(a - b) < 1e-14 * std::abs(a));
  // Real charges: a single derivative insertion carries a factor i, a pair of them a real sign.
  const std::vector<Charge> c1{{cplx(0.2, 0.0), kSqrtPi}};
  const cplx u(0.3, 0.2), v(-0.3, 0.1);
  const cplx d1 = mixed_correlation(c1, {{u, Deriv::dz}});
  const cplx d2 = mixed_correlation(c1, {{u, Deriv::dzbar}});
  CHECK(std::abs(d1 + std::conj(d2)) < 1e-15);
  const cplx e1 = mixed_correlation(c1, {{u, Deriv::dz}, {v, Deriv::dz}});
  const cplx e2 = mixed_correlation(c1, {{u, Deriv::dzbar}, {v, Deriv::dzbar}});
  CHECK(std::abs(e1 - std::conj(e2)) < 1e-15);
  const cplx t1 = trig_correlation({{Trig::cos1, 0.2}}, {{u, Deriv::dz}, {v, Deriv::dzbar}});
  const cplx t2 = trig_correlation({{Trig::cos1, 0.2}}, {{u, Deriv::dzbar}, {v, Deriv::dz}});
  CHECK(std::abs(t1 - std::conj(t2)) < 1e-15);
}

TEST_CASE("finite outputs for distinct points", "[gff]") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Charge> cfg;
    std::vector<FieldPoint> fs;
    for (int i = 0; i < 5; ++i) cfg.push_back({rp(rng), (i % 2 ? 1.0 : 2.0) * kSqrtPi});
    for (int i = 0; i < 3; ++i) fs.push_back({rp(rng), static_cast<Deriv>(i % 3)});
    const cplx v = mixed_correlation(cfg, fs);
    CHECK(std::isfinite(v.real()));
    CHECK(std::isfinite(v.imag()));
  }
}

TEST_CASE("trig correlations", "[gff]") {
  const cplx a(0.3, 0.1), b(-0.2, -0.4);
  const double ga = harmonic_part(a, a), gb = harmonic_part(b, b);
  const cplx cc = trig_correlation({{Trig::cos1, a}, {Trig::cos1, b}});
  CHECK(std::abs(cc - std::cosh(kPi * green(a, b)) * std::exp(-kPi / 2 * (ga + gb))) < 1e-14);
  CHECK(std::abs(trig_correlation({{Trig::sin1, a}, {Trig::cos1, b}})) < 1e-15);
  CHECK(std::abs(trig_correlation({{Trig::sin1, a}, {Trig::cos2, b}, {Trig::cos1, 0.1}})) < 1e-15);
  CHECK(std::abs(trig_correlation({{Trig::cos2, 0.0}}) - 1.0) < 1e-15);
  // sin sin = sinh form
  const cplx ss = trig_correlation({{Trig::sin1, a}, {Trig::sin1, b}});
  CHECK(std::abs(ss - std::sinh(kPi * green(a, b)) * std::exp(-kPi / 2 * (ga + gb))) < 1e-14);
}

TEST_CASE("counterterm kernel", "[gff]") {
  const cplx x(0.3, -0.2), y(-0.1, 0.4);
  CHECK(counterterm_kernel(x, y) == Catch::Approx(counterterm_kernel(y, x)).epsilon(1e-14));
  const double direct = (std::cosh(4 * kPi * green(x, y)) - 1) *
                        std::exp(-2 * kPi * (harmonic_part(x, x) + harmonic_part(y, y)));
  CHECK(std::abs(counterterm_kernel(x, y) - direct) < 1e-12 * direct);
  const double d1 = 1e-4, d2 = 1e-3;
  const double slope = (std::log(counterterm_kernel(d2 / 2, -d2 / 2)) - std::log(counterterm_kernel(d1 / 2, -d1 / 2))) /
                       (std::log(d2) - std::log(d1));
  CHECK(std::abs(slope + 2.0) < 0.04);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const cplx p = rp(rng), q = rp(rng);
    CHECK(counterterm_kernel(p, q) > 0.0);
  }
  CHECK_THROWS_AS(counterterm_kernel(x, x), domain_error);
}

TEST_CASE("gff cumulants", "[gff]") {
  const cplx a(0.3, 0.1), u(-0.2, 0.25);
  const std::vector<TrigFactor> f{{Trig::cos1, a}, {Trig::cos2, u}};
  const cplx joint = trig_correlation(f);
  const cplx prod = trig_correlation({f[0]}) * trig_correlation({f[1]});
  CHECK(std::abs(gff_cumulant(f, {{0}, {1}}) - (joint - prod)) < 1e-15);
  const double direct = (std::cosh(2 * kPi * green(a, u)) - 1) *
                        std::exp(-kPi / 2 * harmonic_part(a, a) - 2 * kPi * harmonic_part(u, u));
  CHECK(std::abs(gff_cumulant(f, {{0}, {1}}).real() - direct) < 1e-14);
  // Synthetic Green table with no coupling between two groups of points.
  std::map<std::pair<int, int>, double> table;
  const std::vector<cplx> pts{0.1, 0.2, cplx(0, 0.3), cplx(0, 0.4)};
  auto id = [&](const cplx& z) {
    for (int i = 0; i < 4; ++i)
      if (pts[i] == z) return i;
    return -1;
  };
  GreenModel syn{[&](const cplx& x, const cplx& y) {
                   const int i = id(x), j = id(y);
                   if ((i < 2) != (j < 2)) return 0.0;
                   return 0.3 + 0.1 * (i + j);
                 },
                 [&](const cplx& x) { return -0.05 * (id(x) + 1); }};
  const std::vector<TrigFactor> g{{Trig::cos1, pts[0]}, {Trig::cos2, pts[1]}, {Trig::cos1, pts[2]}, {Trig::sin1, pts[3]}};
  CHECK(std::abs(gff_cumulant(g, {{0, 1}, {2, 3}}, syn)) < 1e-14);
  CHECK(std::abs(gff_cumulant(g, {{0}, {1}, {2, 3}}, syn)) < 1e-14);
}
