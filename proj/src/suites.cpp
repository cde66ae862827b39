#include "isg/suites.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "isg/critical.hpp"
#include "isg/gff.hpp"
#include "isg/painleve.hpp"
#include "isg/partitions.hpp"

namespace isg {

using nlohmann::json;

bool CheckRow::pass() const { return error.empty() && std::isfinite(value) && std::abs(value - target) <= tol; }

bool SuiteReport::passed() const {
  for (const auto& r : rows)
    if (!r.pass()) return false;
  return true;
}

const CheckRow* SuiteReport::find(const std::string& check) const {
  for (const auto& r : rows)
    if (r.check == check) return &r;
  return nullptr;
}

json SuiteReport::to_json(bool timings) const {
  json checks = json::array();
  for (const auto& r : rows) {
    json j{{"suite", suite},
           {"check", r.check},
           {"status", r.pass() ? "pass" : "fail"},
           {"value", std::isfinite(r.value) ? json(r.value) : json(nullptr)},
           {"target", r.target},
           {"tol", r.tol},
           {"seconds", timings ? json(r.seconds) : json(nullptr)}};
    if (!r.error.empty()) j["error"] = r.error;
    checks.push_back(std::move(j));
  }
  return {{"suite", suite},
          {"config_hash", config_hash},
          {"cache_version", cache_version},
          {"seed", seed},
          {"status", passed() ? "pass" : "fail"},
          {"checks", std::move(checks)}};
}

std::string SuiteReport::to_csv(bool timings) const {
  std::ostringstream out;
  out.precision(17);
  out << "suite,check,status,value,target,tol,seconds\n";
  for (const auto& r : rows) {
    out << suite << ',' << r.check << ',' << (r.pass() ? "pass" : "fail") << ',';
    if (std::isfinite(r.value)) out << r.value;
    out << ',' << r.target << ',' << r.tol << ',';
    if (timings) out << r.seconds;
    out << '\n';
  }
  return out.str();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Recorder {
 public:
  Recorder(std::string suite, const RunConfig& cfg) : cfg_(cfg) {
    rep_.suite = std::move(suite);
    rep_.config_hash = cfg.hash();
    rep_.cache_version = cfg.cache_version();
    rep_.seed = cfg.seed();
  }

  template <class F>
  void check(const std::string& name, double target, double tol, F&& f) {
    CheckRow r;
    r.check = name;
    r.target = target;
    r.tol = cfg_.tol(name, tol);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.value = f();
    } catch (const std::exception& e) {
      r.value = kNaN;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep_.rows.push_back(std::move(r));
  }

  SuiteReport done() { return std::move(rep_); }

 private:
  const RunConfig& cfg_;
  SuiteReport rep_;
};

cplx random_point(std::mt19937_64& rng, double rmax) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(rmax * std::sqrt(u(rng)), 2 * kPi * u(rng));
}

std::vector<cplx> separated_points(std::mt19937_64& rng, int n, double sep, double rmax) {
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < n) {
    const cplx p = random_point(rng, rmax);
    bool ok = true;
    for (const auto& q : out) ok = ok && std::abs(p - q) > sep;
    if (ok) out.push_back(p);
  }
  return out;
}

double max_relative_spread(const std::vector<double>& v, double* mean_out = nullptr) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x / mean - 1.0));
  if (mean_out) *mean_out = mean;
  return worst;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- combinatorics ----

Eigen::MatrixXd random_skew(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  return A - A.transpose();
}

SuiteReport suite_combinatorics(const RunConfig& cfg) {
  Recorder rec("combinatorics", cfg);
  const auto records = identity_suite(5, cfg.seed());
  for (const char* family : {"S1", "S2", "spin_refinement", "subset_resummation", "pair_refinement",
                             "random_variable_cumulant"}) {
    rec.check(std::string("exact_") + family, 0.0, 0.0, [&] {
      int failing = 0, seen = 0;
      for (const auto& r : records)
        if (r.identity == family) {
          ++seen;
          failing += r.pass ? 0 : 1;
        }
      if (seen == 0) throw std::runtime_error("no instances");
      return static_cast<double>(failing);
    });
  }
  rec.check("pfaffian_energy_expansion", 0.0, 1e-9, [&] {
    double worst = 0.0;
    for (const auto& r : records)
      if (r.identity == "pfaffian_energy_expansion") worst = std::max(worst, r.residual);
    return worst;
  });
  std::mt19937_64 rng(cfg.seed() + 1);
  std::vector<Eigen::MatrixXd> mats;
  for (int i = 0; i < 100; ++i) mats.push_back(random_skew(2 + 2 * (i % 5), rng));
  rec.check("pfaffian_recursive_vs_matchings", 0.0, 1e-12, [&] {
    double worst = 0.0;
    for (const auto& M : mats) {
      const double a = pfaffian(M), b = pfaffian_matchings(M);
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    return worst;
  });
  rec.check("pfaffian_squared_vs_det", 0.0, 1e-9, [&] {
    double worst = 0.0;
    for (const auto& M : mats) {
      const double pf = pfaffian(M), det = M.determinant();
      worst = std::max(worst, std::abs(pf * pf - det) / std::abs(det));
    }
    return worst;
  });
  return rec.done();
}

// ---- heat ----

SuiteReport suite_heat(const RunConfig& cfg) {
  Recorder rec("heat", cfg);
  const auto& c = cfg.cache();
  const double inf = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(cfg.seed());
  rec.check("covariance_vs_green", 0.0, 1e-6, [&] {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const cplx x = random_point(rng, 0.7), y = random_point(rng, 0.7);
      worst = std::max(worst, std::abs(truncated_covariance(c, 0, inf, x, y) - green(x, y)));
    }
    return worst;
  });
  rec.check("heat_kernel_scaling", 0.0, 1e-10, [&] {
    const auto big = SpectralCache::warm(4e-3, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const cplx x = random_point(rng, 0.9), y = random_point(rng, 0.9);
      for (double t : {4e-3, 0.02, 0.3, 2.0})
        worst = std::max(worst, std::abs(heat_kernel(big, t, 2.0 * x, 2.0 * y) - 0.25 * heat_kernel(c, t / 4, x, y)));
    }
    return worst;
  });
  rec.check("diagonal_covariance_constant", 0.0, 1e-2, [&] {
    const double eps = 1e-3;
    const cplx d(0.2, 0.0);
    return std::abs(truncated_covariance(c, eps * eps, inf, d, d) + std::log(eps) / (2 * kPi) -
                    (kEulerGamma - std::log(4.0)) / (4 * kPi) - harmonic_part(d, d));
  });
  return rec.done();
}

// ---- critical ----

double rh_residual(const BranchedSpinor& f, int M = 64) {
  double worst = 0.0;
  for (int k = 0; k < M; ++k) {
    const cplx z = std::polar(1.0, 2 * kPi * (k + 0.37) / M);
    const cplx v = kI * z * f(z) * f(z);
    const double s = std::max(1.0, std::abs(v));
    worst = std::max({worst, std::abs(v.imag()) / s, -v.real() / s});
  }
  return worst;
}

double doubled_two_spin(const cplx& a, const cplx& b) {
  const double ga = harmonic_part(a, a), gb = harmonic_part(b, b);
  return 2.0 * std::cosh(kPi * green(a, b)) * std::exp(-0.5 * kPi * (ga + gb));
}

// d_a log of the doubled two-spin correlation (Wirtinger), by central differences
cplx doubled_two_spin_dlog(const cplx& a, const cplx& b) {
  const double h = 1e-5;
  const double dx = (std::log(doubled_two_spin(a + h, b)) - std::log(doubled_two_spin(a - h, b))) / (2 * h);
  const double dy = (std::log(doubled_two_spin(a + kI * h, b)) - std::log(doubled_two_spin(a - kI * h, b))) / (2 * h);
  return 0.5 * cplx{dx, -dy};
}

std::vector<std::pair<cplx, cplx>> default_spin_pairs(std::uint64_t seed) {
  std::mt19937_64 rng(seed + 17);
  std::vector<std::pair<cplx, cplx>> out;
  for (int t = 0; t < 10; ++t) {
    const auto p = separated_points(rng, 2, 0.15, 0.85);
    out.emplace_back(p[0], p[1]);
  }
  return out;
}

std::vector<cplx> default_energy_points() {
  std::vector<cplx> out;
  for (int k = 0; k < 20; ++k) out.push_back(std::polar(0.05 + 0.85 * k / 19.0, 2.4 * k));
  return out;
}

double energy_cos2_ratio(const cplx& u) {
  return energy_one_point(u) / (2.0 * trig_correlation({{Trig::cos2, u}}).real());
}

SuiteReport suite_critical(const RunConfig& cfg) {
  Recorder rec("critical", cfg);
  std::mt19937_64 rng(cfg.seed());
  rec.check("one_spin_boundary_residual", 0.0, 1e-10, [&] {
    double worst = 0.0;
    for (int t = 0; t < 8; ++t) worst = std::max(worst, rh_residual(one_spin_disorder_fermion(random_point(rng, 0.9))));
    return worst;
  });
  rec.check("one_spin_solve_vs_closed_form", 0.0, 1e-8, [&] {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const auto g = one_spin_disorder_fermion(random_point(rng, 0.9));
      const auto f = solve_correlation(g.branch_ptr(), {}, {1.0});
      for (int s = 0; s < 10; ++s) {
        const cplx z = random_point(rng, 0.85);
        // the solve carries the opposite global sign
        worst = std::max(worst, std::abs(f(z) + g(z)) / std::max(1.0, std::abs(g(z))));
      }
    }
    return worst;
  });
  rec.check("disorder_coefficient_antisymmetry", 0.0, 1e-8, [&] {
    double worst = 0.0;
    for (int n : {2, 3})
      for (int t = 0; t < 4; ++t) {
        CriticalSystem sys(separated_points(rng, n, 0.2, 0.85));
        for (int j = 0; j < n; ++j)
          for (int k = j + 1; k < n; ++k) worst = std::max(worst, std::abs(sys.disorder_pair(k, j) + sys.disorder_pair(j, k)));
      }
    return worst;
  });
  rec.check("green_riemann_imaginary_part", 0.0, 1e-6, [&] {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      CriticalSystem sys(separated_points(rng, 2, 0.3, 0.85));
      const auto& f1 = sys.disorder_fermion(0);
      const auto& f2 = sys.disorder_fermion(1);
      cplx total{};
      for (std::size_t j = 0; j < 2; ++j) {
        const cplx a = sys.branch().spin(j);
        const double r = 0.4 * std::min(1.0 - std::abs(a), std::abs(sys.branch().spin(1 - j) - a));
        total += contour_circle([&](const cplx& z) { return f1(z) * f2(z); }, a, r);
      }
      worst = std::max(worst, std::abs(total.imag()));
    }
    return worst;
  });
  const auto pairs = cfg.spin_pairs(default_spin_pairs(cfg.seed()));
  rec.check("two_spin_log_derivative", 0.0, 1e-4, [&] {
    double worst = 0.0;
    for (const auto& [a, b] : pairs) {
      CriticalSystem sys({a, b});
      worst = std::max(worst, std::abs(doubled_two_spin_dlog(a, b) - sys.critical_A(0)));
    }
    return worst;
  });
  const auto us = cfg.points(default_energy_points());
  rec.check("energy_ratio_constancy", 0.0, 1e-3, [&] {
    std::vector<double> r;
    for (const auto& u : us) r.push_back(energy_cos2_ratio(u));
    return max_relative_spread(r);
  });
  return rec.done();
}

// ---- massive ----

const MassProfile kDefaultMass(1.0, cplx{-0.2, -0.35}, 0.3);

SuiteReport suite_massive(const RunConfig& cfg) {
  Recorder rec("massive", cfg);
  const MassProfile alpha = cfg.mass_profile(kDefaultMass);
  const cplx a{0.3, 0.1}, b{-0.4, 0.4};
  const MassiveSeries s({a, b}, alpha);
  rec.check("first_order_beta_imaginary", 0.0, 1e-6, [&] {
    const auto k = s.kernel_coefficients(1);
    const auto e = coefficient_beta_lambda(s, 1, 0.08);
    return std::max(std::abs(k.beta.real()), std::abs(e.beta.real()));
  });
  rec.check("kernel_vs_energy_integrand", 0.0, 1e-8, [&] {
    std::mt19937_64 rng(cfg.seed());
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    double worst = 0.0;
    int done = 0;
    while (done < 10) {
      const cplx z{u(rng), u(rng)}, w{u(rng), u(rng)};
      if (std::abs(z) > 0.9 || std::abs(w) > 0.9 || std::abs(z - w) < 0.05) continue;
      if (std::abs(z - a) < 0.05 || std::abs(z - b) < 0.05 || std::abs(w - a) < 0.05 || std::abs(w - b) < 0.05)
        continue;
      const cplx p = s.star_integrand(z, w), q = s.energy_integrand(z, w);
      worst = std::max(worst, std::abs(p - q) / std::max(1.0, std::abs(p)));
      ++done;
    }
    return worst;
  });
  rec.check("truncated_series_dbar_residual", 0.0, 1e-2, [&] {
    const double m = 0.1, h = 1e-3;
    const cplx c = alpha.support().center;
    const double r = alpha.support().radius;
    double worst = 0.0, norm = 0.0;
    for (const cplx z : {c, c + 0.5 * r * std::polar(1.0, 0.3), c + 0.5 * r * std::polar(1.0, 2.5)}) {
      auto f = [&](const cplx& w) { return s.truncated(m, w, 2); };
      const cplx dx = (f(z + h) - f(z - h)) / (2 * h);
      const cplx dy = (f(z + kI * h) - f(z - kI * h)) / (2 * h);
      const cplx res = 0.5 * (dx + kI * dy) + kI * m * alpha(z) * std::conj(f(z));
      worst = std::max(worst, std::abs(res));
      norm = std::max(norm, std::abs(f(z)));
    }
    return worst / norm;
  });
  MassiveOptions opt;
  opt.tol = 1e-7;
  const cplx sb{-0.45, 0.3};
  std::optional<SeriesCoefficient> radial;
  rec.check("spin_log_ratio_path_independence", 0.0, 1e-4, [&] {
    radial = spin_log_ratio_first_order(alpha, {a, sb}, radial_path(a), opt);
    const SpinPath dogleg{{std::polar(1.0, -0.9), cplx{0.55, -0.45}, cplx{0.45, 0.0}, a}};
    const auto bent = spin_log_ratio_first_order(alpha, {a, sb}, dogleg, opt);
    return std::abs(radial->value - bent.value);
  });
  rec.check("spin_log_ratio_order_independence", 0.0, 1e-4, [&] {
    if (!radial) radial = spin_log_ratio_first_order(alpha, {a, sb}, radial_path(a), opt);
    const double pa = spin_log_ratio_first_order(alpha, {a}, radial_path(a), opt).value.real();
    const double pb = spin_log_ratio_first_order(alpha, {sb}, radial_path(sb), opt).value.real();
    const double ab = pb + radial->value.real();
    const double ba = pa + spin_log_ratio_first_order(alpha, {sb, a}, radial_path(sb), opt).value.real();
    return std::abs(ab - ba);
  });
  return rec.done();
}

// ---- sine-Gordon ----

SuiteReport suite_sg(const RunConfig& cfg) {
  Recorder rec("sg", cfg);
  const auto& c = cfg.cache();
  const double t = 0.05;
  auto slope = [&](double r0, double r1, double e2) {
    const cplx x{0.1, 0.1};
    std::vector<double> lx, ly;
    for (double r = r0; r <= r1 * 1.0001; r *= std::pow(10.0, 0.125)) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(std::abs(vtilde2({x, 1}, {x + r * std::polar(1.0, 0.4), -1}, e2, t, c))));
    }
    return least_squares_slope(lx, ly);
  };
  rec.check("two_point_exponent", -0.5, 0.05, [&] { return slope(1e-3, 1e-2, 1e-8); });
  rec.check("two_point_exponent_small_distance", -0.5, 0.01, [&] { return slope(1e-6, 1e-5, 1e-16); });
  rec.check("recursion_vs_closed_form", 0.0, 1e-12, [&] {
    const ChargedPoint p{{0.1, 0.2}, 1}, q{{0.15, 0.1}, -1};
    const double closed = vtilde2(p, q, 1e-6, t, c);
    return std::abs(vtilde_n({p, q}, 1e-6, t, {}, true, c) / closed - 1.0);
  });
  rec.check("counterterm_compensated_variation", 0.0, 0.1, [&] {
    const ChargedPoint p{{0.1, 0.0}, 2}, q{{0.1, 0.05}, -2};
    const double s6 = counterterm(p, q, 1e-6, c) + vtilde2(p, q, 1e-6, t, c);
    const double s8 = counterterm(p, q, 1e-8, c) + vtilde2(p, q, 1e-8, t, c);
    return std::abs(s6 - s8) / std::abs(s8);
  });
  const auto eta = cfg.test_density(TestDensity::symmetric_pair(1, cplx{1.0, 0.3}, cplx{0.1, 0.0}, 0.2));
  const double eps2 = cfg.number("eps2", 1e-3), tt = cfg.number("t", 0.02);
  rec.check("partition_function_mc", 0.0, 3.0, [&] {
    const auto r = mc_partition_check(eta, eps2, tt, cfg.samples(10000), cfg.seed(), 3, {}, c);
    if (!r.diagnostic.empty()) throw std::runtime_error(r.diagnostic);
    return std::abs(r.lhs - r.rhs) / r.se;
  });
  return rec.done();
}

// ---- painleve ----

SuiteReport suite_painleve(const RunConfig& cfg) {
  Recorder rec("painleve", cfg);
  std::optional<PainleveSolution> sol;
  rec.check("ode_residual", 0.0, 1e-8, [&] {
    sol = solve_eta(1e-3, 8.0);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < sol->x.size(); ++i) {
      const double r = std::exp(0.5 * (sol->x[i] + sol->x[i + 1]));
      if (r < 0.01 || r > 6.0) continue;
      const auto p = sol->at(r);
      worst = std::max(worst, std::abs(p.ddeta - painleve_rhs(r, p.eta, p.deta)));
    }
    return worst;
  });
  auto need = [&]() -> const PainleveSolution& {
    if (!sol) throw std::runtime_error("no Painleve solution");
    return *sol;
  };
  const double m = -1.0;
  rec.check("sin_cos_ratio", 0.0, 1e-12, [&] {
    std::vector<double> rs;
    for (double r = 0.01; r < 6.0; r *= 1.3) rs.push_back(r);
    double worst = 0.0;
    for (const auto& row : scaling_functions(need(), m, rs)) {
      const double th = std::tanh(row.h0);
      worst = std::max(worst, std::abs(row.fs / row.fc - th * th));
    }
    return worst;
  });
  rec.check("long_distance_plateau", 0.0, 1e-5, [&] {
    const double plateau = std::pow(sigma_constant(), -4.0) * std::sqrt(8.0 * std::abs(m));
    return std::abs(scaling_functions(need(), m, {6.0})[0].fc / plateau - 1.0);
  });
  auto avg_slope = [&](double r0, double r1) {
    const auto rows = scaling_functions(need(), m, {r0, r1});
    return std::log(rows[1].fc / rows[0].fc) / std::log(r1 / r0);
  };
  rec.check("short_distance_slope", -0.5, 0.02, [&] { return avg_slope(0.01, 0.05); });
  rec.check("short_distance_slope_near_cutoff", -0.5, 0.03, [&] { return avg_slope(1.05e-3, 2e-3); });
  return rec.done();
}

// ---- bridge ----

std::vector<cplx> default_bridge_grid() {
  std::vector<cplx> out;
  for (int k = 0; k < 15; ++k) out.push_back(std::polar(0.55, 2 * kPi * (k + 0.5) / 15));
  return out;
}

const cplx kDefaultBridgeSpin{0.3, 0.0};
const MassProfile kDefaultBridgeMass(1.0, cplx{-0.2, -0.3}, 0.35);

// Closed form of the GFF-side integrand up to a constant factor.
double gff_closed_form(const cplx& a, const cplx& u) {
  return (std::cosh(2 * kPi * green(a, u)) - 1.0) * std::exp(-0.5 * kPi * harmonic_part(a, a) - 2 * kPi * harmonic_part(u, u));
}

std::vector<double> pointwise_ratios(const cplx& a, const std::vector<cplx>& us) {
  CriticalSystem sys({a});
  std::vector<double> r;
  for (const auto& u : us) r.push_back(ising_energy_integrand(sys, u) / gff_cos2_integrand(a, u));
  return r;
}

SuiteReport suite_bridge(const RunConfig& cfg) {
  Recorder rec("bridge", cfg);
  const cplx a = cfg.spin(kDefaultBridgeSpin);
  const auto us = cfg.points(default_bridge_grid());
  const MassProfile rho = cfg.mass_profile(kDefaultBridgeMass);
  rec.check("pointwise_ratio_constancy", 0.0, 5e-3, [&] {
    CriticalSystem sys({a});
    std::vector<double> r;
    for (const auto& u : us) r.push_back(ising_energy_integrand(sys, u) / gff_closed_form(a, u));
    return max_relative_spread(r);
  });
  rec.check("gff_cumulant_vs_closed_form", 0.0, 1e-10, [&] {
    std::vector<double> r;
    for (const auto& u : us) r.push_back(gff_cos2_integrand(a, u) / gff_closed_form(a, u));
    return max_relative_spread(r);
  });
  double kappa = kNaN;
  {
    const auto r = pointwise_ratios(a, us);
    max_relative_spread(r, &kappa);
  }
  // The m-coefficient of the massive correlation carries the coupling -1/pi per insertion;
  // the n-th coupling derivative of the sine-Gordon correlation carries 1/n!.
  const double s0 = trig_correlation({{Trig::cos1, a}}).real();
  rec.check("smeared_first_order", 0.0, 1e-2, [&] {
    SgOptions so;
    so.tol = 1e-5;
    MassiveOptions mo;
    mo.tol = 1e-5;
    const double s1 = sg_taylor(1, {{Trig::cos1, a}}, rho, so).value.real();
    const double d1 = doubled_taylor(1, {a}, {}, rho, mo).value.real();
    return std::abs(d1 / (-kappa / kPi * s1 / s0) - 1.0);
  });
  rec.check("smeared_second_order", 0.0, 1e-2, [&] {
    SgOptions so;
    so.tol = 1e-4;
    MassiveOptions mo;
    mo.tol = 1e-4;
    const double s2 = sg_taylor(2, {{Trig::cos1, a}}, rho, so).value.real();
    const double d2 = doubled_taylor(2, {a}, {}, rho, mo).value.real();
    return std::abs(d2 / (0.5 * kappa * kappa / (kPi * kPi) * s2 / s0) - 1.0);
  });
  return rec.done();
}

}  // namespace

double ising_energy_integrand(const CriticalSystem& sys, const cplx& u) {
  return 2.0 * (sys.energy(u) - energy_one_point(u));
}

double gff_cos2_integrand(const cplx& a, const cplx& u) {
  const TrigFactor s{Trig::cos1, a};
  return gff_cumulant({s, {Trig::cos2, u}}, {{0}, {1}}).real() / trig_correlation({s}).real();
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"combinatorics", "heat", "critical", "massive", "sg", "painleve", "bridge"};
  return names;
}

SuiteReport run_suite(const std::string& name, const RunConfig& cfg) {
  if (name == "combinatorics") return suite_combinatorics(cfg);
  if (name == "heat") return suite_heat(cfg);
  if (name == "critical") return suite_critical(cfg);
  if (name == "massive") return suite_massive(cfg);
  if (name == "sg") return suite_sg(cfg);
  if (name == "painleve") return suite_painleve(cfg);
  if (name == "bridge") return suite_bridge(cfg);
  throw config_error("unknown suite '" + name + "'");
}

bool CalibrationRegistry::passed() const {
  for (const auto& r : rows)
    if (!r.pass()) return false;
  return true;
}

const CalibrationRow* CalibrationRegistry::find(const std::string& row) const {
  for (const auto& r : rows)
    if (r.row == row) return &r;
  return nullptr;
}

json CalibrationRegistry::to_json() const {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"row", r.row},
                   {"constant", r.constant ? json(*r.constant) : json(nullptr)},
                   {"residual", r.residual},
                   {"tol", r.tol},
                   {"configurations", r.configurations},
                   {"status", r.constant ? (r.pass() ? "pass" : "fail") : "not_measured"},
                   {"note", r.note}});
  return out;
}

SuiteReport CalibrationRegistry::as_report(const RunConfig& cfg) const {
  SuiteReport rep;
  rep.suite = "calibrate";
  rep.config_hash = cfg.hash();
  rep.cache_version = cfg.cache_version();
  rep.seed = cfg.seed();
  for (const auto& r : rows) {
    if (!r.constant) continue;
    CheckRow c;
    c.check = r.row + "_constancy";
    c.value = r.residual;
    c.tol = r.tol;
    rep.rows.push_back(c);
  }
  return rep;
}

CalibrationRegistry calibrate(const RunConfig& cfg) {
  const auto us = cfg.points(default_energy_points());
  if (us.size() < 10) throw config_error("calibrate: at least 10 energy points required");
  const auto pairs = cfg.spin_pairs(default_spin_pairs(cfg.seed()));
  if (pairs.size() < 10) throw config_error("calibrate: at least 10 spin pairs required");
  const cplx a = cfg.spin(kDefaultBridgeSpin);
  CalibrationRegistry reg;
  {
    // ratio of d_a log correlations: the constant of the spin row drops out of log-derivatives
    CalibrationRow r{"spin", {}, 0.0, cfg.tol("spin", 1e-4), pairs.size(),
                     "critical_A over d_a log of the doubled two-spin GFF form; residual is absolute"};
    double mean = 0.0;
    std::vector<std::pair<cplx, cplx>> vals;
    for (const auto& [x, y] : pairs) {
      CriticalSystem sys({x, y});
      vals.emplace_back(sys.critical_A(0), doubled_two_spin_dlog(x, y));
      mean += (vals.back().first / vals.back().second).real();
    }
    mean /= static_cast<double>(vals.size());
    for (const auto& [A, g] : vals) r.residual = std::max(r.residual, std::abs(A - mean * g));
    r.constant = mean;
    reg.rows.push_back(r);
  }
  {
    CalibrationRow r{"energy", {}, 0.0, cfg.tol("energy", 1e-3), us.size(),
                     "energy_one_point(u) over 2 <:cos 2 sqrt(pi) phi(u):>"};
    std::vector<double> v;
    for (const auto& u : us) v.push_back(energy_cos2_ratio(u));
    double mean = 0.0;
    r.residual = max_relative_spread(v, &mean);
    r.constant = mean;
    reg.rows.push_back(r);
  }
  {
    CalibrationRow r{"energy_insertion", {}, 0.0, cfg.tol("energy_insertion", 5e-3), us.size(),
                     "connected <(sigma sigma~)_a; (eps + eps~)_u> over <:cos sqrt(pi) phi(a):; :cos 2 sqrt(pi) phi(u):>, "
                     "both normalized by the spin expectation"};
    std::vector<cplx> grid;
    for (const auto& u : us)
      if (std::abs(u - a) >= cfg.delta_all()) grid.push_back(u);
    double mean = 0.0;
    r.residual = max_relative_spread(pointwise_ratios(a, grid), &mean);
    r.constant = mean;
    r.configurations = grid.size();
    reg.rows.push_back(r);
  }
  reg.rows.push_back({"fermion", {}, 0.0, 0.0, 0, "no GFF-side fermion correlator is implemented; not measured"});
  return reg;
}

}  // namespace isg
