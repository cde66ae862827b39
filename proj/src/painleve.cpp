#include "isg/painleve.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/numeric/odeint.hpp>

#include "isg/disk.hpp"

namespace isg {

double bessel_k0(double x) { return boost::math::cyl_bessel_k(0, x); }
double bessel_k1(double x) { return boost::math::cyl_bessel_k(1, x); }

double painleve_rhs(double r, double eta, double deta) {
  return deta * deta / eta - deta / r + eta * eta * eta - 1.0 / eta;
}

namespace {

using State = std::array<double, 3>;  // u, u_x, tail

// r-weighted tau-function integrand r [ (h')^2 - sinh^2(2h) ].
double tail_integrand(double r, double h, double dh) {
  const double s = std::sinh(2.0 * h);
  return r * (dh * dh - s * s);
}

}  // namespace

PainleveSolution solve_eta(double r_min, double r_max, double tol, int nodes) {
  if (r_min < 1e-3 || r_max < 6.0 || !(r_min < r_max) || nodes < 3)
    throw std::invalid_argument("solve_eta: need 1e-3 <= r_min < r_max, r_max >= 6");
  const double pi = kPi;
  const double eta0 = 1.0 - (2.0 / pi) * bessel_k0(2.0 * r_max);
  const double deta0 = (4.0 / pi) * bessel_k1(2.0 * r_max);
  // Tail beyond r_max from the linearized solution h ~ K0(2r)/pi.
  boost::math::quadrature::exp_sinh<double> es;
  const double beyond = es.integrate(
      [&](double r) {
        const double h = bessel_k0(2.0 * r) / pi, dh = -2.0 * bessel_k1(2.0 * r) / pi;
        return tail_integrand(r, h, dh);
      },
      r_max, std::numeric_limits<double>::infinity());
  State y{std::log(eta0), r_max * deta0 / eta0, -beyond};

  PainleveSolution sol;
  sol.r_min = r_min;
  sol.r_max = r_max;
  const double x0 = std::log(r_max), x1 = std::log(r_min);
  std::vector<double> xs(nodes);
  for (int i = 0; i < nodes; ++i) xs[i] = x0 + (x1 - x0) * i / (nodes - 1);

  auto rhs = [](const State& s, State& d, double x) {
    const double r = std::exp(x);
    d[0] = s[1];
    d[1] = 2.0 * r * r * std::sinh(2.0 * s[0]);
    const double h = -0.5 * s[0], dh = -0.5 * s[1] / r;
    d[2] = r * tail_integrand(r, h, dh);
  };
  using namespace boost::numeric::odeint;
  auto stepper = make_controlled(tol, tol, runge_kutta_fehlberg78<State>());
  std::vector<State> out;
  integrate_times(stepper, rhs, y, xs.begin(), xs.end(), (x1 - x0) / (nodes - 1) / 4,
                  [&](const State& s, double x) {
                    if (!std::isfinite(s[0]) || !std::isfinite(s[1]))
                      throw painleve_domain_error("solve_eta: eta left (0, inf)", std::exp(x));
                    out.push_back(s);
                  });
  // Store in increasing x.
  for (int i = nodes - 1; i >= 0; --i) {
    sol.x.push_back(xs[i]);
    sol.u.push_back(out[i][0]);
    sol.ux.push_back(out[i][1]);
    sol.tail.push_back(out[i][2]);
  }
  return sol;
}

namespace {

// Quintic Hermite on [0, 1] for values, first and second derivatives; returns value,
// first and second derivative at t (derivatives with respect to the original variable,
// interval length h).
std::array<double, 3> hermite5(double f0, double d0, double s0, double f1, double d1, double s1, double h, double t) {
  // Basis in t with scaled derivatives.
  const double D0 = d0 * h, D1 = d1 * h, S0 = s0 * h * h, S1 = s1 * h * h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5, H3 = 0.5 * t3 - t4 + 0.5 * t5;
  const double H4 = -4 * t3 + 7 * t4 - 3 * t5, H5 = 10 * t3 - 15 * t4 + 6 * t5;
  const double dH0 = -30 * t2 + 60 * t3 - 30 * t4, dH1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double dH2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4, dH3 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
  const double dH4 = -12 * t2 + 28 * t3 - 15 * t4, dH5 = 30 * t2 - 60 * t3 + 30 * t4;
  const double ddH0 = -60 * t + 180 * t2 - 120 * t3, ddH1 = -36 * t + 96 * t2 - 60 * t3;
  const double ddH2 = 1 - 9 * t + 18 * t2 - 10 * t3, ddH3 = 3 * t - 12 * t2 + 10 * t3;
  const double ddH4 = -24 * t + 84 * t2 - 60 * t3, ddH5 = 60 * t - 180 * t2 + 120 * t3;
  const double v = f0 * H0 + D0 * H1 + S0 * H2 + S1 * H3 + D1 * H4 + f1 * H5;
  const double dv = f0 * dH0 + D0 * dH1 + S0 * dH2 + S1 * dH3 + D1 * dH4 + f1 * dH5;
  const double ddv = f0 * ddH0 + D0 * ddH1 + S0 * ddH2 + S1 * ddH3 + D1 * ddH4 + f1 * ddH5;
  return {v, dv / h, ddv / (h * h)};
}

PainlevePoint make_point(double r, double u, double ux, double uxx, double tail, bool extrapolated) {
  PainlevePoint p;
  p.r = r;
  p.eta = std::exp(u);
  p.deta = ux * p.eta / r;
  p.ddeta = (uxx - ux + ux * ux) * p.eta / (r * r);
  p.h0 = -0.5 * u;
  p.dh0 = -0.5 * ux / r;
  p.tail = tail;
  p.extrapolated = extrapolated;
  return p;
}

}  // namespace

PainlevePoint PainleveSolution::at(double r) const {
  if (!(r > 0) || r > r_max * (1 + 1e-14)) throw std::out_of_range("PainleveSolution::at: r outside solved range");
  const double xr = std::log(r);
  if (xr < x.front()) {
    // power law eta ~ r^{u_x} continued from the first node
    const double u0 = u.front() + ux.front() * (xr - x.front());
    return make_point(r, u0, ux.front(), 0.0, tail.front(), true);
  }
  std::size_t i = std::upper_bound(x.begin(), x.end(), xr) - x.begin();
  if (i == 0) i = 1;
  if (i >= x.size()) i = x.size() - 1;
  const double h = x[i] - x[i - 1], t = (xr - x[i - 1]) / h;
  const double r0 = std::exp(x[i - 1]), r1 = std::exp(x[i]);
  const double s0 = 2.0 * r0 * r0 * std::sinh(2.0 * u[i - 1]), s1 = 2.0 * r1 * r1 * std::sinh(2.0 * u[i]);
  const auto uu = hermite5(u[i - 1], ux[i - 1], s0, u[i], ux[i], s1, h, t);
  // tail: integrand in x is r * f; its x-derivative is not stored, so cubic Hermite with the
  // integrand values suffices for table use.
  auto g = [](double rr, double uval, double uxv) {
    const double hh = -0.5 * uval, dh = -0.5 * uxv / rr;
    const double s = std::sinh(2.0 * hh);
    return rr * rr * (dh * dh - s * s);
  };
  const double g0 = g(r0, u[i - 1], ux[i - 1]), g1 = g(r1, u[i], ux[i]);
  const double t2 = t * t, t3 = t2 * t;
  const double tl = (2 * t3 - 3 * t2 + 1) * tail[i - 1] + (t3 - 2 * t2 + t) * h * g0 + (-2 * t3 + 3 * t2) * tail[i] +
                    (t3 - t2) * h * g1;
  return make_point(r, uu[0], uu[1], uu[2], tl, false);
}

std::vector<PainlevePoint> PainleveSolution::table() const {
  std::vector<PainlevePoint> t;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::exp(x[i]);
    t.push_back(make_point(r, u[i], ux[i], 2.0 * r * r * std::sinh(2.0 * u[i]), tail[i], false));
  }
  return t;
}

std::vector<ScalingRow> scaling_functions(const PainleveSolution& sol, double m, const std::vector<double>& rs) {
  if (!(m < 0)) throw std::invalid_argument("scaling_functions: mass must be negative");
  const double am = -m;
  const double pref = std::pow(sigma_constant(), -4.0) * std::sqrt(8.0 * am);
  std::vector<ScalingRow> out;
  for (double r : rs) {
    const double s = am * r;
    if (s < sol.r_min * (1 - 1e-12) || s > sol.r_max * (1 + 1e-12))
      throw std::out_of_range("scaling_functions: |m| r outside the solved range");
    const auto p = sol.at(s);
    const double e = std::exp(2.0 * p.tail);
    const double c = std::cosh(p.h0), sh = std::sinh(p.h0);
    out.push_back({r, pref * c * c * e, pref * sh * sh * e, p.eta, p.h0});
  }
  return out;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "r,eta,h0,FC,FS\n";
  for (const auto& r : rows) os << r.r << ',' << r.eta << ',' << r.h0 << ',' << r.fc << ',' << r.fs << '\n';
  return os.str();
}

double zeta_prime_minus_one() {
  const double glaisher = 1.2824271291006226369;
  return 1.0 / 12.0 - std::log(glaisher);
}

double sigma_constant() { return std::pow(2.0, 5.0 / 48.0) * std::exp(1.5 * zeta_prime_minus_one()); }

}  // namespace isg
