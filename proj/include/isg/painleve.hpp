#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace isg {

struct painleve_domain_error : std::runtime_error {
  double r;
  painleve_domain_error(const std::string& m, double at) : std::runtime_error(m), r(at) {}
};

struct PainlevePoint {
  double r = 0.0;
  double eta = 0.0, deta = 0.0;
  double ddeta = 0.0;  // second derivative of the interpolant (not taken from the ODE)
  double h0 = 0.0, dh0 = 0.0;
  double tail = 0.0;  // integral from infinity to r of s [ (h0')^2 - sinh^2(2 h0) ] ds
  bool extrapolated = false;
};

// Solution of eta'' = eta'^2/eta - eta'/r + eta^3 - 1/eta decaying to 1 like 1 - (2/pi) K0(2r).
// Internally u = log(eta) is integrated in x = log r, where u_xx = 2 r^2 sinh(2u).
class PainleveSolution {
 public:
  std::vector<double> x, u, ux, tail;  // log-grid nodes
  double r_min = 0.0, r_max = 0.0;

  // Quintic Hermite interpolation between nodes; below r_min a power law in r is used and flagged.
  PainlevePoint at(double r) const;
  std::vector<PainlevePoint> table() const;
};

// Integrates inward from r_max with the Bessel seed; nodes on a logarithmic grid.
PainleveSolution solve_eta(double r_min = 1e-3, double r_max = 8.0, double tol = 1e-13, int nodes = 4001);

// Right-hand side of the Painleve III equation in the original variables.
double painleve_rhs(double r, double eta, double deta);

struct ScalingRow {
  double r = 0.0;
  double fc = 0.0, fs = 0.0, eta = 0.0, h0 = 0.0;
};

// Two-point cos/sin scaling functions at distances rs for a negative mass m.
std::vector<ScalingRow> scaling_functions(const PainleveSolution& sol, double m, const std::vector<double>& rs);

// CSV with columns r, eta, h0, FC, FS.
std::string scaling_csv(const std::vector<ScalingRow>& rows);

double zeta_prime_minus_one();
double sigma_constant();

// Modified Bessel functions K0, K1 used for the seed.
double bessel_k0(double x);
double bessel_k1(double x);

}  // namespace isg
