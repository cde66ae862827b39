#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isg/gff.hpp"
#include "isg/massive.hpp"
#include "isg/quadrature.hpp"
#include "isg/spectral.hpp"

namespace isg {

// A point of the disk carrying a charge sigma in {+-1, +-2}.
struct ChargedPoint {
  cplx x;
  int sigma = 1;
};

void require_charge(int sigma);

// Renormalized one-point coefficient at cutoff eps2 and scale t.
double vtilde1(const ChargedPoint& p, double eps2, double t, const SpectralCache& c = default_cache());

// Closed form of the two-point coefficient.
double vtilde2(const ChargedPoint& p, const ChargedPoint& q, double eps2, double t,
               const SpectralCache& c = default_cache());

// Connected two-point function of the cutoff exponentials exp(i sigma sqrt(pi) phi_eps).
double counterterm(const ChargedPoint& p, const ChargedPoint& q, double eps2, const SpectralCache& c = default_cache());

struct TimeGrid {
  double panel_width = 0.5;  // in log s
  int nodes = 16;            // Gauss-Legendre nodes per panel
};

// Heat-kernel data for a fixed point set on a log-spaced time grid over [eps2, t]:
// p(s_k, x_a, x_b) and C(s_k) = int_{eps2}^{s_k} p. Below the remainder split the kernel is
// the plane kernel, as in truncated_covariance.
class HeatTable {
 public:
  HeatTable(const SpectralCache& c, std::vector<cplx> points, double eps2, double t, const TimeGrid& grid = {});

  std::size_t size() const { return points_.size(); }
  const std::vector<cplx>& points() const { return points_; }
  double eps2() const { return eps2_; }
  double t() const { return t_; }
  std::size_t node_count() const { return s_.size(); }
  std::size_t panel_count() const { return panels_; }
  int nodes_per_panel() const { return q_; }
  double time(std::size_t k) const { return s_[k]; }
  // Panel p holds nodes p * nodes_per_panel() + i; lengths are in log s.
  double panel_length(std::size_t p) const { return h_[p]; }
  // Gauss weight of local node i on the unit panel
  double weight(int i) const { return w_[i]; }
  // Integral from the panel start to local node i of the j-th Lagrange basis function (unit panel).
  double cumulative(int i, int j) const { return S_(i, j); }
  double density(std::size_t k, int a, int b) const { return p_[k](a, b); }
  double integrated(std::size_t k, int a, int b) const { return C_[k](a, b); }
  double integrated_to_end(int a, int b) const { return Cend_(a, b); }

 private:
  std::vector<cplx> points_;
  double eps2_, t_;
  std::size_t panels_ = 0;
  int q_ = 0;
  std::vector<double> s_, h_, w_;
  Eigen::MatrixXd S_;
  std::vector<Eigen::MatrixXd> p_, C_;
  Eigen::MatrixXd Cend_;
};

// n-point coefficient (n <= 4) by the bipartition recursion on a heat table. idx selects points
// of the table, sigma the charges. Without damping the final Gaussian factor of the outermost
// s-integral is dropped.
double vtilde_on(const HeatTable& table, const std::vector<int>& idx, const std::vector<int>& sigma,
                 bool damping = true);

double vtilde_n(const std::vector<ChargedPoint>& pts, double eps2, double t, const TimeGrid& grid = {},
                bool damping = true, const SpectralCache& c = default_cache());

// Smooth bump amplitude * exp(1 - 1/(1 - s^2)) on the disk |x - center| < radius, for one charge.
struct DensityBump {
  int sigma = 1;
  cplx amplitude;
  cplx center;
  double radius = 0.1;
};

// Weighted point mass of a discretized test density.
struct Atom {
  cplx x;
  int sigma = 1;
  cplx weight;
};

struct AtomRule {
  int radial = 3;
  int angular = 6;
};

class TestDensity {
 public:
  TestDensity() = default;
  explicit TestDensity(std::vector<DensityBump> bumps);
  // Bump with charge sigma plus its conjugate partner with charge -sigma.
  static TestDensity symmetric_pair(int sigma, const cplx& amplitude, const cplx& center, double radius);

  cplx operator()(const cplx& x, int sigma) const;
  const std::vector<DensityBump>& bumps() const { return bumps_; }
  double sup_norm() const;
  bool conjugation_symmetric() const;
  bool empty() const;
  TestDensity scaled(double mu) const;
  // Polar Gauss rule on each bump support; weights carry the density values.
  std::vector<Atom> atoms(const AtomRule& rule = {}) const;

 private:
  std::vector<DensityBump> bumps_;
};

struct SeriesTerms {
  std::vector<cplx> terms;  // term n at index n - 1
  cplx value;
  double tail_estimate = 0.0;  // geometric tail from the field-independent bounds
  bool decaying = true;
};

// Truncated series of the renormalized potential for an atomic density. The coefficient
// tensors are built once; evaluation at a field only needs the field at the atoms.
class RenormalizedPotential {
 public:
  RenormalizedPotential(std::vector<Atom> atoms, double eps2, double t, int max_order = 3,
                        const SpectralCache& c = default_cache(), const TimeGrid& grid = {});
  const std::vector<Atom>& atoms() const { return atoms_; }
  int max_order() const { return N_; }
  SeriesTerms evaluate(const std::vector<double>& field_at_atoms) const;
  SeriesTerms evaluate(const std::function<double(const cplx&)>& field) const;
  // Field-independent bounds sum |w| |coefficient| per order; decay of these sets the threshold.
  const std::vector<double>& term_bounds() const { return bounds_; }

 private:
  std::vector<Atom> atoms_;
  int N_;
  std::vector<double> v1_;
  Eigen::MatrixXd v2_;
  struct Triple {
    int a, b, c;
    cplx coef;  // multiplicity, weights and coefficient
  };
  std::vector<Triple> v3_;
  std::vector<double> bounds_;
};

SeriesTerms renormalized_potential(const TestDensity& eta, const std::function<double(const cplx&)>& field, double eps2,
                                   double t, int max_order = 3, const AtomRule& rule = {},
                                   const SpectralCache& c = default_cache());

// Bare potential at cutoff eps2: sum_a w_a c_sigma eps^{-sigma^2/4} exp(i sigma sqrt(pi) phi(x_a)).
cplx bare_potential(const std::vector<Atom>& atoms, double eps2, const std::vector<double>& field_at_atoms);
// Its Gaussian mean over the cutoff field.
cplx bare_potential_mean(const std::vector<Atom>& atoms, double eps2, const SpectralCache& c = default_cache());

struct PartitionCheck {
  cplx lhs, rhs;
  double se_lhs = 0.0, se_rhs = 0.0;
  double se = 0.0;  // combined
  double tail_max = 0.0;
  bool series_decaying = true;
  std::string diagnostic;
  bool agrees(double k = 3.0) const { return std::abs(lhs - rhs) <= k * se; }
};

// Monte Carlo estimates of E_eps[exp(-v_eps)] and E_t[exp(-u_t)] for the same atomic density.
PartitionCheck mc_partition_check(const TestDensity& eta, double eps2, double t, std::size_t samples,
                                  std::uint64_t seed, int max_order = 3, const AtomRule& rule = {},
                                  const SpectralCache& c = default_cache());

// Monte Carlo estimate of E_eps[exp(-v_eps)] alone.
PartitionCheck mc_bare_partition(const TestDensity& eta, double eps2, std::size_t samples, std::uint64_t seed,
                                 const AtomRule& rule = {}, const SpectralCache& c = default_cache());

struct SgOptions {
  double tol = 1e-7;  // per 2-D integral, relative to the density sup-norm
  std::size_t max_cells = 200000;
};

// Integrand of the n-th Taylor coefficient of a sine-Gordon correlation at mass points b.
// Observable factors of kind cos2 take part in the counterterm sum; the rest form the fixed block.
cplx sg_taylor_integrand(const std::vector<TrigFactor>& observable, const std::vector<cplx>& b);

// n-th derivative in the coupling at zero (n <= 2) for the density rho.
SeriesCoefficient sg_taylor(int n, const std::vector<TrigFactor>& observable, const MassProfile& rho,
                            const SgOptions& opt = {});

// Smeared variant: each observable field is integrated against its own bump.
struct SmearedField {
  Trig kind;
  MassProfile g;
};
SeriesCoefficient sg_taylor_smeared(int n, const std::vector<SmearedField>& fields, const MassProfile& rho,
                                    const SgOptions& opt = {});

}  // namespace isg
