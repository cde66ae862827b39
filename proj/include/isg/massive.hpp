#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "isg/critical.hpp"
#include "isg/quadrature.hpp"

namespace isg {

struct path_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Smooth bump amplitude * exp(1 - 1/(1 - s^2)), s = |x - center| / radius.
class MassProfile {
 public:
  MassProfile(double amplitude, const cplx& center, double radius);
  double operator()(const cplx& x) const;
  // d alpha / dz (Wirtinger)
  cplx dz(const cplx& x) const;
  double sup_norm() const { return std::abs(amp_); }
  double gradient_bound() const;
  DiskRegion support() const { return {c_, r_}; }
  bool contains(const cplx& x) const { return std::abs(x - c_) < r_; }
  MassProfile scaled(double s) const { return {amp_ * s, c_, r_}; }
  double amplitude() const { return amp_; }

 private:
  double amp_;
  cplx c_;
  double r_;
};

struct MassiveOptions {
  double tol = 1e-8;          // absolute tolerance of one 2-D integral
  std::size_t max_cells = 400000;
  int interpolation_degree = 16;  // Chebyshev degree of the first-order term on the mass support
  double interpolation_tol = 1e-6;
  int contour_points = 64;
};

struct SeriesCoefficient {
  cplx value;
  double error = 0.0;
};

// Disorder-fermion series f = sum_p (-m)^p A_p for the mass profile m * alpha, expanded at
// m = 0 with the disorder at spins[0].
class MassiveSeries {
 public:
  MassiveSeries(std::vector<cplx> spins, MassProfile alpha, MassiveOptions opt = {});

  const CriticalSystem& critical() const { return sys_; }
  const MassProfile& profile() const { return alpha_; }

  cplx A0(const cplx& z) const { return sys_.disorder_fermion(0)(z); }
  // Kernel route: (1/pi) int [i alpha conj(A_0)] star K(z, .)
  SeriesCoefficient A1(const cplx& z) const;
  // Energy route: (1/pi) int alpha(u) [<mu psi_z eps_u> - <mu psi_z><eps_u>] / <sigma>
  SeriesCoefficient A1_energy(const cplx& z) const;
  SeriesCoefficient A2(const cplx& z) const;
  cplx term(int p, const cplx& z) const;

  // integrands of the two first-order routes at a single mass point u
  cplx star_integrand(const cplx& z, const cplx& u) const;
  cplx energy_integrand(const cplx& z, const cplx& u) const;

  // sum_{p <= P} (-m)^p A_p(z)
  cplx truncated(double m, const cplx& z, int P) const;

  // Contour plus area-corrected extraction at spins[0] for A_p, p in {1, 2}.
  Coefficients extract(int p, double r) const;
  // The same coefficients with the extraction moved inside the mass integral
  // (kernel coefficients at the spin, principal value about the spin).
  Coefficients kernel_coefficients(int p) const;

  // First-order term interpolated on the mass support (requires the spins outside it).
  cplx A1_interpolated(const cplx& z) const;

 private:
  CriticalSystem sys_;
  MassProfile alpha_;
  MassiveOptions opt_;
  mutable std::vector<cplx> cheb_;  // (deg+1)^2 coefficients
  mutable bool cheb_ready_ = false;
  void build_interpolant() const;
  std::vector<SingularityHint> spin_hints() const;
  template <class F>
  cplx principal_area(F&& f, const cplx& a, double r) const;
};

// Coefficient formula for one spin with the bump away from the spin.
Coefficients coefficient_beta_lambda(const MassiveSeries& s, int p, double r = 0.0);

// Increment of log(<sigma_A>_{m alpha}/<sigma_A>_0) when adding spins[0] to the others, by
// integrating the series coefficient along a polyline from a boundary point to spins[0].
struct SpinPath {
  std::vector<cplx> vertices;  // first on the unit circle, last equal to the spin
};
SpinPath radial_path(const cplx& a);
double spin_log_ratio(double m, const MassProfile& alpha, const std::vector<cplx>& spins, const SpinPath& path,
                      int P = 1, const MassiveOptions& opt = {}, double min_distance = 0.05);
// First-order coefficient of spin_log_ratio (the m^1 term) with its quadrature error.
SeriesCoefficient spin_log_ratio_first_order(const MassProfile& alpha, const std::vector<cplx>& spins,
                                             const SpinPath& path, const MassiveOptions& opt = {},
                                             double min_distance = 0.05);

// m^p coefficient of log(<sigma_A>_{m alpha}/<sigma_A>_0) from critical energy correlations.
SeriesCoefficient pure_spin_taylor(int p, const std::vector<cplx>& spins, const MassProfile& alpha,
                                   const MassiveOptions& opt = {});

// m^p coefficient of <(sigma sigma~)_A (eps + eps~)_W>_{m alpha} / <(sigma sigma~)_A>_0 for at most
// one energy point.
SeriesCoefficient doubled_taylor(int p, const std::vector<cplx>& spins, const std::vector<cplx>& energies,
                                 const MassProfile& alpha, const MassiveOptions& opt = {});

// <sigma_A eps_U> / <sigma_A> for a list of energy points.
double spin_energy_ratio(const CriticalSystem& sys, const std::vector<cplx>& energies);

}  // namespace isg
