#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>

namespace isg {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;
inline const cplx kI{0.0, 1.0};

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Points of the unit disk are plain complex numbers.
using DiskPoint = cplx;

struct BoundaryPoint {
  double theta = 0.0;
  explicit BoundaryPoint(double t);
  cplx point() const { return std::polar(1.0, theta); }
};

bool in_open_disk(const cplx& z);

// Dirichlet Green's function of the unit disk, normalized so that -Laplacian G = delta.
double green(const cplx& x, const cplx& y);

// Harmonic correction (1/2pi) log|1 - conj(x) y|; defined on the closed disk.
double harmonic_part(const cplx& x, const cplx& y);

// Wirtinger derivatives of green in its first argument.
cplx green_dz(const cplx& x, const cplx& y);
cplx green_dzbar(const cplx& x, const cplx& y);
// Mixed second derivatives d_x d_y and d_x dbar_y of green.
cplx green_dz_dw(const cplx& x, const cplx& y);
cplx green_dz_dwbar(const cplx& x, const cplx& y);
// Derivatives of the diagonal harmonic part g(x,x) = (1/2pi) log(1-|x|^2).
cplx diag_harmonic_dz(const cplx& x);

class MobiusToZero {
 public:
  explicit MobiusToZero(const cplx& a);
  cplx operator()(const cplx& z) const { return (z - a_) / (1.0 - std::conj(a_) * z); }
  cplx derivative(const cplx& z) const;
  cplx inverse(const cplx& w) const { return (w + a_) / (1.0 + std::conj(a_) * w); }
  const cplx& center() const { return a_; }

 private:
  cplx a_;
};

MobiusToZero mobius_to_zero(const cplx& a);

// Counterclockwise unit tangent i e^{i theta}.
cplx boundary_tangent(const BoundaryPoint& zeta);

inline double conformal_radius(const cplx& a) { return 1.0 - std::norm(a); }

}  // namespace isg
