#include "isg/disk.hpp"

#include <cmath>

namespace isg {

BoundaryPoint::BoundaryPoint(double t) {
  double r = std::fmod(t, 2.0 * kPi);
  if (r < 0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;
  theta = r;
}

bool in_open_disk(const cplx& z) { return std::norm(z) < 1.0; }

static void require_bulk(const cplx& z, const char* what) {
  if (!in_open_disk(z)) throw domain_error(std::string(what) + ": point outside the open disk");
}

double green(const cplx& x, const cplx& y) {
  require_bulk(x, "green");
  require_bulk(y, "green");
  const double d = std::abs(x - y);
  if (d == 0.0) throw domain_error("green: coincident points");
  return (std::log(std::abs(1.0 - std::conj(x) * y)) - std::log(d)) / (2.0 * kPi);
}

double harmonic_part(const cplx& x, const cplx& y) {
  if (std::norm(x) > 1.0 || std::norm(y) > 1.0)
    throw domain_error("harmonic_part: point outside the closed disk");
  return std::log(std::abs(1.0 - std::conj(x) * y)) / (2.0 * kPi);
}

// G = -(1/4pi)[log(x-y) + log(conj(x-y))] + (1/4pi)[log(1 - conj(x) y) + log(1 - x conj(y))]
cplx green_dz(const cplx& x, const cplx& y) {
  return (-1.0 / (x - y) - std::conj(y) / (1.0 - x * std::conj(y))) / (4.0 * kPi);
}

cplx green_dzbar(const cplx& x, const cplx& y) { return std::conj(green_dz(x, y)); }

cplx green_dz_dw(const cplx& x, const cplx& y) { return -1.0 / (4.0 * kPi * (x - y) * (x - y)); }

cplx green_dz_dwbar(const cplx& x, const cplx& y) {
  const cplx q = 1.0 - x * std::conj(y);
  return -1.0 / (4.0 * kPi * q * q);
}

cplx diag_harmonic_dz(const cplx& x) { return -std::conj(x) / (2.0 * kPi * (1.0 - std::norm(x))); }

MobiusToZero::MobiusToZero(const cplx& a) : a_(a) {
  if (!in_open_disk(a)) throw domain_error("mobius_to_zero: |a| >= 1");
}

cplx MobiusToZero::derivative(const cplx& z) const {
  const cplx q = 1.0 - std::conj(a_) * z;
  return (1.0 - std::norm(a_)) / (q * q);
}

MobiusToZero mobius_to_zero(const cplx& a) { return MobiusToZero(a); }

cplx boundary_tangent(const BoundaryPoint& zeta) { return kI * zeta.point(); }

}  // namespace isg
