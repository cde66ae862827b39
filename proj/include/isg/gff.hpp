#pragma once

#include <functional>
#include <vector>

#include "isg/disk.hpp"

namespace isg {

inline const double kSqrtPi = std::sqrt(kPi);

struct Charge {
  cplx x;
  double gamma = 0.0;
};

enum class Deriv { none, dz, dzbar };

struct FieldPoint {
  cplx y;
  Deriv d = Deriv::none;
};

// Green function data used by the charge correlators; the default is the unit disk.
struct GreenModel {
  std::function<double(const cplx&, const cplx&)> green;
  std::function<double(const cplx&)> diag;  // regular part g(x, x)
};
const GreenModel& disk_green_model();

// Wick-ordering constant, the epsilon-free factor exp(gamma^2 (gamma_E - log 4) / 8 pi).
double wick_constant(double gamma);

// <prod_j :exp(i gamma_j phi(x_j)):> for the massless field.
double charge_correlation(const std::vector<Charge>& cfg, const GreenModel& gm = disk_green_model());

// D1 D2 G(y1, y2) for derivative tags D in {none, d, dbar} acting on each argument.
cplx green_derivative(const cplx& y1, Deriv d1, const cplx& y2, Deriv d2);

// <prod_k D_k phi(y_k) prod_j :exp(i gamma_j phi(x_j)):>.
cplx mixed_correlation(const std::vector<Charge>& cfg, const std::vector<FieldPoint>& fields);

enum class Trig { cos1, sin1, cos2, sin2 };

struct TrigFactor {
  Trig kind;
  cplx x;
};

// Correlation of Wick-ordered trig factors (cos/sin of sqrt(pi) phi or 2 sqrt(pi) phi) with
// optional plain field insertions.
cplx trig_correlation(const std::vector<TrigFactor>& factors, const std::vector<FieldPoint>& fields = {},
                      const GreenModel& gm = disk_green_model());

// Connected two-point function of :cos(2 sqrt(pi) phi):.
double counterterm_kernel(const cplx& x, const cplx& y);

// Joint cumulant of the random variables given by products of factors in each block.
cplx gff_cumulant(const std::vector<TrigFactor>& factors, const std::vector<std::vector<int>>& blocks,
                  const GreenModel& gm = disk_green_model());

}  // namespace isg
