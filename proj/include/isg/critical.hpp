#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "isg/disk.hpp"

namespace isg {

struct conditioning_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const cplx kPhase = std::polar(1.0, -kPi / 4);  // e^{-i pi/4}

// Spin positions with the reference branch of sqrt(z - a_j): principal root with the cut
// running along a ray from a_j to the boundary, outward by default and turned away from
// the other spins when one of them lies near the outward ray.
class SpinBranch {
 public:
  explicit SpinBranch(std::vector<cplx> spins);
  std::size_t size() const { return spins_.size(); }
  const std::vector<cplx>& spins() const { return spins_; }
  const cplx& spin(std::size_t j) const { return spins_[j]; }
  const cplx& cut_direction(std::size_t j) const { return dir_[j]; }
  // rho_j(z), rho_j^2 = z - a_j
  cplx rho(std::size_t j, const cplx& z) const;
  // Smallest distance from a spin to another spin's cut.
  double cut_clearance(std::size_t j) const;

 private:
  std::vector<cplx> spins_, dir_;
};

// f(z) = Q(z) / ( prod_k (z - w_k)(1 - conj(w_k) z) * prod_j rho_j(z) sqrt(1 - conj(a_j) z) ).
// Expansions: f = -e^{-i pi/4} [ beta_j rho_j^{-1} + lambda_j rho_j + ... ] at spins,
// f = gamma_k / (z - w_k) + O(1) at fermion points.
class BranchedSpinor {
 public:
  BranchedSpinor() = default;
  BranchedSpinor(std::shared_ptr<const SpinBranch> branch, std::vector<cplx> fermions, std::vector<cplx> poly);

  cplx operator()(const cplx& z) const;
  // Denominator factor and polynomial separately (shared evaluation by kernels).
  cplx denominator(const cplx& z) const;
  cplx poly(const cplx& z) const;
  cplx poly_derivative(const cplx& z) const;

  // f * rho_j, holomorphic near a_j
  cplx regular_at_spin(std::size_t j, const cplx& z) const;
  cplx beta(std::size_t j) const;
  cplx lambda(std::size_t j) const;
  cplx residue(std::size_t k) const;
  // Limit of f(z) - residue/(z - w_k) at z = w_k.
  cplx regular_value_at_fermion(std::size_t k) const;

  const SpinBranch& branch() const { return *branch_; }
  std::shared_ptr<const SpinBranch> branch_ptr() const { return branch_; }
  const std::vector<cplx>& fermions() const { return fermions_; }
  const std::vector<cplx>& coefficients() const { return q_; }
  std::vector<cplx> branch_points() const { return branch_->spins(); }

  BranchedSpinor scaled(double s) const;
  BranchedSpinor plus(const BranchedSpinor& o, double s = 1.0) const;

 private:
  std::shared_ptr<const SpinBranch> branch_;
  std::vector<cplx> fermions_;
  std::vector<cplx> q_;  // Q coefficients, ascending powers
  // d/dz log of the denominator with the factor rho_j removed
  cplx log_derivative_without_spin(std::size_t j, const cplx& z) const;
  cplx denominator_without_spin(std::size_t j, const cplx& z) const;
  cplx denominator_without_fermion(std::size_t k, const cplx& z) const;
};

// Closed forms.
BranchedSpinor one_spin_disorder_fermion(const cplx& a);
BranchedSpinor fermion_pair(const cplx& w, const cplx& eta);

// Real basis of the critical space for the given spins and fermions (dimension n + 2n').
std::vector<BranchedSpinor> build_basis(std::shared_ptr<const SpinBranch> branch, const std::vector<cplx>& fermions);

// Coefficient vector (Re beta_j ; Re gamma_k, Im gamma_k).
std::vector<double> coefficient_vector(const BranchedSpinor& f);

struct SolveInfo {
  double condition = 0.0;
};

BranchedSpinor solve_correlation(std::shared_ptr<const SpinBranch> branch, const std::vector<cplx>& fermions,
                                 const std::vector<double>& target, SolveInfo* info = nullptr);

struct Coefficients {
  cplx beta, lambda;
};
// Contour extraction around the spin with index j (radius r, default from the clearance).
Coefficients extract_coefficients(const BranchedSpinor& f, std::size_t j, double r = 0.0);

enum class FieldKind { psi, psi_star, real_fermion, energy };

struct FieldInsertion {
  FieldKind kind;
  cplx at;
  cplx eta{1.0, 0.0};  // phase of a real fermion
};

// Critical correlations normalized by the pure spin correlation, for fixed spins.
class CriticalSystem {
 public:
  explicit CriticalSystem(std::vector<cplx> spins);
  explicit CriticalSystem(std::shared_ptr<const SpinBranch> branch);

  const SpinBranch& branch() const { return *branch_; }
  std::shared_ptr<const SpinBranch> branch_ptr() const { return branch_; }

  // <mu_{a_j} sigma_{others} psi_z> / <sigma_A>
  const BranchedSpinor& disorder_fermion(std::size_t j) const;

  struct Kernel {
    BranchedSpinor k1, ki;  // K^{[1]}(., x), K^{[i]}(., x)
    cplx x;
    // both values at z sharing one denominator
    std::pair<cplx, cplx> at(const cplx& z) const;
    cplx psi(const cplx& z) const;       // <psi_z psi_x>
    cplx psi_star(const cplx& z) const;  // <psi_z psi*_x>
  };
  Kernel kernel(const cplx& x) const;
  // <psi_z psi^{[eta]}_x>
  cplx kernel_value(const cplx& z, const cplx& x, const cplx& eta) const;

  // <sigma_A eps_u> / <sigma_A> with eps = (i/2) psi psi*
  double energy(const cplx& u) const;
  // coincident <psi_u psi*_u>
  cplx psi_psistar_coincident(const cplx& u) const;

  // half the lambda coefficient of the disorder fermion at a_j
  cplx critical_A(std::size_t j) const;
  // <mu_{a_i} mu_{a_j} sigma_rest> / <sigma_A> = i beta(a_j; f_i)
  double disorder_pair(std::size_t i, std::size_t j) const;

  // General query: at most one disorder (given as index into spins), fermions and energies.
  cplx correlation(const std::vector<FieldInsertion>& insertions, std::optional<std::size_t> disorder = {}) const;

 private:
  std::shared_ptr<const SpinBranch> branch_;
  mutable std::vector<std::optional<BranchedSpinor>> disorder_cache_;
};

// Multipoint fermion correlation with optional spins (Pfaffian of pair values).
cplx multipoint_fermion(const std::vector<cplx>& spins, const std::vector<FieldInsertion>& fermions);

double energy_one_point(const cplx& u);

// Real-linear star combination Re(c) pair1 - Im(c) pair_i.
template <class T>
T star_combine(const cplx& c, const T& pair1, const T& pair_i) {
  return c.real() * pair1 - c.imag() * pair_i;
}

}  // namespace isg
