#include "isg/critical.hpp"

#include <algorithm>
#include <map>

#include <Eigen/Dense>

#include "isg/partitions.hpp"
#include "isg/quadrature.hpp"

namespace isg {

namespace {

const cplx kPhaseConj = std::conj(kPhase);  // e^{i pi/4}

double ray_distance(const cplx& p, const cplx& a, const cplx& u) {
  const double t = std::max(0.0, std::real(std::conj(u) * (p - a)));
  return std::abs(p - a - t * u);
}

double ray_clearance(const std::vector<cplx>& spins, std::size_t j, const cplx& u) {
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spins.size(); ++i)
    if (i != j) c = std::min(c, ray_distance(spins[i], spins[j], u));
  return c;
}

cplx horner(const std::vector<cplx>& q, const cplx& z) {
  cplx v{};
  for (std::size_t m = q.size(); m-- > 0;) v = v * z + q[m];
  return v;
}

cplx horner_derivative(const std::vector<cplx>& q, const cplx& z) {
  cplx v{};
  for (std::size_t m = q.size(); m-- > 1;) v = v * z + static_cast<double>(m) * q[m];
  return v;
}

}  // namespace

SpinBranch::SpinBranch(std::vector<cplx> spins) : spins_(std::move(spins)) {
  for (const auto& a : spins_)
    if (!in_open_disk(a)) throw domain_error("SpinBranch: spin outside the open disk");
  for (std::size_t i = 0; i < spins_.size(); ++i)
    for (std::size_t j = i + 1; j < spins_.size(); ++j)
      if (std::abs(spins_[i] - spins_[j]) < 1e-10) throw conditioning_error("SpinBranch: coincident spins");
  dir_.resize(spins_.size());
  for (std::size_t j = 0; j < spins_.size(); ++j) {
    const cplx a = spins_[j];
    const cplx base = std::abs(a) < 1e-12 ? cplx{1.0, 0.0} : a / std::abs(a);
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spins_.size(); ++i)
      if (i != j) sep = std::min(sep, std::abs(spins_[i] - a));
    cplx best = base;
    double best_c = ray_clearance(spins_, j, base);
    if (best_c < 0.5 * sep) {
      for (int k = 1; k <= 6; ++k)
        for (int s : {1, -1}) {
          const cplx u = base * std::polar(1.0, s * k * kPi / 12.0);
          const double c = ray_clearance(spins_, j, u);
          if (c > best_c + 1e-12) {
            best_c = c;
            best = u;
          }
        }
    }
    dir_[j] = best;
  }
}

cplx SpinBranch::rho(std::size_t j, const cplx& z) const {
  const cplx& u = dir_[j];
  return kI * std::sqrt(u) * std::sqrt(-(z - spins_[j]) / u);
}

double SpinBranch::cut_clearance(std::size_t j) const {
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spins_.size(); ++i)
    if (i != j) c = std::min(c, ray_distance(spins_[j], spins_[i], dir_[i]));
  return c;
}

BranchedSpinor::BranchedSpinor(std::shared_ptr<const SpinBranch> branch, std::vector<cplx> fermions,
                               std::vector<cplx> poly)
    : branch_(std::move(branch)), fermions_(std::move(fermions)), q_(std::move(poly)) {}

cplx BranchedSpinor::poly(const cplx& z) const { return horner(q_, z); }
cplx BranchedSpinor::poly_derivative(const cplx& z) const { return horner_derivative(q_, z); }

cplx BranchedSpinor::denominator(const cplx& z) const {
  cplx d{1.0, 0.0};
  for (const auto& w : fermions_) d *= (z - w) * (1.0 - std::conj(w) * z);
  for (std::size_t j = 0; j < branch_->size(); ++j)
    d *= branch_->rho(j, z) * std::sqrt(1.0 - std::conj(branch_->spin(j)) * z);
  return d;
}

cplx BranchedSpinor::operator()(const cplx& z) const { return poly(z) / denominator(z); }

cplx BranchedSpinor::denominator_without_spin(std::size_t j, const cplx& z) const {
  cplx d{1.0, 0.0};
  for (const auto& w : fermions_) d *= (z - w) * (1.0 - std::conj(w) * z);
  for (std::size_t i = 0; i < branch_->size(); ++i) {
    d *= std::sqrt(1.0 - std::conj(branch_->spin(i)) * z);
    if (i != j) d *= branch_->rho(i, z);
  }
  return d;
}

cplx BranchedSpinor::denominator_without_fermion(std::size_t k, const cplx& z) const {
  cplx d{1.0, 0.0};
  for (std::size_t l = 0; l < fermions_.size(); ++l) {
    const cplx& w = fermions_[l];
    d *= 1.0 - std::conj(w) * z;
    if (l != k) d *= z - w;
  }
  for (std::size_t i = 0; i < branch_->size(); ++i)
    d *= branch_->rho(i, z) * std::sqrt(1.0 - std::conj(branch_->spin(i)) * z);
  return d;
}

cplx BranchedSpinor::log_derivative_without_spin(std::size_t j, const cplx& z) const {
  cplx s{};
  for (const auto& w : fermions_) s += 1.0 / (z - w) - std::conj(w) / (1.0 - std::conj(w) * z);
  for (std::size_t i = 0; i < branch_->size(); ++i) {
    const cplx ab = std::conj(branch_->spin(i));
    s += -0.5 * ab / (1.0 - ab * z);
    if (i != j) s += 0.5 / (z - branch_->spin(i));
  }
  return s;
}

cplx BranchedSpinor::regular_at_spin(std::size_t j, const cplx& z) const {
  return poly(z) / denominator_without_spin(j, z);
}

cplx BranchedSpinor::beta(std::size_t j) const { return -kPhaseConj * regular_at_spin(j, branch_->spin(j)); }

cplx BranchedSpinor::lambda(std::size_t j) const {
  const cplx a = branch_->spin(j);
  const cplx dj = denominator_without_spin(j, a);
  const cplx fp = (poly_derivative(a) - poly(a) * log_derivative_without_spin(j, a)) / dj;
  return -kPhaseConj * fp;
}

cplx BranchedSpinor::residue(std::size_t k) const {
  const cplx w = fermions_.at(k);
  return poly(w) / denominator_without_fermion(k, w);
}

cplx BranchedSpinor::regular_value_at_fermion(std::size_t k) const {
  const cplx w = fermions_.at(k);
  cplx ld{};
  for (std::size_t l = 0; l < fermions_.size(); ++l) {
    const cplx& v = fermions_[l];
    ld += -std::conj(v) / (1.0 - std::conj(v) * w);
    if (l != k) ld += 1.0 / (w - v);
  }
  for (std::size_t i = 0; i < branch_->size(); ++i) {
    const cplx ab = std::conj(branch_->spin(i));
    ld += 0.5 / (w - branch_->spin(i)) - 0.5 * ab / (1.0 - ab * w);
  }
  return (poly_derivative(w) - poly(w) * ld) / denominator_without_fermion(k, w);
}

BranchedSpinor BranchedSpinor::scaled(double s) const {
  auto q = q_;
  for (auto& c : q) c *= s;
  return {branch_, fermions_, std::move(q)};
}

BranchedSpinor BranchedSpinor::plus(const BranchedSpinor& o, double s) const {
  if (o.branch_ != branch_ || o.fermions_ != fermions_ || o.q_.size() != q_.size())
    throw std::invalid_argument("BranchedSpinor::plus: different spaces");
  auto q = q_;
  for (std::size_t m = 0; m < q.size(); ++m) q[m] += s * o.q_[m];
  return {branch_, fermions_, std::move(q)};
}

BranchedSpinor one_spin_disorder_fermion(const cplx& a) {
  auto br = std::make_shared<const SpinBranch>(std::vector<cplx>{a});
  return {br, {}, {kPhase * std::sqrt(1.0 - std::norm(a))}};
}

BranchedSpinor fermion_pair(const cplx& w, const cplx& eta) {
  if (!in_open_disk(w)) throw domain_error("fermion_pair: point outside the open disk");
  auto br = std::make_shared<const SpinBranch>(std::vector<cplx>{});
  const cplx eb = std::conj(eta);
  return {br, {w}, {eb + kI * eta * w, -(eb * std::conj(w) + kI * eta)}};
}

std::vector<BranchedSpinor> build_basis(std::shared_ptr<const SpinBranch> branch, const std::vector<cplx>& fermions) {
  const int n = static_cast<int>(branch->size()), np = static_cast<int>(fermions.size());
  const int dim = n + 2 * np;
  if (dim == 0) return {};
  const int d = dim - 1;
  std::vector<BranchedSpinor> out;
  out.reserve(dim);
  for (int m = 0; 2 * m < d; ++m) {
    for (const cplx c : {cplx{1.0, 0.0}, kI}) {
      std::vector<cplx> q(d + 1);
      q[m] = c;
      q[d - m] = -kI * std::conj(c);
      out.emplace_back(branch, fermions, std::move(q));
    }
  }
  if (d % 2 == 0) {
    std::vector<cplx> q(d + 1);
    q[d / 2] = kPhase;
    out.emplace_back(branch, fermions, std::move(q));
  }
  return out;
}

std::vector<double> coefficient_vector(const BranchedSpinor& f) {
  std::vector<double> v;
  for (std::size_t j = 0; j < f.branch().size(); ++j) v.push_back(f.beta(j).real());
  for (std::size_t k = 0; k < f.fermions().size(); ++k) {
    const cplx g = f.residue(k);
    v.push_back(g.real());
    v.push_back(g.imag());
  }
  return v;
}

namespace {

std::vector<BranchedSpinor> solve_many(std::shared_ptr<const SpinBranch> branch, const std::vector<cplx>& fermions,
                                       const std::vector<std::vector<double>>& targets, SolveInfo* info) {
  for (const auto& w : fermions) {
    if (!in_open_disk(w)) throw domain_error("solve_correlation: fermion outside the open disk");
    for (const auto& a : branch->spins())
      if (std::abs(w - a) < 1e-10) throw conditioning_error("solve_correlation: fermion on a spin");
  }
  for (std::size_t k = 0; k < fermions.size(); ++k)
    for (std::size_t l = k + 1; l < fermions.size(); ++l)
      if (std::abs(fermions[k] - fermions[l]) < 1e-10) throw conditioning_error("solve_correlation: coincident fermions");
  const auto basis = build_basis(branch, fermions);
  const int N = static_cast<int>(basis.size());
  Eigen::MatrixXd M(N, N);
  for (int b = 0; b < N; ++b) {
    const auto v = coefficient_vector(basis[b]);
    for (int r = 0; r < N; ++r) M(r, b) = v[r];
  }
  if (info) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    info->condition = s(N - 1) > 0 ? s(0) / s(N - 1) : std::numeric_limits<double>::infinity();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw conditioning_error("solve_correlation: singular coefficient map");
  std::vector<BranchedSpinor> out;
  for (const auto& t : targets) {
    if (static_cast<int>(t.size()) != N) throw std::invalid_argument("solve_correlation: target size");
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(t.data(), N);
    const Eigen::VectorXd c = lu.solve(rhs);
    if (!c.allFinite()) throw conditioning_error("solve_correlation: non-finite solution");
    std::vector<cplx> q(basis.empty() ? 0 : basis[0].coefficients().size());
    for (int b = 0; b < N; ++b)
      for (std::size_t m = 0; m < q.size(); ++m) q[m] += c(b) * basis[b].coefficients()[m];
    out.emplace_back(branch, fermions, std::move(q));
  }
  return out;
}

}  // namespace

BranchedSpinor solve_correlation(std::shared_ptr<const SpinBranch> branch, const std::vector<cplx>& fermions,
                                 const std::vector<double>& target, SolveInfo* info) {
  return solve_many(std::move(branch), fermions, {target}, info).front();
}

Coefficients extract_coefficients(const BranchedSpinor& f, std::size_t j, double r) {
  const auto& br = f.branch();
  const cplx a = br.spin(j);
  if (r <= 0.0) {
    double lim = std::min(1.0 - std::abs(a), br.cut_clearance(j));
    for (std::size_t i = 0; i < br.size(); ++i)
      if (i != j) lim = std::min(lim, std::abs(br.spin(i) - a));
    for (const auto& w : f.fermions()) lim = std::min(lim, std::abs(w - a));
    r = 0.5 * lim;
  }
  const cplx b0 = contour_circle([&](const cplx& z) { return f(z) * br.rho(j, z) / (z - a); }, a, r);
  const cplx b1 = contour_circle([&](const cplx& z) { return f(z) * br.rho(j, z) / ((z - a) * (z - a)); }, a, r);
  const cplx s = -kPhaseConj / (2.0 * kPi * kI);
  return {s * b0, s * b1};
}

CriticalSystem::CriticalSystem(std::vector<cplx> spins)
    : CriticalSystem(std::make_shared<const SpinBranch>(std::move(spins))) {}

CriticalSystem::CriticalSystem(std::shared_ptr<const SpinBranch> branch)
    : branch_(std::move(branch)), disorder_cache_(branch_->size()) {}

const BranchedSpinor& CriticalSystem::disorder_fermion(std::size_t j) const {
  auto& slot = disorder_cache_.at(j);
  if (!slot) {
    std::vector<double> t(branch_->size(), 0.0);
    t[j] = 1.0;
    slot = solve_correlation(branch_, {}, t);
  }
  return *slot;
}

CriticalSystem::Kernel CriticalSystem::kernel(const cplx& x) const {
  const std::size_t n = branch_->size();
  std::vector<double> t1(n + 2, 0.0), ti(n + 2, 0.0);
  t1[n] = 1.0;       // residue 1
  ti[n + 1] = -1.0;  // residue -i
  auto s = solve_many(branch_, {x}, {t1, ti}, nullptr);
  return {std::move(s[0]), std::move(s[1]), x};
}

std::pair<cplx, cplx> CriticalSystem::Kernel::at(const cplx& z) const {
  const cplx d = k1.denominator(z);
  return {k1.poly(z) / d, ki.poly(z) / d};
}

cplx CriticalSystem::Kernel::psi(const cplx& z) const {
  const auto [a, b] = at(z);
  return a + kI * b;
}

cplx CriticalSystem::Kernel::psi_star(const cplx& z) const {
  const auto [a, b] = at(z);
  return a - kI * b;
}

cplx CriticalSystem::kernel_value(const cplx& z, const cplx& x, const cplx& eta) const {
  const auto [a, b] = kernel(x).at(z);
  return eta.real() * a + eta.imag() * b;
}

cplx CriticalSystem::psi_psistar_coincident(const cplx& u) const {
  const auto k = kernel(u);
  return k.k1.regular_value_at_fermion(0) - kI * k.ki.regular_value_at_fermion(0);
}

double CriticalSystem::energy(const cplx& u) const { return (0.5 * kI * psi_psistar_coincident(u)).real(); }

cplx CriticalSystem::critical_A(std::size_t j) const { return 0.5 * disorder_fermion(j).lambda(j); }

double CriticalSystem::disorder_pair(std::size_t i, std::size_t j) const {
  if (i == j) throw std::invalid_argument("disorder_pair: equal indices");
  return (kI * disorder_fermion(i).beta(j)).real();
}

namespace {

struct Slot {
  bool mu = false;
  cplx ci{};  // coefficient of psi^{[i]} (complex for psi, psi*)
  cplx c1c{};
  cplx z{};
  int energy_id = -1;
  bool star = false;
};

}  // namespace

cplx CriticalSystem::correlation(const std::vector<FieldInsertion>& insertions,
                                 std::optional<std::size_t> disorder) const {
  std::vector<Slot> slots;
  cplx factor{1.0, 0.0};
  if (disorder) {
    if (*disorder >= branch_->size()) throw std::out_of_range("correlation: disorder index");
    Slot s;
    s.mu = true;
    s.z = branch_->spin(*disorder);
    slots.push_back(s);
  }
  int eid = 0;
  for (const auto& ins : insertions) {
    if (!in_open_disk(ins.at)) throw domain_error("correlation: insertion outside the open disk");
    Slot s;
    s.z = ins.at;
    switch (ins.kind) {
      case FieldKind::psi:
        s.c1c = 1.0;
        s.ci = kI;
        slots.push_back(s);
        break;
      case FieldKind::psi_star:
        s.c1c = 1.0;
        s.ci = -kI;
        slots.push_back(s);
        break;
      case FieldKind::real_fermion:
        s.c1c = ins.eta.real();
        s.ci = ins.eta.imag();
        slots.push_back(s);
        break;
      case FieldKind::energy: {
        s.c1c = 1.0;
        s.ci = kI;
        s.energy_id = eid;
        slots.push_back(s);
        s.ci = -kI;
        s.star = true;
        slots.push_back(s);
        ++eid;
        factor *= 0.5 * kI;
        break;
      }
    }
  }
  if (slots.size() % 2) return {0.0, 0.0};
  if (slots.empty()) return factor;
  std::map<std::pair<double, double>, Kernel> kernels;
  auto kernel_at = [&](const cplx& x) -> const Kernel& {
    const auto key = std::make_pair(x.real(), x.imag());
    auto it = kernels.find(key);
    if (it == kernels.end()) it = kernels.emplace(key, kernel(x)).first;
    return it->second;
  };
  const int N = static_cast<int>(slots.size());
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(N, N);
  for (int s = 0; s < N; ++s)
    for (int t = s + 1; t < N; ++t) {
      const Slot& A = slots[s];
      const Slot& B = slots[t];
      cplx v;
      if (A.mu) {
        const cplx a0 = disorder_fermion(*disorder)(B.z);
        v = B.c1c * a0.real() + B.ci * a0.imag();
      } else if (A.energy_id >= 0 && A.energy_id == B.energy_id) {
        v = psi_psistar_coincident(A.z);
        if (A.star) v = -v;
      } else {
        if (std::abs(A.z - B.z) < 1e-12) throw conditioning_error("correlation: coincident fermions");
        const auto [k1, ki] = kernel_at(B.z).at(A.z);
        v = A.c1c * B.c1c * k1.real() + A.c1c * B.ci * ki.real() + A.ci * B.c1c * k1.imag() +
            A.ci * B.ci * ki.imag();
      }
      P(s, t) = v;
      P(t, s) = -v;
    }
  std::vector<int> idx(N);
  for (int i = 0; i < N; ++i) idx[i] = i;
  return factor * pfaffian_indexed<cplx>([&](int i, int j) { return P(i, j); }, idx);
}

cplx multipoint_fermion(const std::vector<cplx>& spins, const std::vector<FieldInsertion>& fermions) {
  return CriticalSystem(spins).correlation(fermions);
}

double energy_one_point(const cplx& u) {
  if (!in_open_disk(u)) throw domain_error("energy_one_point: point outside the open disk");
  return 1.0 / (1.0 - std::norm(u));
}

}  // namespace isg
