#include "isg/sine_gordon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include <boost/math/special_functions/legendre.hpp>

#include "isg/partitions.hpp"

namespace isg {

namespace {

constexpr double kInfTime = std::numeric_limits<double>::infinity();

double charge_constant(int sigma) { return wick_constant(sigma * kSqrtPi); }

// c_sigma eps^{-sigma^2/4}
double bare_factor(int sigma, double eps2) {
  return charge_constant(sigma) * std::exp(-0.125 * sigma * sigma * std::log(eps2));
}

void require_times(double eps2, double t) {
  if (!(eps2 > 0.0) || !(t > eps2)) throw std::invalid_argument("need 0 < eps2 < t");
}

double bump_shape(double s) { return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

}  // namespace

void require_charge(int sigma) {
  if (sigma != 1 && sigma != -1 && sigma != 2 && sigma != -2) throw std::invalid_argument("charge must be +-1 or +-2");
}

double vtilde1(const ChargedPoint& p, double eps2, double t, const SpectralCache& c) {
  require_charge(p.sigma);
  require_times(eps2, t);
  const double C = truncated_covariance(c, eps2, t, p.x, p.x);
  return bare_factor(p.sigma, eps2) * std::exp(-0.5 * kPi * p.sigma * p.sigma * C);
}

double vtilde2(const ChargedPoint& p, const ChargedPoint& q, double eps2, double t, const SpectralCache& c) {
  if (p.x == q.x) throw domain_error("vtilde2: coincident points");
  if (std::pair{q.x.real(), q.x.imag()} < std::pair{p.x.real(), p.x.imag()}) return vtilde2(q, p, eps2, t, c);
  const double a = vtilde1(p, eps2, t, c), b = vtilde1(q, eps2, t, c);
  const double C = truncated_covariance(c, eps2, t, p.x, q.x);
  return -a * b * std::expm1(-kPi * p.sigma * q.sigma * C);
}

double counterterm(const ChargedPoint& p, const ChargedPoint& q, double eps2, const SpectralCache& c) {
  require_charge(p.sigma);
  require_charge(q.sigma);
  if (!(eps2 > 0.0)) throw std::invalid_argument("counterterm: need eps2 > 0");
  const double C11 = truncated_covariance(c, eps2, kInfTime, p.x, p.x);
  const double C22 = truncated_covariance(c, eps2, kInfTime, q.x, q.x);
  const double C12 = truncated_covariance(c, eps2, kInfTime, p.x, q.x);
  const double s1 = p.sigma, s2 = q.sigma;
  return bare_factor(p.sigma, eps2) * bare_factor(q.sigma, eps2) *
         std::exp(-0.5 * kPi * (s1 * s1 * C11 + s2 * s2 * C22)) * std::expm1(-kPi * s1 * s2 * C12);
}

HeatTable::HeatTable(const SpectralCache& c, std::vector<cplx> points, double eps2, double t, const TimeGrid& grid)
    : points_(std::move(points)), eps2_(eps2), t_(t), q_(grid.nodes) {
  require_times(eps2, t);
  if (grid.nodes < 2 || !(grid.panel_width > 0.0)) throw std::invalid_argument("HeatTable: bad grid");
  for (const auto& x : points_)
    if (!in_open_disk(x)) throw domain_error("HeatTable: point outside the disk");
  const double L = c.radius();
  const double s0 = kRemainderSplit * L * L;

  // Panels in u = log s with a breakpoint at the remainder split.
  std::vector<double> cuts{std::log(eps2)};
  if (eps2 < s0 && s0 < t) cuts.push_back(std::log(s0));
  cuts.push_back(std::log(t));
  std::vector<double> starts;
  for (std::size_t g = 0; g + 1 < cuts.size(); ++g) {
    const double len = cuts[g + 1] - cuts[g];
    const int np = std::max(1, static_cast<int>(std::ceil(len / grid.panel_width - 1e-12)));
    for (int k = 0; k < np; ++k) {
      starts.push_back(cuts[g] + len * k / np);
      h_.push_back(len / np);
    }
  }
  panels_ = h_.size();

  std::vector<double> x, w;
  gauss_nodes(q_, 0.0, 1.0, x, w);
  w_ = w;
  // Cumulative integration matrix through the Legendre expansion on [-1, 1].
  S_.setZero(q_, q_);
  for (int j = 0; j < q_; ++j) {
    const double yj = 2.0 * x[j] - 1.0;
    for (int m = 0; m < q_; ++m) {
      const double a = (2.0 * m + 1.0) / 2.0 * (2.0 * w[j]) * boost::math::legendre_p(m, yj);
      for (int i = 0; i < q_; ++i) {
        const double yi = 2.0 * x[i] - 1.0;
        const double prim = m == 0 ? yi + 1.0
                                   : (boost::math::legendre_p(m + 1, yi) - boost::math::legendre_p(m - 1, yi)) /
                                         (2.0 * m + 1.0);
        S_(i, j) += 0.5 * a * prim;
      }
    }
  }
  for (std::size_t p = 0; p < panels_; ++p)
    for (int i = 0; i < q_; ++i) s_.push_back(std::exp(starts[p] + h_[p] * x[i]));

  const int n = static_cast<int>(points_.size());
  const bool spectral = t > s0;
  const double lo = std::max(eps2, s0);
  Eigen::MatrixXd Er, Ei;
  Eigen::VectorXd lam;
  if (spectral) {
    const std::size_t M = c.modes_for(lo);
    Er.resize(n, M);
    Ei.resize(n, M);
    lam.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
      const Mode& md = c.modes()[m];
      const double mult = md.n > 0 ? std::sqrt(2.0) : 1.0;
      lam(m) = (md.zero / L) * (md.zero / L);
      for (int a = 0; a < n; ++a) {
        const cplx e = c.eigenfunction(md.n, md.k, points_[a]);
        Er(a, m) = mult * e.real();
        Ei(a, m) = mult * e.imag();
      }
    }
  }
  auto modal = [&](const Eigen::VectorXd& d) -> Eigen::MatrixXd {
    return Er * d.asDiagonal() * Er.transpose() + Ei * d.asDiagonal() * Ei.transpose();
  };
  auto plane_int = [&](double a, double b) {
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) R(i, j) = R(j, i) = plane_heat_integral(a, b, points_[i], points_[j]);
    return R;
  };
  Eigen::MatrixXd base = Eigen::MatrixXd::Zero(n, n);
  if (spectral && eps2 < s0) base = plane_int(eps2, s0);
  auto integrated_at = [&](double s) -> Eigen::MatrixXd {
    if (s <= s0 || !spectral) return plane_int(eps2, s);
    Eigen::VectorXd d(lam.size());
    for (int m = 0; m < lam.size(); ++m) d(m) = (std::exp(-lo * lam(m)) - std::exp(-s * lam(m))) / lam(m);
    return base + modal(d);
  };
  p_.reserve(s_.size());
  C_.reserve(s_.size());
  for (double s : s_) {
    if (s <= s0 || !spectral) {
      Eigen::MatrixXd P(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) P(i, j) = P(j, i) = plane_heat_kernel(s, points_[i], points_[j]);
      p_.push_back(P);
    } else {
      Eigen::VectorXd d(lam.size());
      for (int m = 0; m < lam.size(); ++m) d(m) = std::exp(-s * lam(m));
      p_.push_back(modal(d));
    }
    C_.push_back(integrated_at(s));
  }
  Cend_ = integrated_at(t);
}

double vtilde_on(const HeatTable& T, const std::vector<int>& idx, const std::vector<int>& sigma, bool damping) {
  const int n = static_cast<int>(idx.size());
  if (n < 1 || n > 4 || sigma.size() != idx.size()) throw std::invalid_argument("vtilde_on: need 1 <= n <= 4");
  for (int s : sigma) require_charge(s);
  for (int i : idx)
    if (i < 0 || i >= static_cast<int>(T.size())) throw std::out_of_range("vtilde_on: point index");
  const double eps2 = T.eps2();
  const std::size_t K = T.node_count();
  const int q = T.nodes_per_panel();
  const int full = (1 << n) - 1;

  auto gamma_at = [&](int mask, auto&& C) {
    double g = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!((mask >> i) & 1)) continue;
      g += 0.5 * kPi * sigma[i] * sigma[i] * C(idx[i], idx[i]);
      for (int j = i + 1; j < n; ++j)
        if ((mask >> j) & 1) g += kPi * sigma[i] * sigma[j] * C(idx[i], idx[j]);
    }
    return g;
  };
  auto one_point = [&](int i, double Cii) {
    return bare_factor(sigma[i], eps2) * std::exp(-0.5 * kPi * sigma[i] * sigma[i] * Cii);
  };
  if (n == 1) return one_point(0, T.integrated_to_end(idx[0], idx[0]));

  // v[mask][k]: coefficient of the sub-configuration at node k.
  std::vector<std::vector<double>> v(full + 1);
  std::vector<int> order;
  for (int m = 1; m <= full; ++m) order.push_back(m);
  std::stable_sort(order.begin(), order.end(),
                   [](int a, int b) { return __builtin_popcount(a) < __builtin_popcount(b); });
  double result = 0.0;
  std::vector<double> F(K), G(K);
  for (int mask : order) {
    const int size = __builtin_popcount(mask);
    if (size == 1) {
      const int i = __builtin_ctz(mask);
      v[mask].resize(K);
      for (std::size_t k = 0; k < K; ++k) v[mask][k] = one_point(i, T.integrated(k, idx[i], idx[i]));
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) {
      double f = 0.0;
      for (int sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
        const int rest = mask ^ sub;
        double X = 0.0;
        for (int i = 0; i < n; ++i) {
          if (!((sub >> i) & 1)) continue;
          for (int j = 0; j < n; ++j)
            if ((rest >> j) & 1) X += kPi * sigma[i] * sigma[j] * T.density(k, idx[i], idx[j]);
        }
        f += v[sub][k] * v[rest][k] * X;
      }
      F[k] = 0.5 * f * T.time(k);  // d s = s d(log s)
      const double g = gamma_at(mask, [&](int a, int b) { return T.integrated(k, a, b); });
      G[k] = std::exp(g) * F[k];
    }
    const double g_end = gamma_at(mask, [&](int a, int b) { return T.integrated_to_end(a, b); });
    if (mask == full) {
      detail::CompensatedSum<double> acc;
      for (std::size_t p = 0; p < T.panel_count(); ++p)
        for (int i = 0; i < q; ++i) {
          const std::size_t k = p * q + i;
          acc.add(T.panel_length(p) * T.weight(i) * (damping ? G[k] : F[k]));
        }
      result = damping ? std::exp(-g_end) * acc.value() : acc.value();
      break;
    }
    v[mask].resize(K);
    double start = 0.0;
    for (std::size_t p = 0; p < T.panel_count(); ++p) {
      const double h = T.panel_length(p);
      for (int i = 0; i < q; ++i) {
        double part = 0.0;
        for (int j = 0; j < q; ++j) part += T.cumulative(i, j) * G[p * q + j];
        const std::size_t k = p * q + i;
        const double g = gamma_at(mask, [&](int a, int b) { return T.integrated(k, a, b); });
        v[mask][k] = std::exp(-g) * (start + h * part);
      }
      double whole = 0.0;
      for (int j = 0; j < q; ++j) whole += T.weight(j) * G[p * q + j];
      start += h * whole;
    }
  }
  return result;
}

double vtilde_n(const std::vector<ChargedPoint>& pts, double eps2, double t, const TimeGrid& grid, bool damping,
                const SpectralCache& c) {
  std::vector<cplx> xs;
  std::vector<int> idx, sig;
  for (const auto& p : pts) {
    require_charge(p.sigma);
    auto it = std::find(xs.begin(), xs.end(), p.x);
    if (it == xs.end()) {
      idx.push_back(static_cast<int>(xs.size()));
      xs.push_back(p.x);
    } else {
      idx.push_back(static_cast<int>(it - xs.begin()));
    }
    sig.push_back(p.sigma);
  }
  if (xs.size() != pts.size()) throw domain_error("vtilde_n: coincident points");
  const HeatTable T(c, xs, eps2, t, grid);
  return vtilde_on(T, idx, sig, damping);
}

TestDensity::TestDensity(std::vector<DensityBump> bumps) : bumps_(std::move(bumps)) {
  for (const auto& b : bumps_) {
    require_charge(b.sigma);
    if (!(b.radius > 0.0) || std::abs(b.center) + b.radius >= 1.0)
      throw domain_error("TestDensity: support must lie strictly inside the disk");
  }
}

TestDensity TestDensity::symmetric_pair(int sigma, const cplx& amplitude, const cplx& center, double radius) {
  return TestDensity({{sigma, amplitude, center, radius}, {-sigma, std::conj(amplitude), center, radius}});
}

cplx TestDensity::operator()(const cplx& x, int sigma) const {
  cplx v = 0.0;
  for (const auto& b : bumps_)
    if (b.sigma == sigma) v += b.amplitude * bump_shape(std::abs(x - b.center) / b.radius);
  return v;
}

double TestDensity::sup_norm() const {
  double m = 0.0;
  for (int s : {-2, -1, 1, 2}) {
    double tot = 0.0;
    for (const auto& b : bumps_)
      if (b.sigma == s) tot += std::abs(b.amplitude);
    m = std::max(m, tot);
  }
  return m;
}

bool TestDensity::conjugation_symmetric() const {
  for (const auto& b : bumps_) {
    bool found = false;
    for (const auto& o : bumps_)
      if (o.sigma == -b.sigma && o.center == b.center && o.radius == b.radius && o.amplitude == std::conj(b.amplitude))
        found = true;
    if (!found) return false;
  }
  return true;
}

bool TestDensity::empty() const {
  return std::all_of(bumps_.begin(), bumps_.end(), [](const DensityBump& b) { return b.amplitude == cplx{}; });
}

TestDensity TestDensity::scaled(double mu) const {
  auto out = bumps_;
  for (auto& b : out) b.amplitude *= mu;
  return TestDensity(out);
}

std::vector<Atom> TestDensity::atoms(const AtomRule& rule) const {
  if (rule.radial < 1 || rule.angular < 1) throw std::invalid_argument("atoms: empty rule");
  std::vector<double> rx, rw;
  gauss_nodes(rule.radial, 0.0, 1.0, rx, rw);
  std::vector<Atom> out;
  for (const auto& b : bumps_) {
    if (b.amplitude == cplx{}) continue;
    for (int i = 0; i < rule.radial; ++i)
      for (int k = 0; k < rule.angular; ++k) {
        const double r = b.radius * rx[i];
        const double th = 2.0 * kPi * (k + 0.5) / rule.angular;
        const double w = b.radius * rw[i] * r * (2.0 * kPi / rule.angular);
        out.push_back({b.center + std::polar(r, th), b.sigma, w * b.amplitude * bump_shape(rx[i])});
      }
  }
  return out;
}

namespace {

struct PointIndex {
  std::vector<cplx> positions;
  std::vector<int> of_atom;
};

PointIndex index_positions(const std::vector<Atom>& atoms) {
  PointIndex pi;
  std::map<std::pair<double, double>, int> seen;
  for (const auto& a : atoms) {
    auto key = std::make_pair(a.x.real(), a.x.imag());
    auto it = seen.find(key);
    if (it == seen.end()) {
      it = seen.emplace(key, static_cast<int>(pi.positions.size())).first;
      pi.positions.push_back(a.x);
    }
    pi.of_atom.push_back(it->second);
  }
  return pi;
}

}  // namespace

RenormalizedPotential::RenormalizedPotential(std::vector<Atom> atoms, double eps2, double t, int max_order,
                                             const SpectralCache& c, const TimeGrid& grid)
    : atoms_(std::move(atoms)), N_(max_order) {
  if (max_order < 1 || max_order > 3) throw std::invalid_argument("renormalized potential: order must be 1..3");
  require_times(eps2, t);
  for (const auto& a : atoms_) require_charge(a.sigma);
  const int A = static_cast<int>(atoms_.size());
  v1_.assign(A, 0.0);
  v2_.setZero(A, A);
  if (A == 0) {
    bounds_.assign(N_, 0.0);
    return;
  }
  const auto pi = index_positions(atoms_);
  const HeatTable T(c, pi.positions, eps2, t, grid);
  auto P = [&](int a) { return pi.of_atom[a]; };
  for (int a = 0; a < A; ++a) v1_[a] = vtilde_on(T, {P(a)}, {atoms_[a].sigma});
  if (N_ >= 2)
    for (int a = 0; a < A; ++a)
      for (int b = a; b < A; ++b) {
        const double C = T.integrated_to_end(P(a), P(b));
        v2_(a, b) = v2_(b, a) = -v1_[a] * v1_[b] * std::expm1(-kPi * atoms_[a].sigma * atoms_[b].sigma * C);
      }
  if (N_ >= 3)
    for (int a = 0; a < A; ++a)
      for (int b = a; b < A; ++b)
        for (int d = b; d < A; ++d) {
          const double mult = (a == b && b == d) ? 1.0 : (a == b || b == d) ? 3.0 : 6.0;
          const double v = vtilde_on(T, {P(a), P(b), P(d)}, {atoms_[a].sigma, atoms_[b].sigma, atoms_[d].sigma});
          v3_.push_back({a, b, d, mult / 6.0 * v * atoms_[a].weight * atoms_[b].weight * atoms_[d].weight});
        }
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  for (int a = 0; a < A; ++a) {
    b1 += std::abs(atoms_[a].weight) * std::abs(v1_[a]);
    for (int b = 0; b < A; ++b) b2 += 0.5 * std::abs(atoms_[a].weight) * std::abs(atoms_[b].weight) * std::abs(v2_(a, b));
  }
  for (const auto& tr : v3_) b3 += std::abs(tr.coef);
  bounds_ = {b1, b2, b3};
  bounds_.resize(N_);
}

SeriesTerms RenormalizedPotential::evaluate(const std::vector<double>& phi) const {
  const int A = static_cast<int>(atoms_.size());
  if (static_cast<int>(phi.size()) != A) throw std::invalid_argument("evaluate: one field value per atom");
  std::vector<cplx> e(A), we(A);
  for (int a = 0; a < A; ++a) {
    e[a] = std::polar(1.0, atoms_[a].sigma * kSqrtPi * phi[a]);
    we[a] = atoms_[a].weight * e[a];
  }
  SeriesTerms out;
  cplx t1 = 0.0;
  for (int a = 0; a < A; ++a) t1 += v1_[a] * we[a];
  out.terms.push_back(t1);
  if (N_ >= 2) {
    cplx t2 = 0.0;
    for (int a = 0; a < A; ++a) {
      cplx row = 0.0;
      for (int b = 0; b < A; ++b) row += v2_(a, b) * we[b];
      t2 += we[a] * row;
    }
    out.terms.push_back(0.5 * t2);
  }
  if (N_ >= 3) {
    cplx t3 = 0.0;
    for (const auto& tr : v3_) t3 += tr.coef * e[tr.a] * e[tr.b] * e[tr.c];
    out.terms.push_back(t3);
  }
  for (const auto& t : out.terms) out.value += t;
  const auto& B = bounds_;
  for (std::size_t k = 1; k < B.size(); ++k)
    if (B[k] >= B[k - 1] && B[k] > 0.0) out.decaying = false;
  if (B.size() >= 2 && B[B.size() - 2] > 0.0) {
    const double r = B.back() / B[B.size() - 2];
    out.tail_estimate = r < 1.0 ? B.back() * r / (1.0 - r) : std::numeric_limits<double>::infinity();
  }
  return out;
}

SeriesTerms RenormalizedPotential::evaluate(const std::function<double(const cplx&)>& field) const {
  std::vector<double> phi;
  phi.reserve(atoms_.size());
  for (const auto& a : atoms_) phi.push_back(field(a.x));
  return evaluate(phi);
}

SeriesTerms renormalized_potential(const TestDensity& eta, const std::function<double(const cplx&)>& field, double eps2,
                                   double t, int max_order, const AtomRule& rule, const SpectralCache& c) {
  return RenormalizedPotential(eta.atoms(rule), eps2, t, max_order, c).evaluate(field);
}

cplx bare_potential(const std::vector<Atom>& atoms, double eps2, const std::vector<double>& phi) {
  if (phi.size() != atoms.size()) throw std::invalid_argument("bare_potential: one field value per atom");
  cplx v = 0.0;
  for (std::size_t a = 0; a < atoms.size(); ++a)
    v += atoms[a].weight * bare_factor(atoms[a].sigma, eps2) * std::polar(1.0, atoms[a].sigma * kSqrtPi * phi[a]);
  return v;
}

cplx bare_potential_mean(const std::vector<Atom>& atoms, double eps2, const SpectralCache& c) {
  cplx v = 0.0;
  for (const auto& a : atoms) {
    const double C = truncated_covariance(c, eps2, kInfTime, a.x, a.x);
    v += a.weight * bare_factor(a.sigma, eps2) * std::exp(-0.5 * kPi * a.sigma * a.sigma * C);
  }
  return v;
}

namespace {

struct Moments {
  cplx sum = 0.0;
  std::vector<cplx> xs;
  void add(const cplx& x) {
    sum += x;
    xs.push_back(x);
  }
  cplx mean() const { return xs.empty() ? cplx{} : sum / static_cast<double>(xs.size()); }
  // standard error of the mean, and the largest share of the variance carried by one sample
  std::pair<double, double> spread() const {
    const cplx m = mean();
    double ss = 0.0, top = 0.0;
    for (const auto& x : xs) {
      const double d = std::norm(x - m);
      ss += d;
      top = std::max(top, d);
    }
    const double n = static_cast<double>(xs.size());
    if (n < 2) return {0.0, 0.0};
    return {std::sqrt(ss / (n - 1) / n), ss > 0.0 ? top / ss : 0.0};
  }
};

constexpr std::uint64_t kSecondStream = std::uint64_t{1} << 40;

std::vector<double> per_atom(const std::vector<double>& at_positions, const std::vector<int>& of_atom) {
  std::vector<double> out(of_atom.size());
  for (std::size_t a = 0; a < of_atom.size(); ++a) out[a] = at_positions[of_atom[a]];
  return out;
}

void diagnose(PartitionCheck& r, double share_l, double share_r) {
  if (!std::isfinite(r.se)) r.diagnostic = "non-finite standard error";
  else if (std::max(share_l, share_r) > 0.5) r.diagnostic = "heavy tail: a single sample carries most of the variance";
  else if (!r.series_decaying) r.diagnostic = "series terms not decaying: scale above the smallness threshold";
}

}  // namespace

PartitionCheck mc_bare_partition(const TestDensity& eta, double eps2, std::size_t samples, std::uint64_t seed,
                                 const AtomRule& rule, const SpectralCache& c) {
  if (samples < 2) throw std::invalid_argument("mc_bare_partition: need samples >= 2");
  const auto atoms = eta.atoms(rule);
  PartitionCheck r;
  if (atoms.empty()) {
    r.lhs = r.rhs = 1.0;
    return r;
  }
  const auto pi = index_positions(atoms);
  const FieldSampler field(c, field_range(FieldBand::regularized, eps2, kInfTime), pi.positions);
  Moments m;
  for (std::size_t i = 0; i < samples; ++i)
    m.add(std::exp(-bare_potential(atoms, eps2, per_atom(field.draw(seed, i), pi.of_atom))));
  r.lhs = m.mean();
  const auto [se, share] = m.spread();
  r.se_lhs = r.se = se;
  diagnose(r, share, 0.0);
  return r;
}

PartitionCheck mc_partition_check(const TestDensity& eta, double eps2, double t, std::size_t samples,
                                  std::uint64_t seed, int max_order, const AtomRule& rule, const SpectralCache& c) {
  require_times(eps2, t);
  if (samples < 2) throw std::invalid_argument("mc_partition_check: need samples >= 2");
  const auto atoms = eta.atoms(rule);
  PartitionCheck r;
  if (atoms.empty()) {
    r.lhs = r.rhs = 1.0;
    return r;
  }
  const auto pi = index_positions(atoms);
  const RenormalizedPotential u(atoms, eps2, t, max_order, c);
  const FieldSampler cutoff(c, field_range(FieldBand::regularized, eps2, t), pi.positions);
  const FieldSampler coarse(c, field_range(FieldBand::tail, eps2, t), pi.positions);
  Moments ml, mr;
  for (std::size_t i = 0; i < samples; ++i) {
    ml.add(std::exp(-bare_potential(atoms, eps2, per_atom(cutoff.draw(seed, i), pi.of_atom))));
    const auto s = u.evaluate(per_atom(coarse.draw(seed, kSecondStream + i), pi.of_atom));
    r.series_decaying = r.series_decaying && s.decaying;
    r.tail_max = std::max(r.tail_max, s.tail_estimate);
    mr.add(std::exp(-s.value));
  }
  r.lhs = ml.mean();
  r.rhs = mr.mean();
  const auto [sl, share_l] = ml.spread();
  const auto [sr, share_r] = mr.spread();
  r.se_lhs = sl;
  r.se_rhs = sr;
  r.se = std::hypot(sl, sr);
  diagnose(r, share_l, share_r);
  return r;
}

cplx sg_taylor_integrand(const std::vector<TrigFactor>& observable, const std::vector<cplx>& b) {
  const int n = static_cast<int>(b.size());
  std::vector<TrigFactor> fixed, energy;
  for (const auto& f : observable) (f.kind == Trig::cos2 ? energy : fixed).push_back(f);
  const int r = static_cast<int>(energy.size());
  if (r > 12) throw std::invalid_argument("sg_taylor_integrand: too many cos2 factors");
  cplx total = 0.0;
  // Each (S, S', bijection) is an injective map from S into the mass points.
  std::vector<int> target(r, -1);
  std::vector<bool> used(n, false);
  auto term = [&]() {
    double weight = 1.0;
    std::vector<TrigFactor> factors = fixed;
    for (int s = 0; s < r; ++s) {
      if (target[s] < 0)
        factors.push_back(energy[s]);
      else
        weight *= -counterterm_kernel(energy[s].x, b[target[s]]);
    }
    std::vector<std::vector<int>> blocks(1);
    for (std::size_t f = 0; f < factors.size(); ++f) blocks[0].push_back(static_cast<int>(f));
    for (int m = 0; m < n; ++m) {
      if (used[m]) continue;
      blocks.push_back({static_cast<int>(factors.size())});
      factors.push_back({Trig::cos2, b[m]});
    }
    total += weight * gff_cumulant(factors, blocks);
  };
  auto rec = [&](auto& self, int s) -> void {
    if (s == r) {
      term();
      return;
    }
    self(self, s + 1);
    for (int m = 0; m < n; ++m) {
      if (used[m]) continue;
      used[m] = true;
      target[s] = m;
      self(self, s + 1);
      target[s] = -1;
      used[m] = false;
    }
  };
  rec(rec, 0);
  return total;
}

namespace {

struct Variable {
  DiskRegion region;
  std::function<double(const cplx&)> weight;
  double scale;
};

// Nested disk integrals; each level hints the fixed points and the earlier variables.
QuadResult<cplx> integrate_nested(const std::vector<Variable>& vars, const std::vector<cplx>& fixed,
                                  const std::function<cplx(const std::vector<cplx>&)>& f, const SgOptions& opt) {
  std::vector<cplx> chosen;
  double tol = opt.tol;
  for (const auto& v : vars) tol *= v.scale;
  std::function<QuadResult<cplx>(std::size_t)> level = [&](std::size_t d) -> QuadResult<cplx> {
    if (d == vars.size()) return {f(chosen), 0.0, 1, true};
    std::vector<SingularityHint> hints;
    for (const auto& x : fixed) hints.push_back({x, SingularityKind::inverse_first});
    for (const auto& x : chosen) hints.push_back({x, SingularityKind::inverse_first});
    QuadResult<cplx> acc;
    const DiskQuadOptions o{tol, opt.max_cells, vars[d].region, false};
    auto res = integrate_disk<cplx>(
        [&](const cplx& z) -> cplx {
          const double w = vars[d].weight(z);
          if (w == 0.0) return 0.0;
          chosen.push_back(z);
          const auto in = level(d + 1);
          chosen.pop_back();
          acc.converged = acc.converged && in.converged;
          return w * in.value;
        },
        hints, o);
    res.converged = res.converged && acc.converged;
    return res;
  };
  return level(0);
}

}  // namespace

SeriesCoefficient sg_taylor(int n, const std::vector<TrigFactor>& observable, const MassProfile& rho,
                            const SgOptions& opt) {
  if (n < 0 || n > 2) throw std::invalid_argument("sg_taylor: order above 2");
  if (n == 0) return {sg_taylor_integrand(observable, {}), 0.0};
  if (rho.amplitude() == 0.0) return {0.0, 0.0};
  std::vector<cplx> fixed;
  for (const auto& f : observable) fixed.push_back(f.x);
  std::vector<Variable> vars(n, Variable{rho.support(), [&](const cplx& z) { return rho(z); }, rho.sup_norm()});
  const auto r = integrate_nested(vars, fixed, [&](const std::vector<cplx>& b) { return sg_taylor_integrand(observable, b); },
                                  opt);
  return {r.value, r.error_estimate};
}

SeriesCoefficient sg_taylor_smeared(int n, const std::vector<SmearedField>& fields, const MassProfile& rho,
                                    const SgOptions& opt) {
  if (n < 0 || n > 2) throw std::invalid_argument("sg_taylor_smeared: order above 2");
  std::vector<Variable> vars;
  for (const auto& f : fields) {
    if (f.g.amplitude() == 0.0) return {0.0, 0.0};
    vars.push_back({f.g.support(), [g = f.g](const cplx& z) { return g(z); }, f.g.sup_norm()});
  }
  if (n > 0 && rho.amplitude() == 0.0) return {0.0, 0.0};
  for (int k = 0; k < n; ++k) vars.push_back({rho.support(), [&](const cplx& z) { return rho(z); }, rho.sup_norm()});
  const std::size_t nf = fields.size();
  const auto r = integrate_nested(
      vars, {},
      [&](const std::vector<cplx>& pts) {
        std::vector<TrigFactor> obs;
        for (std::size_t k = 0; k < nf; ++k) obs.push_back({fields[k].kind, pts[k]});
        return sg_taylor_integrand(obs, std::vector<cplx>(pts.begin() + nf, pts.end()));
      },
      opt);
  return {r.value, r.error_estimate};
}

}  // namespace isg
