#include "isg/massive.hpp"

#include <algorithm>
#include <cmath>

#include "isg/partitions.hpp"

namespace isg {

namespace {

const cplx kPhaseConj = std::conj(kPhase);

double segment_distance(const cplx& p, const cplx& a, const cplx& b) {
  const cplx d = b - a;
  const double L2 = std::norm(d);
  double t = L2 > 0 ? std::real(std::conj(d) * (p - a)) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - a - t * d);
}

// Tolerances are relative to the bump amplitude so that results are exactly linear under
// power-of-two rescaling of the profile.
double scaled_tol(double tol, const MassProfile& a) { return a.sup_norm() > 0 ? tol * a.sup_norm() : tol; }

std::vector<SingularityHint> hints_for(const std::vector<cplx>& pts, SingularityKind kind) {
  std::vector<SingularityHint> h;
  for (const auto& p : pts) h.push_back({p, kind});
  return h;
}

}  // namespace

MassProfile::MassProfile(double amplitude, const cplx& center, double radius) : amp_(amplitude), c_(center), r_(radius) {
  if (!(radius > 0.0) || std::abs(center) + radius >= 1.0)
    throw domain_error("MassProfile: support must lie strictly inside the disk");
}

double MassProfile::operator()(const cplx& x) const {
  const double s2 = std::norm(x - c_) / (r_ * r_);
  if (s2 >= 1.0) return 0.0;
  return amp_ * std::exp(1.0 - 1.0 / (1.0 - s2));
}

cplx MassProfile::dz(const cplx& x) const {
  const double s2 = std::norm(x - c_) / (r_ * r_);
  if (s2 >= 1.0) return 0.0;
  const double q = 1.0 - s2;
  return amp_ * std::exp(1.0 - 1.0 / q) * (-1.0 / (q * q)) * std::conj(x - c_) / (r_ * r_);
}

double MassProfile::gradient_bound() const {
  double best = 0.0;
  for (int k = 1; k < 2000; ++k) {
    const double s = k / 2000.0;
    best = std::max(best, 2.0 * std::abs(dz(c_ + s * r_)));
  }
  return best;
}

MassiveSeries::MassiveSeries(std::vector<cplx> spins, MassProfile alpha, MassiveOptions opt)
    : sys_(std::move(spins)), alpha_(alpha), opt_(opt) {
  if (sys_.branch().size() == 0) throw std::invalid_argument("MassiveSeries: at least one spin required");
}

std::vector<SingularityHint> MassiveSeries::spin_hints() const {
  return hints_for(sys_.branch().spins(), SingularityKind::inverse_sqrt);
}

cplx MassiveSeries::star_integrand(const cplx& z, const cplx& u) const {
  const auto [k1, ki] = sys_.kernel(u).at(z);
  return star_combine(kI * std::conj(A0(u)), k1, ki);
}

cplx MassiveSeries::energy_integrand(const cplx& z, const cplx& u) const {
  return sys_.correlation({{FieldKind::psi, z}, {FieldKind::energy, u}}, 0) - A0(z) * sys_.energy(u);
}

SeriesCoefficient MassiveSeries::A1(const cplx& z) const {
  auto hints = spin_hints();
  hints.push_back({z, SingularityKind::inverse_first});
  DiskQuadOptions q{scaled_tol(opt_.tol, alpha_), opt_.max_cells, alpha_.support(), false};
  auto res = integrate_disk<cplx>(
      [&](const cplx& x) -> cplx {
        const double a = alpha_(x);
        if (a == 0.0 || x == z) return 0.0;
        return a * star_integrand(z, x);
      },
      hints, q);
  return {res.value / kPi, res.error_estimate / kPi};
}

SeriesCoefficient MassiveSeries::A1_energy(const cplx& z) const {
  auto hints = spin_hints();
  hints.push_back({z, SingularityKind::inverse_first});
  DiskQuadOptions q{scaled_tol(opt_.tol, alpha_), opt_.max_cells, alpha_.support(), false};
  auto res = integrate_disk<cplx>(
      [&](const cplx& x) -> cplx {
        const double a = alpha_(x);
        if (a == 0.0 || x == z) return 0.0;
        return a * energy_integrand(z, x);
      },
      hints, q);
  return {res.value / kPi, res.error_estimate / kPi};
}

void MassiveSeries::build_interpolant() const {
  const auto sup = alpha_.support();
  const double R = sup.radius;
  if (std::abs(sup.center) + R * std::sqrt(2.0) >= 1.0)
    throw domain_error("MassiveSeries: interpolation box leaves the disk");
  for (const auto& a : sys_.branch().spins())
    if (std::abs(a.real() - sup.center.real()) <= R && std::abs(a.imag() - sup.center.imag()) <= R)
      throw domain_error("MassiveSeries: a spin lies in the interpolation box");
  sys_.disorder_fermion(0);
  const int n = opt_.interpolation_degree + 1;
  std::vector<double> t(n);
  for (int j = 0; j < n; ++j) t[j] = std::cos(kPi * (j + 0.5) / n);
  std::vector<cplx> vals(n * n);
  MassiveSeries coarse(*this);
  coarse.opt_.tol = opt_.interpolation_tol;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) vals[j * n + k] = coarse.A1(sup.center + cplx{R * t[j], R * t[k]}).value;
  cheb_.assign(n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      cplx s{};
      for (int j = 0; j < n; ++j) {
        const double ta = std::cos(a * kPi * (j + 0.5) / n);
        for (int k = 0; k < n; ++k) s += vals[j * n + k] * ta * std::cos(b * kPi * (k + 0.5) / n);
      }
      s *= 4.0 / (static_cast<double>(n) * n);
      if (a == 0) s *= 0.5;
      if (b == 0) s *= 0.5;
      cheb_[a * n + b] = s;
    }
  cheb_ready_ = true;
}

cplx MassiveSeries::A1_interpolated(const cplx& z) const {
  if (!cheb_ready_) build_interpolant();
  const auto sup = alpha_.support();
  const double x = (z.real() - sup.center.real()) / sup.radius, y = (z.imag() - sup.center.imag()) / sup.radius;
  if (std::abs(x) > 1.0 || std::abs(y) > 1.0) throw domain_error("A1_interpolated: point outside the box");
  const int n = opt_.interpolation_degree + 1;
  std::vector<double> tx(n), ty(n);
  tx[0] = ty[0] = 1.0;
  if (n > 1) {
    tx[1] = x;
    ty[1] = y;
  }
  for (int k = 2; k < n; ++k) {
    tx[k] = 2 * x * tx[k - 1] - tx[k - 2];
    ty[k] = 2 * y * ty[k - 1] - ty[k - 2];
  }
  cplx s{};
  for (int a = 0; a < n; ++a) {
    cplx row{};
    for (int b = 0; b < n; ++b) row += cheb_[a * n + b] * ty[b];
    s += row * tx[a];
  }
  return s;
}

SeriesCoefficient MassiveSeries::A2(const cplx& z) const {
  if (!cheb_ready_) build_interpolant();
  auto hints = spin_hints();
  hints.push_back({z, SingularityKind::inverse_first});
  DiskQuadOptions q{scaled_tol(opt_.tol, alpha_), opt_.max_cells, alpha_.support(), false};
  auto res = integrate_disk<cplx>(
      [&](const cplx& x) -> cplx {
        const double a = alpha_(x);
        if (a == 0.0 || x == z) return 0.0;
        const auto [k1, ki] = sys_.kernel(x).at(z);
        return a * star_combine(kI * std::conj(A1_interpolated(x)), k1, ki);
      },
      hints, q);
  return {res.value / kPi, res.error_estimate / kPi};
}

cplx MassiveSeries::term(int p, const cplx& z) const {
  switch (p) {
    case 0:
      return A0(z);
    case 1:
      return A1(z).value;
    case 2:
      return A2(z).value;
    default:
      throw std::invalid_argument("MassiveSeries: order above 2");
  }
}

cplx MassiveSeries::truncated(double m, const cplx& z, int P) const {
  cplx s{};
  double w = 1.0;
  for (int p = 0; p <= P; ++p, w *= -m) s += w * term(p, z);
  return s;
}

template <class F>
cplx MassiveSeries::principal_area(F&& f, const cplx& a, double r) const {
  // pairs of antipodal points cancel the leading odd singularity
  auto g = [&](double s, double th) -> cplx {
    const double rho = r * s * s;
    if (rho == 0.0) return 0.0;
    const cplx e = std::polar(rho, th);
    return (f(a + e) + f(a - e)) * (2.0 * r * r * s * s * s);
  };
  return integrate_rectangle<cplx>(g, 0.0, 1.0, 0.0, kPi, 4, 4, opt_.tol, opt_.max_cells).value;
}

Coefficients MassiveSeries::extract(int p, double r) const {
  if (p < 1 || p > 2) throw std::invalid_argument("extract: order must be 1 or 2");
  const auto& br = sys_.branch();
  const cplx a = br.spin(0);
  double lim = std::min(1.0 - std::abs(a), br.cut_clearance(0));
  for (std::size_t i = 1; i < br.size(); ++i) lim = std::min(lim, std::abs(br.spin(i) - a));
  if (r <= 0.0) r = 0.5 * lim;
  if (r >= lim) throw domain_error("extract: radius reaches another singularity");
  const int M = opt_.contour_points;
  cplx c0{}, c1{};
  for (int k = 0; k < M; ++k) {
    const cplx e = std::polar(1.0, 2 * kPi * (k + 0.5) / M);
    const cplx z = a + r * e;
    const cplx h = term(p, z) * br.rho(0, z) * (kI * r * e) * (2 * kPi / M);
    c0 += h / (z - a);
    c1 += h / ((z - a) * (z - a));
  }
  c0 /= 2 * kPi * kI;
  c1 /= 2 * kPi * kI;
  // area correction from the dbar source i alpha conj(A_{p-1})
  const auto sup = alpha_.support();
  if (std::abs(sup.center - a) < sup.radius + r) {
    auto src = [&](const cplx& z) -> cplx {
      const double al = alpha_(z);
      if (al == 0.0) return 0.0;
      const cplx prev = p == 1 ? A0(z) : A1_interpolated(z);
      return br.rho(0, z) * kI * al * std::conj(prev);
    };
    c0 -= principal_area([&](const cplx& z) { return src(z) / (z - a); }, a, r) / kPi;
    c1 -= principal_area([&](const cplx& z) { return src(z) / ((z - a) * (z - a)); }, a, r) / kPi;
  }
  return {-kPhaseConj * c0, -kPhaseConj * c1};
}

Coefficients MassiveSeries::kernel_coefficients(int p) const {
  if (p < 1 || p > 2) throw std::invalid_argument("kernel_coefficients: order must be 1 or 2");
  const cplx a = sys_.branch().spin(0);
  auto integrand = [&](const cplx& x) -> std::pair<cplx, cplx> {
    const double al = alpha_(x);
    if (al == 0.0) return {0.0, 0.0};
    const cplx prev = p == 1 ? A0(x) : A1_interpolated(x);
    const cplx c = kI * al * std::conj(prev);
    const auto k = sys_.kernel(x);
    return {star_combine(c, k.k1.beta(0), k.ki.beta(0)), star_combine(c, k.k1.lambda(0), k.ki.lambda(0))};
  };
  const auto sup = alpha_.support();
  DiskQuadOptions q{scaled_tol(opt_.tol, alpha_), opt_.max_cells, sup, false};
  cplx b{}, l{};
  if (alpha_.contains(a)) {
    double d = 0.5 * (sup.radius - std::abs(a - sup.center));
    for (std::size_t i = 1; i < sys_.branch().size(); ++i) d = std::min(d, 0.4 * std::abs(sys_.branch().spin(i) - a));
    d = std::min(d, 0.5 * (1.0 - std::abs(a)));
    auto outer = [&](const cplx& x, int which) -> cplx {
      const double w = 1.0 - detail::smooth_cutoff(std::abs(x - a) / d);
      if (w == 0.0) return 0.0;
      const auto v = integrand(x);
      return w * (which == 0 ? v.first : v.second);
    };
    auto hints = spin_hints();
    for (int which : {0, 1}) {
      auto res = integrate_disk<cplx>([&](const cplx& x) { return outer(x, which); }, hints, q);
      auto inner = principal_area(
          [&](const cplx& x) -> cplx {
            const double w = detail::smooth_cutoff(std::abs(x - a) / d);
            if (w == 0.0) return 0.0;
            const auto v = integrand(x);
            return w * (which == 0 ? v.first : v.second);
          },
          a, d);
      (which == 0 ? b : l) = res.value + inner;
    }
  } else {
    auto hints = spin_hints();
    auto rb = integrate_disk<cplx>([&](const cplx& x) { return integrand(x).first; }, hints, q);
    auto rl = integrate_disk<cplx>([&](const cplx& x) { return integrand(x).second; }, hints, q);
    b = rb.value;
    l = rl.value;
  }
  return {b / kPi, l / kPi};
}

Coefficients coefficient_beta_lambda(const MassiveSeries& s, int p, double r) { return s.extract(p, r); }

SpinPath radial_path(const cplx& a) {
  const cplx u = std::abs(a) < 1e-12 ? cplx{1.0, 0.0} : a / std::abs(a);
  return {{u, a}};
}

namespace {

void validate_path(const std::vector<cplx>& spins, const SpinPath& path, double min_distance) {
  if (path.vertices.size() < 2) throw path_error("spin path: at least two vertices required");
  if (std::abs(std::abs(path.vertices.front()) - 1.0) > 1e-12) throw path_error("spin path: must start on the boundary");
  if (std::abs(path.vertices.back() - spins.at(0)) > 1e-14) throw path_error("spin path: must end at the spin");
  for (std::size_t k = 1; k < path.vertices.size(); ++k) {
    if (std::abs(path.vertices[k]) >= 1.0) throw path_error("spin path: vertex outside the disk");
    for (std::size_t i = 1; i < spins.size(); ++i)
      if (segment_distance(spins[i], path.vertices[k - 1], path.vertices[k]) < min_distance)
        throw path_error("spin path: passes too close to another spin");
  }
}

// Composite Gauss-Legendre over the polyline of Re int lambda_(p)(a') da'.
SeriesCoefficient path_integral(int p, const MassProfile& alpha, const std::vector<cplx>& spins, const SpinPath& path,
                                const MassiveOptions& opt) {
  std::vector<double> gx, gw;
  gauss_nodes(12, 0.0, 1.0, gx, gw);
  double total = 0.0;
  for (std::size_t k = 1; k < path.vertices.size(); ++k) {
    const cplx A = path.vertices[k - 1], B = path.vertices[k];
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(B - A) / 0.08)));
    for (int q = 0; q < panels; ++q) {
      const cplx P0 = A + (B - A) * (static_cast<double>(q) / panels);
      const cplx d = (B - A) / static_cast<double>(panels);
      for (std::size_t i = 0; i < gx.size(); ++i) {
        std::vector<cplx> sp = spins;
        sp[0] = P0 + gx[i] * d;
        MassiveSeries s(sp, alpha, opt);
        const cplx lam = s.kernel_coefficients(p).lambda;
        total += gw[i] * (lam * d).real();
      }
    }
  }
  return {total, 0.0};
}

}  // namespace

SeriesCoefficient spin_log_ratio_first_order(const MassProfile& alpha, const std::vector<cplx>& spins,
                                             const SpinPath& path, const MassiveOptions& opt, double min_distance) {
  validate_path(spins, path, min_distance);
  const auto r = path_integral(1, alpha, spins, path, opt);
  return {-0.5 * r.value.real(), r.error};
}

double spin_log_ratio(double m, const MassProfile& alpha, const std::vector<cplx>& spins, const SpinPath& path, int P,
                      const MassiveOptions& opt, double min_distance) {
  if (P < 0 || P > 2) throw std::invalid_argument("spin_log_ratio: order above 2");
  if (m == 0.0 || P == 0) return 0.0;
  validate_path(spins, path, min_distance);
  double total = 0.0, w = 1.0;
  for (int p = 1; p <= P; ++p) {
    w *= -m;
    total += 0.5 * w * path_integral(p, alpha, spins, path, opt).value.real();
  }
  return total;
}

namespace {

// <sigma eps_u eps_v>/<sigma> - E(u)E(v) from pair values of one kernel.
double truncated_energy_pair(const CriticalSystem& sys, const cplx& u, const cplx& v) {
  const auto k = sys.kernel(v);
  const cplx P = k.psi(u), Q = k.psi_star(u);
  return 0.25 * (std::norm(P) - std::norm(Q));
}

// Energy moments R(T) = <sigma_A eps_T>/<sigma_A> for subsets of a small point list.
struct EnergyMoments {
  const CriticalSystem& sys;
  std::vector<cplx> pts;
  mutable std::vector<double> cache;
  mutable std::vector<char> known;
  EnergyMoments(const CriticalSystem& s, std::vector<cplx> p)
      : sys(s), pts(std::move(p)), cache(std::size_t{1} << pts.size()), known(cache.size(), 0) {}
  double operator()(const std::vector<int>& T) const {
    std::size_t mask = 0;
    for (int i : T) mask |= std::size_t{1} << i;
    if (known[mask]) return cache[mask];
    double v;
    if (T.empty())
      v = 1.0;
    else if (T.size() == 1)
      v = sys.energy(pts[T[0]]);
    else if (T.size() == 2)
      v = (*this)({T[0]}) * (*this)({T[1]}) + truncated_energy_pair(sys, pts[T[0]], pts[T[1]]);
    else {
      std::vector<FieldInsertion> q;
      for (int i : T) q.push_back({FieldKind::energy, pts[i]});
      v = sys.correlation(q).real();
    }
    known[mask] = 1;
    cache[mask] = v;
    return v;
  }
};

// Nested integral over supp(alpha)^r of alpha(x_1)..alpha(x_r) F(x).
template <class F>
SeriesCoefficient integrate_mass(int r, const MassProfile& alpha, const std::vector<cplx>& spins, F&& F_,
                                 const MassiveOptions& opt) {
  DiskQuadOptions q{scaled_tol(opt.tol, alpha), opt.max_cells, alpha.support(), false};
  auto hints = hints_for(spins, SingularityKind::inverse_first);
  if (r == 0) return {F_(std::vector<cplx>{}), 0.0};
  if (r == 1) {
    auto res = integrate_disk<double>(
        [&](const cplx& x) -> double {
          const double a = alpha(x);
          return a == 0.0 ? 0.0 : a * F_(std::vector<cplx>{x});
        },
        hints, q);
    return {res.value, res.error_estimate};
  }
  if (r == 2) {
    double inner_err = 0.0;
    auto res = integrate_disk<double>(
        [&](const cplx& x) -> double {
          const double a = alpha(x);
          if (a == 0.0) return 0.0;
          auto h2 = hints;
          h2.push_back({x, SingularityKind::log});
          auto in = integrate_disk<double>(
              [&](const cplx& y) -> double {
                const double b = alpha(y);
                if (b == 0.0 || y == x) return 0.0;
                return b * F_(std::vector<cplx>{x, y});
              },
              h2, q);
          inner_err = std::max(inner_err, in.error_estimate);
          return a * in.value;
        },
        hints, q);
    return {res.value, res.error_estimate + inner_err * kPi * std::pow(alpha.support().radius, 2) * alpha.sup_norm()};
  }
  throw std::invalid_argument("integrate_mass: order above 2");
}

}  // namespace

double spin_energy_ratio(const CriticalSystem& sys, const std::vector<cplx>& energies) {
  std::vector<int> idx(energies.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return EnergyMoments(sys, energies)(idx);
}

SeriesCoefficient pure_spin_taylor(int p, const std::vector<cplx>& spins, const MassProfile& alpha,
                                   const MassiveOptions& opt) {
  if (p < 0 || p > 2) throw std::invalid_argument("pure_spin_taylor: order above 2");
  if (p == 0) return {0.0, 0.0};
  const CriticalSystem with(spins), without(std::vector<cplx>{});
  auto F = [&](const std::vector<cplx>& x) -> double {
    if (p == 1) return with.energy(x[0]) - without.energy(x[0]);
    return truncated_energy_pair(with, x[0], x[1]) - truncated_energy_pair(without, x[0], x[1]);
  };
  auto r = integrate_mass(p, alpha, spins, F, opt);
  const double pref = (p % 2 ? -1.0 : 1.0) / (factorial(p) * std::pow(kPi, p));
  return {pref * r.value.real(), std::abs(pref) * r.error};
}

SeriesCoefficient doubled_taylor(int p, const std::vector<cplx>& spins, const std::vector<cplx>& energies,
                                 const MassProfile& alpha, const MassiveOptions& opt) {
  if (p < 0 || p > 2) throw std::invalid_argument("doubled_taylor: order above 2");
  if (energies.size() > 1) throw std::invalid_argument("doubled_taylor: at most one energy point");
  const CriticalSystem with(spins), without(std::vector<cplx>{});
  const int nw = static_cast<int>(energies.size());
  auto F = [&](const std::vector<cplx>& x) -> double {
    // point list: energies first, then mass points
    std::vector<cplx> pts = energies;
    pts.insert(pts.end(), x.begin(), x.end());
    const EnergyMoments Ra(with, pts), R0(without, pts);
    auto doubled = [](const EnergyMoments& R, const std::vector<int>& S) {
      double s = 0.0;
      for_each_subset(S, [&](const std::vector<int>& T, const std::vector<int>& U) { s += R(T) * R(U); });
      return s;
    };
    const int r = static_cast<int>(x.size());
    // cumulant <X0; Y_{x_1}; ...> with X0 = (sigma sigma~)(eps+eps~)_{W'}
    auto spin_cumulant = [&](const std::vector<int>& W, const std::vector<int>& xs) {
      std::vector<int> idx{-1};
      idx.insert(idx.end(), xs.begin(), xs.end());
      return cumulant<double>(
          [&](const std::vector<int>& B) {
            std::vector<int> S;
            bool has0 = false;
            for (int b : B) (b == -1 ? has0 = true : (S.push_back(b), true));
            if (has0) {
              S.insert(S.end(), W.begin(), W.end());
              return doubled(Ra, S);
            }
            return doubled(R0, S);
          },
          idx);
    };
    std::vector<int> xs(r);
    for (int k = 0; k < r; ++k) xs[k] = nw + k;
    std::vector<int> W;
    for (int i = 0; i < nw; ++i) W.push_back(i);
    double total = spin_cumulant(W, xs);
    if (nw == 1) {
      for (int k = 0; k < r; ++k) {
        const double pair = doubled(R0, {0, nw + k}) - doubled(R0, {0}) * doubled(R0, {nw + k});
        std::vector<int> rest;
        for (int j = 0; j < r; ++j)
          if (j != k) rest.push_back(nw + j);
        total += pair * spin_cumulant({}, rest);
      }
    }
    return total;
  };
  auto r = integrate_mass(p, alpha, spins, F, opt);
  const double pref = (p % 2 ? -1.0 : 1.0) / (factorial(p) * std::pow(kPi, p));
  return {pref * r.value.real(), std::abs(pref) * r.error};
}

}  // namespace isg
