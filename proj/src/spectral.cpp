#include "isg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>

namespace isg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bessel_j(int n, double x) { return boost::math::cyl_bessel_j(n, x); }

std::string cache_file_name(double t_min, double radius) {
  std::ostringstream os;
  os.precision(17);
  os << "bessel_cache_" << SpectralCache::kVersion << "_t" << t_min << "_L" << radius << ".json";
  return os.str();
}

}  // namespace

double spectral_cutoff(double t) { return (36.0 + 2.0 * std::log1p(1.0 / t)) / t; }

SpectralCache SpectralCache::with_cutoff(double j_cut, double radius) {
  if (!(j_cut > 0) || !(radius > 0)) throw std::invalid_argument("SpectralCache: bad cutoff or radius");
  SpectralCache c;
  c.radius_ = radius;
  c.j_cut_ = j_cut;
  for (int n = 0; n < j_cut; ++n) {
    // zeros of J_n exceed n; lower bound n^2 + (k - 1/4)^2 pi^2 caps the count
    const int kmax = static_cast<int>(std::ceil(j_cut / kPi + 1.0));
    std::vector<double> zs;
    boost::math::cyl_bessel_j_zero(static_cast<double>(n), 1, kmax, std::back_inserter(zs));
    for (int k = 1; k <= kmax; ++k) {
      const double z = zs[k - 1];
      if (z > j_cut) break;
      c.modes_.push_back({n, k, z, 1.0 / (std::sqrt(kPi) * bessel_j(n + 1, z))});
    }
  }
  std::stable_sort(c.modes_.begin(), c.modes_.end(), [](const Mode& a, const Mode& b) {
    if (a.zero != b.zero) return a.zero < b.zero;
    return a.n < b.n;
  });
  c.rebuild_index();
  return c;
}

SpectralCache SpectralCache::warm(double t_min, double radius) {
  // eigenvalue j^2 / L^2; modes needed satisfy t j^2 / L^2 <= cutoff(t / L^2) * t / L^2 ...
  const double lam = spectral_cutoff(t_min / (radius * radius));
  return with_cutoff(std::sqrt(lam) * 1.0000001, radius);
}

void SpectralCache::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& m = modes_[i];
    if (static_cast<int>(index_.size()) <= m.n) index_.resize(m.n + 1);
    auto& row = index_[m.n];
    if (static_cast<int>(row.size()) < m.k) row.resize(m.k, static_cast<std::size_t>(-1));
    row[m.k - 1] = i;
  }
}

double SpectralCache::bessel_zero(int n, int k) const {
  n = std::abs(n);
  if (n >= static_cast<int>(index_.size()) || k < 1 || k > static_cast<int>(index_[n].size()) ||
      index_[n][k - 1] == static_cast<std::size_t>(-1))
    throw cache_miss("bessel_zero: (" + std::to_string(n) + "," + std::to_string(k) +
                     ") not in cache; warm up with a larger cutoff");
  return modes_[index_[n][k - 1]].zero;
}

double SpectralCache::norm_constant(int n, int k) const {
  bessel_zero(n, k);
  return modes_[index_[std::abs(n)][k - 1]].norm;
}

cplx SpectralCache::eigenfunction(int n, int k, const cplx& x) const {
  const double j = bessel_zero(n, k);
  const double nc = norm_constant(n, k);
  const double r = std::abs(x) / radius_;
  const int an = std::abs(n);
  const double th = std::arg(x);
  return std::polar(nc * bessel_j(an, j * r) / radius_, n * th);
}

std::size_t SpectralCache::modes_for(double t) const {
  const double lam = spectral_cutoff(t / (radius_ * radius_));
  const double jneed = std::sqrt(lam);
  if (jneed > j_cut_)
    throw cache_miss("spectral cache covers zeros up to " + std::to_string(j_cut_) + ", time " + std::to_string(t) +
                     " needs " + std::to_string(jneed));
  auto it = std::upper_bound(modes_.begin(), modes_.end(), jneed, [](double v, const Mode& m) { return v < m.zero; });
  return static_cast<std::size_t>(it - modes_.begin());
}

nlohmann::json SpectralCache::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& m : modes_) recs.push_back({{"n", m.n}, {"k", m.k}, {"zero", m.zero}, {"norm", m.norm}});
  return {{"version", kVersion}, {"radius", radius_}, {"zero_cutoff", j_cut_}, {"modes", recs}};
}

SpectralCache SpectralCache::from_json(const nlohmann::json& j) {
  if (j.value("version", std::string{}) != kVersion) throw std::runtime_error("spectral cache: version mismatch");
  SpectralCache c;
  c.radius_ = j.at("radius").get<double>();
  c.j_cut_ = j.at("zero_cutoff").get<double>();
  for (const auto& r : j.at("modes")) {
    Mode m{r.at("n").get<int>(), r.at("k").get<int>(), r.at("zero").get<double>(), r.at("norm").get<double>()};
    const double lower = double(m.n) * m.n + (m.k - 0.25) * (m.k - 0.25) * kPi * kPi;
    if (m.zero * m.zero < lower * (1.0 - 1e-15))
      throw std::runtime_error("spectral cache: record violates the eigenvalue lower bound");
    c.modes_.push_back(m);
  }
  c.rebuild_index();
  return c;
}

void SpectralCache::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << to_json().dump() << '\n';
}

SpectralCache SpectralCache::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return from_json(nlohmann::json::parse(is));
}

SpectralCache SpectralCache::load_or_warm(const std::string& dir, double t_min, double radius) {
  const std::string path = dir + "/" + cache_file_name(t_min, radius);
  {
    std::ifstream probe(path);
    if (probe) {
      try {
        return load(path);
      } catch (const std::exception&) {
        // stale or corrupt: rebuild below
      }
    }
  }
  SpectralCache c = warm(t_min, radius);
  c.save(path);
  return c;
}

bool SpectralCache::operator==(const SpectralCache& o) const {
  if (radius_ != o.radius_ || j_cut_ != o.j_cut_ || modes_.size() != o.modes_.size()) return false;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto &a = modes_[i], &b = o.modes_[i];
    if (a.n != b.n || a.k != b.k || a.zero != b.zero || a.norm != b.norm) return false;
  }
  return true;
}

const SpectralCache& default_cache() {
  static const SpectralCache c = SpectralCache::warm(kTimeFloor, 1.0);
  return c;
}

double plane_heat_kernel(double t, const cplx& x, const cplx& y) {
  return std::exp(-std::norm(x - y) / (4.0 * t)) / (4.0 * kPi * t);
}

double plane_heat_integral(double a, double b, const cplx& x, const cplx& y) {
  if (!(b > a)) return 0.0;
  if (std::isinf(b)) throw domain_error("plane_heat_integral: divergent upper limit");
  const double r2 = std::norm(x - y);
  if (r2 == 0.0) {
    if (a <= 0.0) throw domain_error("plane_heat_integral: divergent at coincident points");
    return std::log(b / a) / (4.0 * kPi);
  }
  const double e_b = boost::math::expint(1, r2 / (4.0 * b));
  const double e_a = a > 0.0 ? boost::math::expint(1, r2 / (4.0 * a)) : 0.0;
  return (e_b - e_a) / (4.0 * kPi);
}

namespace {

// Sum over the first nm modes of w(j) * sum_{+-n} e(x) conj(e(y)).
template <class W>
double mode_sum(const SpectralCache& c, std::size_t nm, const cplx& x, const cplx& y, W&& weight) {
  const double L = c.radius();
  const double rx = std::abs(x) / L, ry = std::abs(y) / L;
  const double dth = std::arg(x) - std::arg(y);
  double total = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < nm; ++i) {
    const Mode& m = c.modes()[i];
    const double w = weight(m.zero / L);
    if (w == 0.0) continue;
    const double ex = bessel_j(m.n, m.zero * rx);
    const double ey = (ry == rx) ? ex : bessel_j(m.n, m.zero * ry);
    double term = m.norm * m.norm * ex * ey / (L * L) * w;
    if (m.n > 0) term *= 2.0 * std::cos(m.n * dth);
    const double t2 = total + term;
    comp += std::abs(total) >= std::abs(term) ? (total - t2) + term : (term - t2) + total;
    total = t2;
  }
  return total + comp;
}

void require_closed(const cplx& x) {
  if (std::norm(x) > 1.0 + 1e-15) throw domain_error("point outside the disk");
}

}  // namespace

double heat_kernel(const SpectralCache& c, double t, const cplx& x, const cplx& y) {
  const double L = c.radius();
  require_closed(x / L);
  require_closed(y / L);
  if (t / (L * L) < kTimeFloor * (1.0 - 1e-12))
    throw below_time_floor("heat_kernel: t below the series floor", std::sqrt(spectral_cutoff(t / (L * L))));
  const std::size_t nm = c.modes_for(t);
  return mode_sum(c, nm, x, y, [&](double j) { return std::exp(-t * j * j); });
}

double remainder(const SpectralCache& c, double t, const cplx& x, const cplx& y) {
  return plane_heat_kernel(t, x, y) - heat_kernel(c, t, x, y);
}

double spectral_time_integral(const SpectralCache& c, double a, double b, const cplx& x, const cplx& y) {
  const double L = c.radius();
  if (a / (L * L) < kTimeFloor * (1.0 - 1e-12))
    throw below_time_floor("spectral_time_integral: lower limit below the series floor",
                           std::sqrt(spectral_cutoff(a / (L * L))));
  if (!(b > a)) return 0.0;
  const std::size_t nm = c.modes_for(a);
  return mode_sum(c, nm, x, y, [&](double j) {
    const double l = j * j;
    const double eb = std::isinf(b) ? 0.0 : std::exp(-b * l);
    return (std::exp(-a * l) - eb) / l;
  });
}

CovarianceResult truncated_covariance_detail(const SpectralCache& c, double eps2, double t, const cplx& x,
                                             const cplx& y) {
  if (!(eps2 >= 0.0) || !(t > eps2)) throw std::invalid_argument("truncated_covariance: need 0 <= eps2 < t");
  const double L = c.radius();
  const double s0 = kRemainderSplit * L * L;
  if (x == y && eps2 == 0.0) throw domain_error("truncated_covariance: divergent on the diagonal at eps = 0");
  CovarianceResult out;
  if (eps2 >= s0) {
    out.value = spectral_time_integral(c, eps2, t, x, y);
    return out;
  }
  const double mid = std::min(t, s0);
  out.value = plane_heat_integral(eps2, mid, x, y);
  // Remainder on [eps2, mid]: R_s(x, y) <= p(s, delta) with delta the larger boundary distance.
  const double delta = L - std::min(std::abs(x), std::abs(y));
  if (delta <= 0.0) throw domain_error("truncated_covariance: boundary point");
  out.tail_bound = boost::math::expint(1, delta * delta / (4.0 * mid)) / (4.0 * kPi);
  if (t > s0) out.value += spectral_time_integral(c, s0, t, x, y);
  return out;
}

double truncated_covariance(const SpectralCache& c, double eps2, double t, const cplx& x, const cplx& y) {
  return truncated_covariance_detail(c, eps2, t, x, y).value;
}

FieldRange field_range(FieldBand kind, double eps2, double t) {
  switch (kind) {
    case FieldBand::regularized:
      return {eps2, kInf};
    case FieldBand::tail:
      return {t, kInf};
    case FieldBand::band:
      return {eps2, t};
  }
  return {};
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double to_unit(std::uint64_t v) { return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53; }

std::uint64_t feature_key(int n, int k, int part) {
  return (static_cast<std::uint64_t>(n) << 33) | (static_cast<std::uint64_t>(k) << 1) | static_cast<std::uint64_t>(part);
}

double mode_sd(double l, const FieldRange& r) {
  const double eb = std::isinf(r.b) ? 0.0 : std::exp(-r.b * l);
  return std::sqrt(std::max(0.0, (std::exp(-r.a * l) - eb) / l));
}

std::size_t modes_for_range(const SpectralCache& c, const FieldRange& r) {
  const double L = c.radius();
  if (r.a / (L * L) < kTimeFloor * (1.0 - 1e-12))
    throw below_time_floor("sample_field: lower time below the series floor", std::sqrt(spectral_cutoff(r.a / (L * L))));
  return c.modes_for(r.a);
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t base = splitmix(splitmix(seed ^ 0x5851f42d4c957f2dull) ^ stream);
  const std::uint64_t h1 = splitmix(base ^ splitmix(2 * index));
  const std::uint64_t h2 = splitmix(base ^ splitmix(2 * index + 1));
  const double u1 = to_unit(h1), u2 = to_unit(h2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

FieldSample::FieldSample(const SpectralCache& c, FieldRange range, std::uint64_t seed, std::uint64_t sample_index)
    : cache_(&c), seed_(seed) {
  const std::size_t nm = modes_for_range(c, range);
  const double L = c.radius();
  for (std::size_t i = 0; i < nm; ++i) {
    const Mode& m = c.modes()[i];
    const double l = m.zero * m.zero / (L * L);
    used_.push_back(i);
    sd_.push_back(mode_sd(l, range));
    if (m.n == 0) {
      v_.emplace_back(counter_normal(seed, sample_index, feature_key(0, m.k, 0)), 0.0);
    } else {
      const double g0 = counter_normal(seed, sample_index, feature_key(m.n, m.k, 0));
      const double g1 = counter_normal(seed, sample_index, feature_key(m.n, m.k, 1));
      v_.emplace_back(g0 / std::sqrt(2.0), g1 / std::sqrt(2.0));
    }
  }
}

cplx FieldSample::coefficient(int n, int k) const {
  for (std::size_t q = 0; q < used_.size(); ++q) {
    const Mode& m = cache_->modes()[used_[q]];
    if (m.n == std::abs(n) && m.k == k) return n < 0 ? std::conj(v_[q]) : v_[q];
  }
  throw cache_miss("FieldSample::coefficient: mode not part of the sample");
}

double FieldSample::operator()(const cplx& x) const {
  const double L = cache_->radius();
  const double r = std::abs(x) / L, th = std::arg(x);
  double total = 0.0;
  for (std::size_t q = 0; q < used_.size(); ++q) {
    const Mode& m = cache_->modes()[used_[q]];
    const double e = m.norm * bessel_j(m.n, m.zero * r) / L;
    if (m.n == 0)
      total += sd_[q] * v_[q].real() * e;
    else
      total += sd_[q] * 2.0 * std::real(v_[q] * std::polar(e, m.n * th));
  }
  return total;
}

FieldSample sample_field(const SpectralCache& c, FieldBand kind, double eps2, double t, std::uint64_t seed,
                         std::uint64_t sample_index) {
  return FieldSample(c, field_range(kind, eps2, t), seed, sample_index);
}

FieldSampler::FieldSampler(const SpectralCache& c, FieldRange range, std::vector<cplx> points)
    : points_(std::move(points)) {
  const std::size_t nm = modes_for_range(c, range);
  const double L = c.radius();
  const std::size_t np = points_.size();
  for (std::size_t i = 0; i < nm; ++i) {
    const Mode& m = c.modes()[i];
    const double sd = mode_sd(m.zero * m.zero / (L * L), range);
    std::vector<double> re(np), im(np);
    for (std::size_t p = 0; p < np; ++p) {
      const double e = m.norm * bessel_j(m.n, m.zero * std::abs(points_[p]) / L) / L;
      const double th = std::arg(points_[p]);
      re[p] = sd * e * std::cos(m.n * th);
      im[p] = sd * e * std::sin(m.n * th);
    }
    if (m.n == 0) {
      keys_.push_back(feature_key(0, m.k, 0));
      table_.insert(table_.end(), re.begin(), re.end());
    } else {
      // 2 Re(V e) with V = (g0 + i g1)/sqrt2: sqrt2 (g0 Re e - g1 Im e)
      keys_.push_back(feature_key(m.n, m.k, 0));
      for (auto& v : re) v *= std::sqrt(2.0);
      table_.insert(table_.end(), re.begin(), re.end());
      keys_.push_back(feature_key(m.n, m.k, 1));
      for (auto& v : im) v *= -std::sqrt(2.0);
      table_.insert(table_.end(), im.begin(), im.end());
    }
  }
}

std::vector<double> FieldSampler::draw(std::uint64_t seed, std::uint64_t sample_index) const {
  const std::size_t np = points_.size();
  std::vector<double> out(np, 0.0);
  for (std::size_t f = 0; f < keys_.size(); ++f) {
    const double g = counter_normal(seed, sample_index, keys_[f]);
    const double* row = &table_[f * np];
    for (std::size_t p = 0; p < np; ++p) out[p] += g * row[p];
  }
  return out;
}

}  // namespace isg
