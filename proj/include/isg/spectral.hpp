#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "isg/disk.hpp"

namespace isg {

inline constexpr double kTimeFloor = 1e-3;
// Below this time the remainder p - p_disk is not summed; its integral is bounded instead.
inline constexpr double kRemainderSplit = 1e-3;

struct cache_miss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct below_time_floor : std::runtime_error {
  double required_cutoff;
  below_time_floor(const std::string& m, double jc) : std::runtime_error(m), required_cutoff(jc) {}
};

// Spectral cutoff (in units of j^2 / L^2) so that e^{-t lambda} over dropped modes is below 1e-14
// relative: t lambda <= 36 + log-margin for the number of modes.
double spectral_cutoff(double t);

struct Mode {
  int n = 0;  // angular index, n >= 0; n > 0 stands for the pair +-n
  int k = 1;
  double zero = 0.0;  // k-th positive zero of J_n
  double norm = 0.0;  // 1 / (sqrt(pi) J_{n+1}(zero))
};

// Dirichlet eigen-data of the disk of radius L, sorted by eigenvalue.
class SpectralCache {
 public:
  static constexpr const char* kVersion = "isg-bessel-cache-1";

  SpectralCache() = default;
  // All modes with zero <= j_cut.
  static SpectralCache with_cutoff(double j_cut, double radius = 1.0);
  // Enough modes to evaluate heat kernels and covariances down to time t_min.
  static SpectralCache warm(double t_min = kTimeFloor, double radius = 1.0);

  double radius() const { return radius_; }
  double zero_cutoff() const { return j_cut_; }
  const std::vector<Mode>& modes() const { return modes_; }

  double bessel_zero(int n, int k) const;
  double norm_constant(int n, int k) const;
  // e_{n,k}(x) for any integer n (negative n uses |n| and conjugate phase).
  cplx eigenfunction(int n, int k, const cplx& x) const;

  // Number of leading modes (in eigenvalue order) needed at time t; throws cache_miss when
  // the cache does not reach far enough.
  std::size_t modes_for(double t) const;

  nlohmann::json to_json() const;
  static SpectralCache from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static SpectralCache load(const std::string& path);
  // Loads from dir if a matching file exists, otherwise warms and writes it.
  static SpectralCache load_or_warm(const std::string& dir, double t_min = kTimeFloor, double radius = 1.0);

  bool operator==(const SpectralCache& o) const;

 private:
  double radius_ = 1.0;
  double j_cut_ = 0.0;
  std::vector<Mode> modes_;
  std::vector<std::vector<std::size_t>> index_;  // index_[n][k-1] -> position in modes_
  void rebuild_index();
};

// Shared process-wide cache at the default floor (radius 1).
const SpectralCache& default_cache();

double plane_heat_kernel(double t, const cplx& x, const cplx& y);
// Integral of the plane kernel over s in [a, b] (b may be infinite only when x != y is irrelevant:
// b = inf diverges and is rejected).
double plane_heat_integral(double a, double b, const cplx& x, const cplx& y);

double heat_kernel(const SpectralCache& c, double t, const cplx& x, const cplx& y);
double remainder(const SpectralCache& c, double t, const cplx& x, const cplx& y);

// Spectral sum of e(x) conj(e(y)) (e^{-a j^2} - e^{-b j^2}) / j^2 (b = inf allowed), a >= floor.
double spectral_time_integral(const SpectralCache& c, double a, double b, const cplx& x, const cplx& y);

struct CovarianceResult {
  double value = 0.0;
  double tail_bound = 0.0;  // bound on the neglected short-time remainder
};

// Integral over s in [eps2, t] of the disk heat kernel; t = +inf gives the regularized covariance.
CovarianceResult truncated_covariance_detail(const SpectralCache& c, double eps2, double t, const cplx& x,
                                             const cplx& y);
double truncated_covariance(const SpectralCache& c, double eps2, double t, const cplx& x, const cplx& y);

// Gaussian field with per-mode variance (e^{-a j^2} - e^{-b j^2}) / j^2.
enum class FieldBand { regularized, tail, band };

struct FieldRange {
  double a = 0.0, b = 0.0;  // b = inf allowed
};
FieldRange field_range(FieldBand kind, double eps2, double t);

// Counter-based standard normal keyed by (seed, stream, index).
double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

class FieldSample {
 public:
  FieldSample(const SpectralCache& c, FieldRange range, std::uint64_t seed, std::uint64_t sample_index = 0);
  double operator()(const cplx& x) const;
  std::uint64_t seed() const { return seed_; }
  // Complex mode coefficient V_{n,k} (conjugation symmetric in n), scaled to unit variance.
  cplx coefficient(int n, int k) const;

 private:
  const SpectralCache* cache_;
  std::uint64_t seed_;
  std::vector<std::size_t> used_;
  std::vector<double> sd_;
  std::vector<cplx> v_;
};

FieldSample sample_field(const SpectralCache& c, FieldBand kind, double eps2, double t, std::uint64_t seed,
                         std::uint64_t sample_index = 0);

// Repeated sampling of a field at a fixed set of points, with the mode table precomputed.
// Draws agree bit-for-bit in distribution keys with FieldSample for the same (seed, index).
class FieldSampler {
 public:
  FieldSampler(const SpectralCache& c, FieldRange range, std::vector<cplx> points);
  std::vector<double> draw(std::uint64_t seed, std::uint64_t sample_index) const;
  std::size_t feature_count() const { return keys_.size(); }

 private:
  std::vector<cplx> points_;
  std::vector<std::uint64_t> keys_;
  std::vector<double> table_;  // feature-major: table_[f * npoints + p]
};

}  // namespace isg
