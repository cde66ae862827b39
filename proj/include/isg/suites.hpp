#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "isg/massive.hpp"
#include "isg/sine_gordon.hpp"
#include "isg/spectral.hpp"

namespace isg {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Validated run configuration. Unknown keys, malformed values, negative tolerances and
// points that are not interior or closer than delta_all are rejected with config_error.
class RunConfig {
 public:
  RunConfig();
  static RunConfig from_json(const nlohmann::json& doc);
  // JSON or TOML, chosen by extension (.toml) or by content.
  static RunConfig load(const std::string& path);

  std::uint64_t seed() const { return seed_; }
  double tol_scale() const { return tol_scale_; }
  double delta_all() const { return delta_all_; }
  void set_seed(std::uint64_t s) { seed_ = s; }
  void set_tol_scale(double s);
  void set_cache_dir(std::string dir) { cache_dir_ = std::move(dir); }
  const std::string& cache_dir() const { return cache_dir_; }

  // Tolerance for a named check: the override if present, else the default, times tol_scale.
  double tol(const std::string& check, double fallback) const;
  std::size_t samples(std::size_t fallback) const;
  double number(const std::string& key, double fallback) const;
  std::vector<cplx> points(std::vector<cplx> fallback) const;
  std::vector<std::pair<cplx, cplx>> spin_pairs(std::vector<std::pair<cplx, cplx>> fallback) const;
  cplx spin(const cplx& fallback) const;
  MassProfile mass_profile(const MassProfile& fallback) const;
  TestDensity test_density(const TestDensity& fallback) const;
  bool has(const std::string& key) const { return doc_.contains(key); }

  // Canonical form of the effective configuration and its FNV-1a hash.
  nlohmann::json canonical() const;
  std::string hash() const;

  const SpectralCache& cache() const;
  std::string cache_version() const;

 private:
  nlohmann::json doc_ = nlohmann::json::object();
  std::uint64_t seed_ = 20240611;
  double tol_scale_ = 1.0;
  double delta_all_ = 0.02;
  std::string cache_dir_;
  mutable std::shared_ptr<const SpectralCache> cache_;
};

struct CheckRow {
  std::string check;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  double seconds = 0.0;
  std::string error;
  bool pass() const;
};

struct SuiteReport {
  std::string suite;
  std::string config_hash;
  std::string cache_version;
  std::uint64_t seed = 0;
  std::vector<CheckRow> rows;

  bool passed() const;
  const CheckRow* find(const std::string& check) const;
  // Timings are left out unless requested so that reruns are byte-identical.
  nlohmann::json to_json(bool timings = false) const;
  std::string to_csv(bool timings = false) const;
};

// Suites: combinatorics, heat, critical, massive, sg, painleve, bridge.
const std::vector<std::string>& suite_names();
SuiteReport run_suite(const std::string& name, const RunConfig& cfg);

struct CalibrationRow {
  std::string row;
  std::optional<double> constant;
  double residual = 0.0;  // max relative deviation from the fitted constant
  double tol = 0.0;
  std::size_t configurations = 0;
  std::string note;
  bool pass() const { return !constant || residual <= tol; }
};

struct CalibrationRegistry {
  std::vector<CalibrationRow> rows;
  bool passed() const;
  const CalibrationRow* find(const std::string& row) const;
  nlohmann::json to_json() const;
  SuiteReport as_report(const RunConfig& cfg) const;
};

CalibrationRegistry calibrate(const RunConfig& cfg);

// Doubled-Ising and GFF sides of the first-order bosonization integrand for one spin at a
// and an energy insertion at u, both normalized by the spin expectation.
double ising_energy_integrand(const CriticalSystem& sys, const cplx& u);
double gff_cos2_integrand(const cplx& a, const cplx& u);

}  // namespace isg
