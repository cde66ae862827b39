#include "isg/gff.hpp"

#include <cmath>

#include "isg/partitions.hpp"

namespace isg {

const GreenModel& disk_green_model() {
  static const GreenModel m{[](const cplx& x, const cplx& y) { return green(x, y); },
                            [](const cplx& x) { return harmonic_part(x, x); }};
  return m;
}

double wick_constant(double gamma) { return std::exp(gamma * gamma * (kEulerGamma - std::log(4.0)) / (8.0 * kPi)); }

double charge_correlation(const std::vector<Charge>& cfg, const GreenModel& gm) {
  double e = 0.0;
  for (std::size_t j = 0; j < cfg.size(); ++j) {
    if (!in_open_disk(cfg[j].x)) throw domain_error("charge_correlation: point outside the disk");
    for (std::size_t k = j + 1; k < cfg.size(); ++k) {
      if (cfg[j].x == cfg[k].x) throw domain_error("charge_correlation: coincident points");
      e -= cfg[j].gamma * cfg[k].gamma * gm.green(cfg[j].x, cfg[k].x);
    }
    e -= 0.5 * cfg[j].gamma * cfg[j].gamma * gm.diag(cfg[j].x);
  }
  return std::exp(e);
}

cplx green_derivative(const cplx& y1, Deriv d1, const cplx& y2, Deriv d2) {
  if (y1 == y2) throw domain_error("green_derivative: coincident points");
  if (d1 == Deriv::none && d2 == Deriv::none) return green(y1, y2);
  if (d1 == Deriv::none) return green_derivative(y2, d2, y1, d1);
  if (d2 == Deriv::none) return d1 == Deriv::dz ? green_dz(y1, y2) : green_dzbar(y1, y2);
  if (d1 == Deriv::dz && d2 == Deriv::dz) return green_dz_dw(y1, y2);
  if (d1 == Deriv::dz && d2 == Deriv::dzbar) return green_dz_dwbar(y1, y2);
  if (d1 == Deriv::dzbar && d2 == Deriv::dz) return std::conj(green_dz_dwbar(y1, y2));
  return std::conj(green_dz_dw(y1, y2));
}

namespace {

// Sum over partial pairings of the fields: pairs contribute the covariance, unpaired
// fields their mean shift.
cplx isserlis(const std::vector<FieldPoint>& f, const std::vector<cplx>& shift, std::vector<bool>& used) {
  std::size_t i = 0;
  while (i < f.size() && used[i]) ++i;
  if (i == f.size()) return 1.0;
  used[i] = true;
  cplx total = shift[i] * isserlis(f, shift, used);
  for (std::size_t j = i + 1; j < f.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    total += green_derivative(f[i].y, f[i].d, f[j].y, f[j].d) * isserlis(f, shift, used);
    used[j] = false;
  }
  used[i] = false;
  return total;
}

}  // namespace

cplx mixed_correlation(const std::vector<Charge>& cfg, const std::vector<FieldPoint>& fields) {
  const double base = charge_correlation(cfg);
  if (fields.empty()) return base;
  std::vector<cplx> shift(fields.size());
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (!in_open_disk(fields[k].y)) throw domain_error("mixed_correlation: point outside the disk");
    cplx s = 0.0;
    for (const auto& c : cfg) s += c.gamma * green_derivative(fields[k].y, fields[k].d, c.x, Deriv::none);
    shift[k] = kI * s;
  }
  std::vector<bool> used(fields.size(), false);
  return base * isserlis(fields, shift, used);
}

namespace {

double trig_gamma(Trig t) { return (t == Trig::cos1 || t == Trig::sin1) ? kSqrtPi : 2.0 * kSqrtPi; }
bool is_sin(Trig t) { return t == Trig::sin1 || t == Trig::sin2; }

}  // namespace

cplx trig_correlation(const std::vector<TrigFactor>& factors, const std::vector<FieldPoint>& fields,
                      const GreenModel& gm) {
  const std::size_t n = factors.size();
  if (n > 20) throw std::invalid_argument("trig_correlation: too many factors");
  cplx total = 0.0;
  std::vector<Charge> cfg(n);
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    cplx coef = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool minus = (mask >> j) & 1ul;
      cfg[j] = {factors[j].x, minus ? -trig_gamma(factors[j].kind) : trig_gamma(factors[j].kind)};
      if (is_sin(factors[j].kind))
        coef *= minus ? cplx(0.0, 0.5) : cplx(0.0, -0.5);  // (e^{+} - e^{-}) / 2i
      else
        coef *= 0.5;
    }
    if (fields.empty())
      total += coef * charge_correlation(cfg, gm);
    else
      total += coef * mixed_correlation(cfg, fields);
  }
  return total;
}

double counterterm_kernel(const cplx& x, const cplx& y) {
  const double joint = trig_correlation({{Trig::cos2, x}, {Trig::cos2, y}}).real();
  const double one_x = charge_correlation({{x, 2.0 * kSqrtPi}});
  const double one_y = charge_correlation({{y, 2.0 * kSqrtPi}});
  return joint - one_x * one_y;
}

cplx gff_cumulant(const std::vector<TrigFactor>& factors, const std::vector<std::vector<int>>& blocks,
                  const GreenModel& gm) {
  std::vector<int> idx(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) idx[i] = static_cast<int>(i);
  auto moment = [&](const std::vector<int>& which) {
    std::vector<TrigFactor> sub;
    for (int b : which)
      for (int f : blocks[b]) sub.push_back(factors.at(f));
    return trig_correlation(sub, {}, gm);
  };
  return cumulant<cplx>(moment, idx);
}

}  // namespace isg
