#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "isg/disk.hpp"

namespace isg {

enum class SingularityKind { inverse_sqrt, inverse_first, log };

struct SingularityHint {
  cplx location;
  SingularityKind kind = SingularityKind::inverse_first;
};

template <class T>
struct QuadResult {
  T value{};
  double error_estimate = 0.0;
  std::size_t cells = 0;
  bool converged = true;
};

struct budget_exceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Disk-shaped integration region inside the unit disk.
struct DiskRegion {
  cplx center{0.0, 0.0};
  double radius = 1.0;
};

struct DiskQuadOptions {
  double tol = 1e-6;
  std::size_t max_cells = 200000;
  DiskRegion region{};
  bool throw_on_budget = false;
};

namespace detail {

template <class T>
inline double magnitude(const T& v) {
  return std::abs(v);
}

// Neumaier-compensated accumulator.
template <class T>
struct CompensatedSum {
  T sum{};
  T comp{};
  void add(const T& x) {
    if constexpr (std::is_same_v<T, double>) {
      const double t = sum + x;
      if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
      else
        comp += (x - t) + sum;
      sum = t;
    } else {
      double re = sum.real(), im = sum.imag();
      double cre = comp.real(), cim = comp.imag();
      auto step = [](double& s, double& c, double v) {
        const double t = s + v;
        if (std::abs(s) >= std::abs(v))
          c += (s - t) + v;
        else
          c += (v - t) + s;
        s = t;
      };
      step(re, cre, x.real());
      step(im, cim, x.imag());
      sum = T(re, im);
      comp = T(cre, cim);
    }
  }
  T value() const { return sum + comp; }
};

struct GaussRule {
  std::vector<double> x, w;  // on [0,1]
};

GaussRule gauss_legendre_unit(int n);
const GaussRule& rule_high();
const GaussRule& rule_low();

// Smooth cutoff: 1 on [0, 1/2], 0 on [1, inf), C-infinity in between.
double smooth_cutoff(double t);

}  // namespace detail

// Global-adaptive tensor Gauss rule on a rectangle. Cells are refined by quadrisection in
// order of decreasing error; leaves are summed in creation order for reproducibility.
template <class T, class G>
QuadResult<T> integrate_rectangle(G&& g, double u0, double u1, double v0, double v1, int nu, int nv,
                                  double tol, std::size_t max_cells) {
  struct Cell {
    double u0, u1, v0, v1;
    T val;
    double err;
    std::size_t id;
    bool alive;
  };
  const auto& hi = detail::rule_high();
  const auto& lo = detail::rule_low();
  std::vector<Cell> cells;
  cells.reserve(256);
  auto eval = [&](double a0, double a1, double b0, double b1, T& val, double& err) {
    const double du = a1 - a0, dv = b1 - b0;
    T qh{}, ql{};
    // The low rule reuses no nodes; its sole purpose is the error estimate.
    for (std::size_t i = 0; i < hi.x.size(); ++i) {
      const double u = a0 + du * hi.x[i];
      T row{};
      for (std::size_t j = 0; j < hi.x.size(); ++j) row += hi.w[j] * g(u, b0 + dv * hi.x[j]);
      qh += hi.w[i] * row;
    }
    for (std::size_t i = 0; i < lo.x.size(); ++i) {
      const double u = a0 + du * lo.x[i];
      T row{};
      for (std::size_t j = 0; j < lo.x.size(); ++j) row += lo.w[j] * g(u, b0 + dv * lo.x[j]);
      ql += lo.w[i] * row;
    }
    val = qh * (du * dv);
    err = detail::magnitude(T((qh - ql) * (du * dv)));
  };
  auto cmp = [&](std::size_t a, std::size_t b) {
    if (cells[a].err != cells[b].err) return cells[a].err < cells[b].err;
    return cells[a].id > cells[b].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> pq(cmp);
  std::size_t next_id = 0;
  auto push = [&](double a0, double a1, double b0, double b1) {
    Cell c{a0, a1, b0, b1, T{}, 0.0, next_id++, true};
    eval(a0, a1, b0, b1, c.val, c.err);
    cells.push_back(c);
    pq.push(cells.size() - 1);
  };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double a0 = u0 + (u1 - u0) * i / nu, a1 = u0 + (u1 - u0) * (i + 1) / nu;
      const double b0 = v0 + (v1 - v0) * j / nv, b1 = v0 + (v1 - v0) * (j + 1) / nv;
      push(a0, a1, b0, b1);
    }
  double total_err = 0.0;
  for (const auto& c : cells) total_err += c.err;
  bool converged = true;
  while (total_err > tol) {
    if (cells.size() + 4 > max_cells) {
      converged = false;
      break;
    }
    const std::size_t k = pq.top();
    pq.pop();
    Cell parent = cells[k];
    cells[k].alive = false;
    total_err -= parent.err;
    const double um = 0.5 * (parent.u0 + parent.u1), vm = 0.5 * (parent.v0 + parent.v1);
    const std::size_t before = cells.size();
    push(parent.u0, um, parent.v0, vm);
    push(um, parent.u1, parent.v0, vm);
    push(parent.u0, um, vm, parent.v1);
    push(um, parent.u1, vm, parent.v1);
    for (std::size_t q = before; q < cells.size(); ++q) total_err += cells[q].err;
    if (total_err < 0) total_err = 0;
  }
  detail::CompensatedSum<T> acc;
  double err = 0.0;
  std::size_t live = 0;
  for (const auto& c : cells)
    if (c.alive) {
      acc.add(c.val);
      err += c.err;
      ++live;
    }
  return {acc.value(), err, live, converged};
}

// Integral over a disk region with local polar patches around hinted singular points.
// Each hint gets a smooth cutoff bump; the bump part is integrated in polar coordinates
// about the hint with r = R s^2 grading, the remainder in polar coordinates about the
// region center.
template <class T, class F>
QuadResult<T> integrate_disk(F&& f, const std::vector<SingularityHint>& hints_in,
                             const DiskQuadOptions& opt = {}) {
  const cplx c = opt.region.center;
  const double R = opt.region.radius;
  std::vector<cplx> hs;
  for (const auto& h : hints_in) {
    if (std::abs(h.location - c) >= R) continue;
    bool dup = false;
    for (const auto& e : hs)
      if (std::abs(e - h.location) < 1e-14) dup = true;
    if (!dup) hs.push_back(h.location);
  }
  const std::size_t nh = hs.size();
  std::vector<double> rho(nh, R);
  for (std::size_t i = 0; i < nh; ++i) {
    for (std::size_t j = 0; j < nh; ++j)
      if (i != j) rho[i] = std::min(rho[i], 0.45 * std::abs(hs[i] - hs[j]));
    rho[i] = std::min(rho[i], 0.9 * R);
  }
  auto chi_sum = [&](const cplx& z) {
    double s = 0.0;
    for (std::size_t i = 0; i < nh; ++i) {
      const double t = std::abs(z - hs[i]) / rho[i];
      if (t < 1.0) s += detail::smooth_cutoff(t);
    }
    return s;
  };
  const double part_tol = opt.tol / static_cast<double>(nh + 1);
  const std::size_t part_cells = std::max<std::size_t>(64, opt.max_cells / (nh + 1));
  QuadResult<T> out;
  detail::CompensatedSum<T> acc;
  for (std::size_t i = 0; i < nh; ++i) {
    const cplx h = hs[i];
    const double r_i = rho[i];
    // Distance from h along direction e^{i theta} to the region boundary.
    auto ray_exit = [&](double theta) {
      const cplx e = std::polar(1.0, theta);
      const cplx d = h - c;
      const double b = std::real(std::conj(d) * e);
      const double cc = std::norm(d) - R * R;
      return -b + std::sqrt(std::max(0.0, b * b - cc));
    };
    auto g = [&](double s, double theta) -> T {
      const double rmax = std::min(r_i, ray_exit(theta));
      const double r = rmax * s * s;
      if (r == 0.0) return T{};
      const cplx z = h + std::polar(r, theta);
      const double w = detail::smooth_cutoff(r / r_i);
      if (w == 0.0) return T{};
      return f(z) * (w * 2.0 * rmax * rmax * s * s * s);
    };
    auto res = integrate_rectangle<T>(g, 0.0, 1.0, 0.0, 2.0 * kPi, 2, 8, part_tol, part_cells);
    acc.add(res.value);
    out.error_estimate += res.error_estimate;
    out.cells += res.cells;
    out.converged = out.converged && res.converged;
  }
  auto g0 = [&](double r, double theta) -> T {
    if (r == 0.0 && nh == 0) return T{};
    const cplx z = c + std::polar(r, theta);
    const double w = 1.0 - chi_sum(z);
    if (w <= 0.0) return T{};
    return f(z) * (w * r);
  };
  auto res = integrate_rectangle<T>(g0, 0.0, R, 0.0, 2.0 * kPi, 4, 8, part_tol, part_cells);
  acc.add(res.value);
  out.error_estimate += res.error_estimate;
  out.cells += res.cells;
  out.converged = out.converged && res.converged;
  out.value = acc.value();
  if (!out.converged && opt.throw_on_budget) throw budget_exceeded("integrate_disk: cell budget exceeded");
  return out;
}

// One-dimensional integral along the straight segment a -> b (complex parametrisation),
// double-exponential rule, which grades automatically toward endpoint singularities.
template <class T, class F>
QuadResult<T> integrate_segment(F&& f, const cplx& a, const cplx& b, double tol = 1e-9) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const cplx d = b - a;
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  T v;
  if constexpr (std::is_same_v<T, double>) {
    if (d.imag() != 0.0) throw std::invalid_argument("integrate_segment: real integrand on complex segment");
    v = ts.integrate([&](double t) { return f(a.real() + t * d.real()); }, 0.0, 1.0, tol, &err, &l1, &levels) *
        d.real();
  } else {
    v = ts.integrate([&](double t) -> cplx { return f(a + t * d); }, 0.0, 1.0, tol, &err, &l1, &levels) * d;
  }
  return {v, err * std::abs(d), levels, true};
}

enum class ContourMode { trapezoid, adaptive };

struct nan_on_contour : std::runtime_error {
  cplx where;
  nan_on_contour(const cplx& z) : std::runtime_error("contour_circle: non-finite value"), where(z) {}
};

// Closed contour integral over the circle |z - center| = radius, counterclockwise.
template <class F>
cplx contour_circle(F&& f, const cplx& center, double radius, ContourMode mode = ContourMode::adaptive,
                    int M = 64, double tol = 1e-13) {
  auto trap = [&](int n) {
    detail::CompensatedSum<cplx> acc;
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * kPi * (k + 0.5) / n;
      const cplx e = std::polar(1.0, th);
      const cplx z = center + radius * e;
      const cplx v = f(z);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw nan_on_contour(z);
      acc.add(v * (kI * radius * e));
    }
    return acc.value() * (2.0 * kPi / n);
  };
  if (mode == ContourMode::trapezoid) return trap(M);
  cplx prev = trap(M);
  for (int n = 2 * M; n <= (1 << 16); n *= 2) {
    const cplx cur = trap(n);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

// Fixed Gauss-Legendre nodes on [a, b].
void gauss_nodes(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace isg
