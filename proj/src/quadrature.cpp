#include "isg/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>

namespace isg {
namespace detail {

GaussRule gauss_legendre_unit(int n) {
  GaussRule r;
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> xs, ws;
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    xs.push_back(z);
    ws.push_back(w);
    if (z != 0.0) {
      xs.push_back(-z);
      ws.push_back(w);
    }
  }
  std::vector<std::size_t> idx(xs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  for (auto i : idx) {
    r.x.push_back(0.5 * (xs[i] + 1.0));
    r.w.push_back(0.5 * ws[i]);
  }
  return r;
}

const GaussRule& rule_high() {
  static const GaussRule r = gauss_legendre_unit(8);
  return r;
}

const GaussRule& rule_low() {
  static const GaussRule r = gauss_legendre_unit(5);
  return r;
}

double smooth_cutoff(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double s = 2.0 * (t - 0.5);
  const double a = std::exp(-1.0 / (1.0 - s));
  const double b = std::exp(-1.0 / s);
  return a / (a + b);
}

}  // namespace detail

void gauss_nodes(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  const auto r = detail::gauss_legendre_unit(n);
  x.resize(r.x.size());
  w.resize(r.w.size());
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    x[i] = a + (b - a) * r.x[i];
    w[i] = (b - a) * r.w[i];
  }
}

}  // namespace isg
