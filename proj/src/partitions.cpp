#include "isg/partitions.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

namespace isg {

using rational = boost::multiprecision::cpp_rational;

std::vector<SetPartition> partitions(int n) {
  if (n < 1 || n > 10) throw std::invalid_argument("partitions: n must lie in [1, 10]");
  std::vector<int> elems(n);
  for (int i = 0; i < n; ++i) elems[i] = i + 1;
  std::vector<SetPartition> out;
  for_each_partition(elems, [&](const std::vector<std::vector<int>>& blocks) { out.push_back({blocks}); });
  return out;
}

namespace {

rational rfact(int n) {
  rational r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

rational binom(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  rational r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int sgn(int k) { return k % 2 == 0 ? 1 : -1; }

double to_double(const rational& r) { return r.convert_to<double>(); }

IdentityRecord exact_record(std::string id, std::string inst, const rational& lhs, const rational& rhs) {
  const rational d = lhs - rhs;
  return {std::move(id), std::move(inst), d == 0, std::abs(to_double(d))};
}

// Sizes |tau| of all tau with nu <=_2 tau: tau merges disjoint pairs of the q blocks of nu.
// Returns counts indexed by the number of merged pairs.
std::vector<rational> pair_merge_counts(int q) {
  std::vector<rational> counts(q / 2 + 1, 0);
  std::vector<bool> used(q, false);
  auto rec = [&](auto& self, int i, int pairs) -> void {
    while (i < q && used[i]) ++i;
    if (i == q) {
      counts[pairs] += 1;
      return;
    }
    used[i] = true;
    self(self, i + 1, pairs);
    for (int j = i + 1; j < q; ++j) {
      if (used[j]) continue;
      used[j] = true;
      self(self, i + 1, pairs + 1);
      used[j] = false;
    }
    used[i] = false;
  };
  rec(rec, 0, 0);
  return counts;
}

void family_a(std::vector<IdentityRecord>& out) {
  for (int q = 0; q <= 12; ++q) {
    rational s1 = 0;
    for (int k = 0; 2 * k <= q; ++k) s1 += sgn(k) * rational(boost::multiprecision::cpp_int(1) << (q - 2 * k)) * binom(q - k, k);
    out.push_back(exact_record("S1", "q=" + std::to_string(q), s1, rational(q + 1)));
    if (q >= 1) {
      rational s2 = 0;
      for (int k = 0; 2 * k <= q; ++k)
        s2 += sgn(k) * rational(boost::multiprecision::cpp_int(1) << (q - 2 * k)) * binom(q - k - 1, k - 1);
      out.push_back(exact_record("S2", "q=" + std::to_string(q), s2, rational(-(q - 1))));
    }
  }
  // The refinement sum these closed forms feed into, by direct enumeration of merges.
  for (int q = 1; q <= 12; ++q) {
    const auto counts = pair_merge_counts(q);
    rational lhs = 0;
    for (std::size_t pairs = 0; pairs < counts.size(); ++pairs) {
      const int t = q - static_cast<int>(pairs);
      lhs += counts[pairs] * sgn(t - 1) * rfact(t - 1) * rational(boost::multiprecision::cpp_int(1) << t);
    }
    out.push_back(exact_record("spin_refinement", "|nu|=" + std::to_string(q), lhs, 2 * sgn(q - 1) * rfact(q - 1)));
  }
}

void family_b(std::vector<IdentityRecord>& out) {
  for (int t = 0; t <= 12; ++t) {
    std::vector<int> blocks(t);
    for (int i = 0; i < t; ++i) blocks[i] = i;
    rational lhs = 0;
    for_each_subset(blocks, [&](const std::vector<int>& in, const std::vector<int>& rest) {
      lhs += rfact(static_cast<int>(in.size())) * rfact(static_cast<int>(rest.size()));
    });
    out.push_back(exact_record("subset_resummation", "|tau|=" + std::to_string(t), lhs, rfact(t + 1)));
  }
}

void family_c(std::vector<IdentityRecord>& out) {
  for (int q = 1; q <= 12; ++q) {
    const auto counts = pair_merge_counts(q);
    rational lhs = 0;
    for (std::size_t pairs = 0; pairs < counts.size(); ++pairs) {
      const int t = q - static_cast<int>(pairs);
      lhs += counts[pairs] * sgn(t) * rfact(t) * rational(boost::multiprecision::cpp_int(1) << t);
    }
    out.push_back(exact_record("pair_refinement", "|nu|=" + std::to_string(q), lhs, sgn(q) * rfact(q + 1)));
  }
}

// Finite probability space: outcome weights and the values of X (index 0) and Y_1..Y_p.
struct FiniteSpace {
  std::vector<rational> prob;
  std::vector<std::vector<rational>> value;  // value[var][outcome]
};

// E(prod over the variables in mask), bit 0 = X, bit j = Y_j.
std::vector<rational> all_moments(const FiniteSpace& s, int nvars) {
  std::vector<rational> m(1u << nvars, 0);
  for (unsigned mask = 0; mask < m.size(); ++mask)
    for (std::size_t w = 0; w < s.prob.size(); ++w) {
      rational prod = s.prob[w];
      for (int v = 0; v < nvars; ++v)
        if ((mask >> v) & 1u) prod *= s.value[v][w];
      m[mask] += prod;
    }
  return m;
}

unsigned mask_of(const std::vector<int>& vars) {
  unsigned m = 0;
  for (int v : vars) m |= 1u << v;
  return m;
}

void rv_identity(const FiniteSpace& s, int p, const std::string& inst, std::vector<IdentityRecord>& out) {
  const auto E = all_moments(s, p + 1);
  std::vector<int> ys(p);
  for (int j = 0; j < p; ++j) ys[j] = j + 1;
  rational lhs = 0;
  for_each_partition(ys, [&](const std::vector<std::vector<int>>& pi) {
    rational prod = 1;
    for (const auto& B : pi) {
      rational inner = 0;
      for_each_partition(B, [&](const std::vector<std::vector<int>>& sigma) {
        const int k = static_cast<int>(sigma.size());
        rational with_x = 1, without = 1;
        for (const auto& C : sigma) {
          with_x *= E[mask_of(C) | 1u];
          without *= E[mask_of(C)];
        }
        inner += sgn(k - 1) * rfact(k - 1) * (with_x - without);
      });
      prod *= inner;
    }
    lhs += prod;
  });
  std::vector<int> all(p + 1);
  for (int j = 0; j <= p; ++j) all[j] = j;
  rational rhs = 0;
  for_each_partition(all, [&](const std::vector<std::vector<int>>& pi) {
    const int k = static_cast<int>(pi.size());
    rational prod = sgn(k - 1) * rfact(k - 1);
    for (const auto& B : pi) prod *= E[mask_of(B)];
    rhs += prod;
  });
  out.push_back(exact_record("random_variable_cumulant", inst, lhs, rhs));
}

void family_d(int max_p, std::mt19937_64& rng, std::vector<IdentityRecord>& out) {
  std::uniform_int_distribution<int> small(-4, 4), weight(1, 5);
  for (int p = 1; p <= std::min(max_p, 6); ++p) {
    // Independent variables, each uniform on a 3-point support. Kept small: 3^{p+1} outcomes.
    if (p <= 4) {
      FiniteSpace s;
      const int nv = p + 1;
      int outcomes = 1;
      for (int v = 0; v < nv; ++v) outcomes *= 3;
      std::vector<std::array<rational, 3>> support(nv);
      for (int v = 0; v < nv; ++v)
        for (int i = 0; i < 3; ++i) support[v][i] = rational(small(rng), weight(rng));
      // E X = 1: support of X shifted to mean 1.
      rational mx = (support[0][0] + support[0][1] + support[0][2]) / 3;
      for (int i = 0; i < 3; ++i) support[0][i] += 1 - mx;
      s.prob.assign(outcomes, rational(1, outcomes));
      s.value.assign(nv, std::vector<rational>(outcomes));
      for (int w = 0; w < outcomes; ++w) {
        int code = w;
        for (int v = 0; v < nv; ++v) {
          s.value[v][w] = support[v][code % 3];
          code /= 3;
        }
      }
      rv_identity(s, p, "p=" + std::to_string(p) + ",independent", out);
    }
    // Correlated variables on a common 5-point space with random weights.
    for (int rep = 0; rep < 2; ++rep) {
      FiniteSpace s;
      const int outcomes = 5;
      rational total = 0;
      for (int w = 0; w < outcomes; ++w) {
        s.prob.push_back(rational(weight(rng)));
        total += s.prob.back();
      }
      for (auto& pr : s.prob) pr /= total;
      s.value.assign(p + 1, std::vector<rational>(outcomes));
      for (int v = 0; v <= p; ++v)
        for (int w = 0; w < outcomes; ++w) s.value[v][w] = rational(small(rng), weight(rng));
      rational ex = 0;
      for (int w = 0; w < outcomes; ++w) ex += s.prob[w] * s.value[0][w];
      for (int w = 0; w < outcomes; ++w) s.value[0][w] += 1 - ex;
      rv_identity(s, p, "p=" + std::to_string(p) + ",correlated#" + std::to_string(rep), out);
    }
  }
}

// Correlations defined as Pfaffians of principal submatrices of one skew matrix. Fermion
// j occupies index j; energy c occupies the adjacent pair (2k + 2c, 2k + 2c + 1).
void family_e(int max_p, std::mt19937_64& rng, std::vector<IdentityRecord>& out) {
  std::normal_distribution<double> nd;
  for (int k = 1; k <= 3; ++k)
    for (int nc = 0; k + nc <= std::min(max_p, 6); ++nc) {
      const int n = 2 * k + 2 * nc;
      Eigen::MatrixXd A(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
      const Eigen::MatrixXd M = A - A.transpose();
      auto entry = [&](int i, int j) { return M(i, j); };
      auto corr = [&](const std::vector<int>& fermions, const std::vector<int>& energies) {
        std::vector<int> idx = fermions;
        for (int c : energies) {
          idx.push_back(2 * k + 2 * c);
          idx.push_back(2 * k + 2 * c + 1);
        }
        return pfaffian_indexed<double>(entry, idx);
      };
      std::vector<int> Z(2 * k), C(nc);
      for (int i = 0; i < 2 * k; ++i) Z[i] = i;
      for (int c = 0; c < nc; ++c) C[c] = c;
      const double lhs = corr(Z, C);
      double rhs = 0.0, scale = std::abs(lhs);
      for (int l = 1; l < 2 * k; ++l) {
        const double sign = (l % 2 == 1) ? 1.0 : -1.0;
        std::vector<int> rest_z;
        for (int i = 1; i < 2 * k; ++i)
          if (i != l) rest_z.push_back(i);
        for_each_subset(C, [&](const std::vector<int>& U, const std::vector<int>& CminusU) {
          double psum = 0.0;
          for_each_partition(CminusU, [&](const std::vector<std::vector<int>>& pi) {
            const int b = static_cast<int>(pi.size());
            double prod = sgn(b) * factorial(b);
            for (const auto& B : pi) prod *= corr({}, B);
            psum += prod;
          });
          for_each_subset(U, [&](const std::vector<int>& U1, const std::vector<int>& U2) {
            const double term = sign * corr({0, l}, U1) * corr(rest_z, U2) * psum;
            rhs += term;
            scale = std::max(scale, std::abs(term));
          });
        });
      }
      const double res = std::abs(lhs - rhs) / std::max(scale, 1e-300);
      out.push_back({"pfaffian_energy_expansion", "k=" + std::to_string(k) + ",|C|=" + std::to_string(nc),
                     res <= 1e-9, res});
    }
}

}  // namespace

std::vector<IdentityRecord> identity_suite(int max_p, unsigned long seed) {
  if (max_p < 1) throw std::invalid_argument("identity_suite: max_p must be positive");
  std::mt19937_64 rng(seed);
  std::vector<IdentityRecord> out;
  family_a(out);
  family_b(out);
  family_c(out);
  family_d(max_p, rng, out);
  family_e(max_p, rng, out);
  return out;
}

nlohmann::json identity_report_json(const std::vector<IdentityRecord>& records) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records)
    j.push_back({{"identity", r.identity},
                 {"instance", r.instance},
                 {"status", r.pass ? "pass" : "fail"},
                 {"residual", r.residual}});
  return j;
}

}  // namespace isg
