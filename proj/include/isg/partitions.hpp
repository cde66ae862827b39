#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace isg {

// A partition of an index set into blocks. Blocks are sorted internally and ordered
// by their smallest element.
struct SetPartition {
  std::vector<std::vector<int>> blocks;
  std::size_t size() const { return blocks.size(); }
};

namespace detail {

template <class F>
void partition_rec(const std::vector<int>& elems, std::size_t pos, std::vector<std::vector<int>>& blocks, F& cb) {
  if (pos == elems.size()) {
    cb(static_cast<const std::vector<std::vector<int>>&>(blocks));
    return;
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].push_back(elems[pos]);
    partition_rec(elems, pos + 1, blocks, cb);
    blocks[b].pop_back();
  }
  blocks.push_back({elems[pos]});
  partition_rec(elems, pos + 1, blocks, cb);
  blocks.pop_back();
}

}  // namespace detail

// Calls cb(blocks) once for every partition of elems. Blocks keep the order of elems,
// so a sorted input yields canonical partitions. The empty set has one (empty) partition.
template <class F>
void for_each_partition(const std::vector<int>& elems, F&& cb) {
  std::vector<std::vector<int>> blocks;
  blocks.reserve(elems.size());
  detail::partition_rec(elems, 0, blocks, cb);
}

// All partitions of {1..n} in canonical form.
std::vector<SetPartition> partitions(int n);

// Calls cb(subset, complement) for every subset of elems.
template <class F>
void for_each_subset(const std::vector<int>& elems, F&& cb) {
  const std::size_t n = elems.size();
  if (n > 30) throw std::invalid_argument("for_each_subset: too many elements");
  std::vector<int> in, out;
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    in.clear();
    out.clear();
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1ul ? in : out).push_back(elems[i]);
    cb(static_cast<const std::vector<int>&>(in), static_cast<const std::vector<int>&>(out));
  }
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Joint cumulant from a moment oracle: sum over partitions of
// (-1)^{|lambda|-1} (|lambda|-1)! prod_B moment(B).
template <class T, class Oracle>
T cumulant(Oracle&& moment, const std::vector<int>& indices) {
  T total{};
  for_each_partition(indices, [&](const std::vector<std::vector<int>>& blocks) {
    const int k = static_cast<int>(blocks.size());
    T prod = T(((k - 1) % 2 == 0) ? 1 : -1) * T(factorial(k - 1));
    for (const auto& b : blocks) prod *= moment(b);
    total += prod;
  });
  return total;
}

// Inverse map: moment = sum over partitions of products of cumulants.
template <class T, class Oracle>
T moment_from_cumulants(Oracle&& cum, const std::vector<int>& indices) {
  T total{};
  for_each_partition(indices, [&](const std::vector<std::vector<int>>& blocks) {
    T prod = T(1);
    for (const auto& b : blocks) prod *= cum(b);
    total += prod;
  });
  return total;
}

struct odd_dimension : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

template <class T, class Entry>
T pf_rec(Entry& entry, int* idx, int n) {
  if (n == 0) return T(1);
  T total{};
  const int first = idx[0];
  for (int l = 1; l < n; ++l) {
    const T m = entry(first, idx[l]);
    if (m == T{}) continue;
    std::array<int, 16> rest{};
    int r = 0;
    for (int q = 1; q < n; ++q)
      if (q != l) rest[r++] = idx[q];
    const T sub = pf_rec<T>(entry, rest.data(), n - 2);
    total += (l % 2 == 1 ? m : -m) * sub;
  }
  return total;
}

}  // namespace detail

// Pfaffian by expansion along the first row, over the principal submatrix picked by idx
// (in that order). entry(i, j) must be skew.
template <class T, class Entry>
T pfaffian_indexed(Entry&& entry, const std::vector<int>& idx) {
  if (idx.size() % 2) throw odd_dimension("pfaffian: odd dimension");
  if (idx.size() > 16) throw std::invalid_argument("pfaffian: dimension above 16");
  std::array<int, 16> buf{};
  for (std::size_t i = 0; i < idx.size(); ++i) buf[i] = idx[i];
  return detail::pf_rec<T>(entry, buf.data(), static_cast<int>(idx.size()));
}

template <class T>
T pfaffian(const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("pfaffian: non-square matrix");
  if (M.rows() > 12) throw std::invalid_argument("pfaffian: dimension above 12");
  std::vector<int> idx(M.rows());
  for (int i = 0; i < M.rows(); ++i) idx[i] = i;
  return pfaffian_indexed<T>([&](int i, int j) { return M(i, j); }, idx);
}

// Signed sum over perfect matchings, sign from the parity of the matching permutation.
template <class T>
T pfaffian_matchings(const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& M) {
  const int n = static_cast<int>(M.rows());
  if (n % 2) throw odd_dimension("pfaffian: odd dimension");
  std::vector<int> perm;
  std::vector<bool> used(n, false);
  T total{};
  auto parity = [](const std::vector<int>& p) {
    int inv = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j)
        if (p[i] > p[j]) ++inv;
    return inv % 2 ? -1 : 1;
  };
  auto rec = [&](auto& self) -> void {
    int i = 0;
    while (i < n && used[i]) ++i;
    if (i == n) {
      T prod = T(parity(perm));
      for (std::size_t q = 0; q < perm.size(); q += 2) prod *= M(perm[q], perm[q + 1]);
      total += prod;
      return;
    }
    used[i] = true;
    for (int j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      perm.push_back(i);
      perm.push_back(j);
      self(self);
      perm.pop_back();
      perm.pop_back();
      used[j] = false;
    }
    used[i] = false;
  };
  rec(rec);
  return total;
}

struct IdentityRecord {
  std::string identity;
  std::string instance;
  bool pass = false;
  double residual = 0.0;
};

// Brute-force checks of the combinatorial identities behind the series expansions.
// max_p bounds the sizes used for the random-variable and Pfaffian families; the pure
// counting families run up to 12.
std::vector<IdentityRecord> identity_suite(int max_p, unsigned long seed = 20240611ul);

nlohmann::json identity_report_json(const std::vector<IdentityRecord>& records);

}  // namespace isg
