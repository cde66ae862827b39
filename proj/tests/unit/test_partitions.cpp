#include <catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "isg/partitions.hpp"

using namespace isg;
using rational = boost::multiprecision::cpp_rational;

namespace {
// Independent oracle: partitions from restricted growth strings.
std::set<std::vector<std::vector<int>>> rgs_partitions(int n) {
  std::set<std::vector<std::vector<int>>> out;
  std::vector<int> a(n, 0);
  auto rec = [&](auto& self, int i, int maxv) -> void {
    if (i == n) {
      std::vector<std::vector<int>> blocks(maxv + 1);
      for (int j = 0; j < n; ++j) blocks[a[j]].push_back(j + 1);
      out.insert(blocks);
      return;
    }
    for (int v = 0; v <= maxv + 1; ++v) {
      a[i] = v;
      self(self, i + 1, std::max(maxv, v));
    }
  };
  if (n > 0) {
    a[0] = 0;
    rec(rec, 1, 0);
  }
  return out;
}

Eigen::MatrixXd random_skew(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  return A - A.transpose();
}
}  // namespace

TEST_CASE("partition enumeration", "[partition]") {
  CHECK(partitions(1).size() == 1);
  CHECK(partitions(3).size() == 5);
  CHECK(partitions(4).size() == 15);
  CHECK(partitions(10).size() == 115975);
  CHECK_THROWS(partitions(11));
  CHECK_THROWS(partitions(0));
  for (int n = 1; n <= 6; ++n) {
    auto ps = partitions(n);
    std::set<std::vector<std::vector<int>>> seen;
    for (const auto& p : ps) {
      // canonical: sorted blocks ordered by minimum, covering {1..n}
      std::vector<int> all;
      for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        CHECK(std::is_sorted(p.blocks[b].begin(), p.blocks[b].end()));
        if (b > 0) CHECK(p.blocks[b - 1].front() < p.blocks[b].front());
        all.insert(all.end(), p.blocks[b].begin(), p.blocks[b].end());
      }
      std::sort(all.begin(), all.end());
      for (int i = 0; i < n; ++i) CHECK(all[i] == i + 1);
      seen.insert(p.blocks);
    }
    CHECK(seen.size() == ps.size());
    CHECK(seen == rgs_partitions(n));
  }
}

TEST_CASE("cumulants", "[partition]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::map<std::vector<int>, double> table;
  auto moment = [&](const std::vector<int>& b) {
    auto key = b;
    std::sort(key.begin(), key.end());
    auto it = table.find(key);
    if (it == table.end()) it = table.emplace(key, u(rng)).first;
    return it->second;
  };
  CHECK(cumulant<double>(moment, {1}) == moment({1}));
  CHECK(cumulant<double>(moment, {1, 2}) == Catch::Approx(moment({1, 2}) - moment({1}) * moment({2})));
  const std::vector<int> idx{1, 2, 3, 4};
  auto cum = [&](const std::vector<int>& b) { return cumulant<double>(moment, b); };
  CHECK(std::abs(moment_from_cumulants<double>(cum, idx) - moment(idx)) < 1e-12);
  // Multilinearity in the top moment: only the full block carries it, with coefficient 1.
  const double before = cumulant<double>(moment, idx);
  table[idx] += 0.25;
  CHECK(std::abs(cumulant<double>(moment, idx) - before - 0.25) < 1e-14);
}

TEST_CASE("pfaffians", "[partition]") {
  Eigen::MatrixXd M2(2, 2);
  M2 << 0, 1.7, -1.7, 0;
  CHECK(pfaffian(M2) == 1.7);
  std::mt19937_64 rng(5);
  Eigen::MatrixXd M4 = random_skew(4, rng);
  const double hand = M4(0, 1) * M4(2, 3) - M4(0, 2) * M4(1, 3) + M4(0, 3) * M4(1, 2);
  CHECK(std::abs(pfaffian(M4) - hand) < 1e-12);
  CHECK(std::abs(pfaffian_matchings(M4) - hand) < 1e-12);
  for (int n : {6, 8, 10}) {
    Eigen::MatrixXd M = random_skew(n, rng);
    const double pf = pfaffian(M);
    CHECK(std::abs(pf - pfaffian_matchings(M)) < 1e-10 * std::max(1.0, std::abs(pf)));
    const double det = M.determinant();
    CHECK(std::abs(pf * pf - det) < 1e-9 * std::abs(det));
  }
  // Swapping rows/columns i and j flips the sign.
  Eigen::MatrixXd M6 = random_skew(6, rng);
  Eigen::MatrixXd S = M6;
  S.row(1).swap(S.row(4));
  S.col(1).swap(S.col(4));
  CHECK(std::abs(pfaffian(S) + pfaffian(M6)) < 1e-12);
  Eigen::MatrixXd odd = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(pfaffian(odd), odd_dimension);
  // Complex entries.
  Eigen::MatrixXcd C(4, 4);
  C.setZero();
  C(0, 1) = {1, 2};
  C(2, 3) = {0, 1};
  C(0, 2) = {3, 0};
  C(1, 3) = {0.5, -1};
  Eigen::MatrixXcd Cs = C - C.transpose();
  const auto pc = pfaffian(Cs);
  CHECK(std::abs(pc * pc - Cs.determinant()) < 1e-12);
}

TEST_CASE("identity suite", "[partition]") {
  // Spot values from direct summation.
  rational s3 = rational(8) - rational(4);
  CHECK(s3 == 4);
  CHECK(2 + 1 + 1 + 2 == 6);
  const auto report = identity_suite(6);
  std::set<std::string> families;
  for (const auto& r : report) {
    INFO(r.identity << " " << r.instance << " residual " << r.residual);
    CHECK(r.pass);
    families.insert(r.identity);
  }
  CHECK(families.count("S1"));
  CHECK(families.count("S2"));
  CHECK(families.count("subset_resummation"));
  CHECK(families.count("pair_refinement"));
  CHECK(families.count("random_variable_cumulant"));
  CHECK(families.count("pfaffian_energy_expansion"));
  const auto j = identity_report_json(report);
  CHECK(j.size() == report.size());
  CHECK(j[0].contains("residual"));
}
