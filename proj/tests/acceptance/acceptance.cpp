// Acceptance run: one verdict line per criterion, grouped from the suite reports.
// Exit status is nonzero when a check fails that is not listed as a known failure.

#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isg/suites.hpp"

namespace {

struct Criterion {
  int id;
  std::string title;
  std::string suite;
  std::vector<std::string> checks;  // decide the verdict
  std::vector<std::string> info;    // reported alongside
  double budget_seconds;
};

const std::vector<Criterion> kCriteria{
    {1,
     "combinatorial identities",
     "combinatorics",
     {"exact_S1", "exact_S2", "exact_spin_refinement", "exact_subset_resummation", "exact_pair_refinement",
      "exact_random_variable_cumulant", "pfaffian_energy_expansion"},
     {},
     30},
    {2, "pfaffian", "combinatorics", {"pfaffian_recursive_vs_matchings", "pfaffian_squared_vs_det"}, {}, 10},
    {3, "heat kernel and covariance", "heat", {"covariance_vs_green", "heat_kernel_scaling", "diagonal_covariance_constant"}, {}, 120},
    {4,
     "critical spinors",
     "critical",
     {"one_spin_boundary_residual", "one_spin_solve_vs_closed_form", "disorder_coefficient_antisymmetry",
      "green_riemann_imaginary_part"},
     {},
     120},
    {5, "critical bosonization cross-check", "critical", {"two_spin_log_derivative", "energy_ratio_constancy"}, {}, 300},
    {6,
     "first-order bosonization",
     "bridge",
     {"pointwise_ratio_constancy", "smeared_first_order"},
     {"gff_cumulant_vs_closed_form", "smeared_second_order"},
     900},
    {7,
     "massive series",
     "massive",
     {"first_order_beta_imaginary", "kernel_vs_energy_integrand", "truncated_series_dbar_residual",
      "spin_log_ratio_path_independence", "spin_log_ratio_order_independence"},
     {},
     1200},
    {8,
     "sine-Gordon",
     "sg",
     {"two_point_exponent", "counterterm_compensated_variation", "partition_function_mc"},
     {"two_point_exponent_small_distance", "recursion_vs_closed_form"},
     1200},
    {9,
     "painleve",
     "painleve",
     {"ode_residual", "sin_cos_ratio", "long_distance_plateau", "short_distance_slope"},
     {"short_distance_slope_near_cutoff"},
     30},
};

// Checks whose failure is understood and documented; they still print as failures.
const std::set<std::string> kKnownFailures{"sg/two_point_exponent", "painleve/short_distance_slope"};

std::string describe(const isg::CheckRow& r) {
  std::ostringstream s;
  s.precision(6);
  s << r.check << '=';
  if (!r.error.empty())
    s << "error(" << r.error << ')';
  else
    s << r.value;
  if (r.target != 0.0) s << " target " << r.target;
  s << " tol " << r.tol;
  return s.str();
}

}  // namespace

int main() {
  const isg::RunConfig cfg;
  std::map<std::string, isg::SuiteReport> reports;
  for (const auto& name : isg::suite_names()) {
    std::fprintf(stderr, "running suite %s\n", name.c_str());
    reports.emplace(name, isg::run_suite(name, cfg));
  }

  int unexpected = 0;
  for (const auto& c : kCriteria) {
    const auto& rep = reports.at(c.suite);
    bool ok = true;
    double seconds = 0.0;
    std::string detail;
    for (const auto& name : c.checks) {
      const auto* r = rep.find(name);
      if (!r) {
        ok = false;
        detail += " " + name + "=missing;";
        ++unexpected;
        continue;
      }
      seconds += r->seconds;
      if (!r->pass()) {
        ok = false;
        if (!kKnownFailures.count(c.suite + "/" + name)) ++unexpected;
      }
      detail += " " + describe(*r) + (r->pass() ? ";" : " [fail];");
    }
    for (const auto& name : c.info)
      if (const auto* r = rep.find(name)) {
        seconds += r->seconds;
        detail += " (" + describe(*r) + (r->pass() ? ")" : " [fail])");
      }
    const bool in_budget = seconds <= c.budget_seconds;
    if (!in_budget) ++unexpected;
    std::printf("[%s] %d %s:%s runtime %.1f s (budget %.0f s)\n", ok && in_budget ? "PASS" : "FAIL", c.id,
                c.title.c_str(), detail.c_str(), seconds, c.budget_seconds);
    std::fflush(stdout);
  }

  // Rerun every suite with the same configuration and compare the serialized reports.
  bool identical = true;
  std::string which;
  for (const auto& name : isg::suite_names()) {
    std::fprintf(stderr, "rerunning suite %s\n", name.c_str());
    const auto again = isg::run_suite(name, cfg);
    if (again.to_json().dump() != reports.at(name).to_json().dump()) {
      identical = false;
      which += " " + name;
    }
  }
  if (!identical) ++unexpected;
  std::printf("[%s] 10 determinism: reports of %zu suites %s%s\n", identical ? "PASS" : "FAIL",
              isg::suite_names().size(), identical ? "byte-identical on rerun" : "differ:", which.c_str());

  for (const auto& k : kKnownFailures) std::printf("known failure: %s\n", k.c_str());
  return unexpected == 0 ? 0 : 1;
}
