#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string tool() {
  const char* p = std::getenv("BOSOCTL");
  return p ? p : "";
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("bosoctl_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + tool() + " " + args + " 2>/dev/null >/dev/null";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("suite run and report schema", "[cli]") {
  REQUIRE_FALSE(tool().empty());
  const auto out = scratch() / "comb.json";
  CHECK(run("verify-combinatorics --out " + out.string()) == 0);
  const auto j = json::parse(slurp(out));
  CHECK(j["suite"] == "combinatorics");
  CHECK(j["status"] == "pass");
  CHECK(j["config_hash"].get<std::string>().size() == 16);
  CHECK(j.contains("cache_version"));
  std::set<std::string> families;
  for (const auto& c : j["checks"]) {
    for (const char* k : {"suite", "check", "status", "value", "target", "tol", "seconds"}) CHECK(c.contains(k));
    CHECK(c["status"] == "pass");
    families.insert(c["check"].get<std::string>());
  }
  CHECK(families.size() >= 5);
  const auto csv = slurp(fs::path(out).replace_extension(".csv"));
  CHECK(csv.rfind("suite,check,status,value,target,tol,seconds\n", 0) == 0);
}

TEST_CASE("broken tolerance fails with a named check", "[cli]") {
  const auto cfg = write("zero_tol.json", R"({"tolerances": {"pfaffian_recursive_vs_matchings": 0}})");
  const auto out = scratch() / "zero_tol_report.json";
  CHECK(run("verify-combinatorics --config " + cfg.string() + " --out " + out.string()) == 1);
  const auto j = json::parse(slurp(out));
  int failing = 0;
  for (const auto& c : j["checks"])
    if (c["status"] == "fail") {
      ++failing;
      CHECK(c["check"] == "pfaffian_recursive_vs_matchings");
    }
  CHECK(failing == 1);
}

TEST_CASE("reruns are byte-identical", "[cli]") {
  for (const std::string suite : {"combinatorics", "heat", "critical"}) {
    const auto a = scratch() / (suite + "_a.json"), b = scratch() / (suite + "_b.json");
    REQUIRE(run("verify-" + suite + " --seed 7 --out " + a.string()) == 0);
    REQUIRE(run("verify-" + suite + " --seed 7 --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
  }
  const auto c = scratch() / "heat_c.json";
  REQUIRE(run("verify-heat --seed 8 --out " + c.string()) == 0);
  CHECK(json::parse(slurp(c))["config_hash"] != json::parse(slurp(scratch() / "heat_a.json"))["config_hash"]);
}

TEST_CASE("TOML and JSON configs are equivalent", "[cli]") {
  const auto tj = write("cfg.json", R"({"seed": 5, "tol_scale": 2.0, "tolerances": {"covariance_vs_green": 1e-7}})");
  const auto tt = write("cfg.toml", "seed = 5\ntol_scale = 2.0\n[tolerances]\ncovariance_vs_green = 1e-7\n");
  const auto a = scratch() / "toml_a.json", b = scratch() / "toml_b.json";
  REQUIRE(run("verify-heat --config " + tj.string() + " --out " + a.string()) == 0);
  REQUIRE(run("verify-heat --config " + tt.string() + " --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  const auto j = json::parse(slurp(a));
  for (const auto& c : j["checks"])
    if (c["check"] == "covariance_vs_green") CHECK(c["tol"].get<double>() == Catch::Approx(2e-7));
}

TEST_CASE("configuration errors exit with code 2", "[cli]") {
  const std::vector<std::string> bad{
      R"({"unknown_key": 1})",
      R"({"tolerances": {"covariance_vs_green": -1}})",
      R"({"points": [[0.5, 0.9]]})",
      R"({"points": [[0.1, 0.1], [0.1, 0.105]]})",
      R"({"tol_scale": 0})",
      R"({"samples": 10})",
      R"({"mass_profile": {"amplitude": 1, "center": [0.8, 0], "radius": 0.3}})",
      R"({"seed": -3})",
      "{not json",
  };
  int i = 0;
  for (const auto& text : bad) {
    INFO(text);
    const auto p = write("bad" + std::to_string(i++) + ".json", text);
    CHECK(run("verify-heat --config " + p.string()) == 2);
  }
  CHECK(run("verify-heat --config " + (scratch() / "missing.json").string()) == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("verify-heat --tol-scale -1") == 2);
}

TEST_CASE("calibration registry", "[cli]") {
  const auto out = scratch() / "cal.json";
  CHECK(run("calibrate --out " + out.string()) == 0);
  const auto j = json::parse(slurp(out));
  std::map<std::string, json> rows;
  for (const auto& r : j["registry"]) rows[r["row"].get<std::string>()] = r;
  REQUIRE(rows.count("energy"));
  CHECK(rows["energy"]["residual"].get<double>() < 1e-3);
  CHECK(rows["energy"]["configurations"].get<int>() >= 20);
  CHECK(rows["energy"]["constant"].get<double>() > 0.0);
  REQUIRE(rows.count("spin"));
  CHECK(rows["spin"]["residual"].get<double>() < 1e-4);
  REQUIRE(rows.count("energy_insertion"));
  CHECK(rows["energy_insertion"]["constant"].get<double>() > 0.0);
  REQUIRE(rows.count("fermion"));
  CHECK(rows["fermion"]["status"] == "not_measured");
  const auto single = write("single.json", R"({"points": [[0.1, 0.2]]})");
  CHECK(run("calibrate --config " + single.string()) == 2);
}

TEST_CASE("cache directory from the environment", "[cli]") {
  const auto dir = scratch() / "cache";
  fs::create_directories(dir);
  const auto out = scratch() / "warm.json";
  CHECK(run("warm-cache --out " + out.string(), "BOSO_CACHE_DIR=" + dir.string()) == 0);
  CHECK(!fs::is_empty(dir));
  CHECK(json::parse(slurp(out))["modes"].get<int>() > 0);
  CHECK(run("warm-cache", "env -u BOSO_CACHE_DIR") == 2);
  const auto a = scratch() / "heat_cached.json", b = scratch() / "heat_default.json";
  REQUIRE(run("verify-heat --cache-dir " + dir.string() + " --out " + a.string()) == 0);
  REQUIRE(run("verify-heat --out " + b.string(), "env -u BOSO_CACHE_DIR") == 0);
  CHECK(slurp(a) == slurp(b));
}
