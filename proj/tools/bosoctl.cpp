// Command-line harness for the verification suites, calibration and cache management.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "isg/suites.hpp"

namespace {

struct Common {
  std::string config, out, cache_dir;
  std::uint64_t seed = 0;
  double tol_scale = 0.0;
  bool timings = false;
};

isg::RunConfig make_config(const Common& o, CLI::App* sub) {
  auto cfg = o.config.empty() ? isg::RunConfig() : isg::RunConfig::load(o.config);
  if (sub->count("--seed")) cfg.set_seed(o.seed);
  if (sub->count("--tol-scale")) cfg.set_tol_scale(o.tol_scale);
  std::string dir = o.cache_dir;
  if (dir.empty())
    if (const char* env = std::getenv("BOSO_CACHE_DIR")) dir = env;
  cfg.set_cache_dir(dir);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw isg::config_error("cannot write " + path);
  f << text;
}

// JSON to --out (or stdout), CSV mirror next to it.
void emit(const Common& o, const nlohmann::json& j, const std::string& csv) {
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  write_text(o.out, text);
  if (!csv.empty()) write_text(std::filesystem::path(o.out).replace_extension(".csv").string(), csv);
}

void summarize(const isg::SuiteReport& rep) {
  for (const auto& r : rep.rows) {
    std::cerr << (r.pass() ? "[PASS] " : "[FAIL] ") << rep.suite << '/' << r.check << "  value=" << r.value
              << " target=" << r.target << " tol=" << r.tol;
    if (!r.error.empty()) std::cerr << "  error: " << r.error;
    std::cerr << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ising / sine-Gordon bosonization checks"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "run configuration (JSON or TOML)");
    s->add_option("--out", o.out, "report path (JSON; a .csv mirror is written alongside)");
    s->add_option("--seed", o.seed, "random seed (overrides the config)");
    s->add_option("--tol-scale", o.tol_scale, "multiplier applied to every tolerance");
    s->add_option("--cache-dir", o.cache_dir, "spectral cache directory (default: $BOSO_CACHE_DIR)");
    s->add_flag("--timings", o.timings, "record per-check wall time in the report");
  };
  const std::vector<std::pair<std::string, std::string>> verify{
      {"verify-combinatorics", "combinatorics"}, {"verify-heat", "heat"},   {"verify-critical", "critical"},
      {"verify-massive", "massive"},             {"verify-sg", "sg"},       {"verify-painleve", "painleve"},
      {"verify-bridge", "bridge"}};
  std::vector<CLI::App*> subs;
  for (const auto& [cmd, suite] : verify) {
    auto* s = app.add_subcommand(cmd, "run the " + suite + " suite");
    add_common(s);
    subs.push_back(s);
  }
  auto* cal = app.add_subcommand("calibrate", "measure dictionary constants");
  add_common(cal);
  auto* warm = app.add_subcommand("warm-cache", "build or load the spectral cache");
  add_common(warm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const auto cfg = make_config(o, subs[i]);
      const auto rep = isg::run_suite(verify[i].second, cfg);
      summarize(rep);
      emit(o, rep.to_json(o.timings), rep.to_csv(o.timings));
      return rep.passed() ? 0 : 1;
    }
    if (cal->parsed()) {
      const auto cfg = make_config(o, cal);
      const auto reg = isg::calibrate(cfg);
      const auto rep = reg.as_report(cfg);
      summarize(rep);
      nlohmann::json j{{"suite", "calibrate"},
                       {"config_hash", cfg.hash()},
                       {"cache_version", cfg.cache_version()},
                       {"seed", cfg.seed()},
                       {"status", reg.passed() ? "pass" : "fail"},
                       {"registry", reg.to_json()}};
      emit(o, j, rep.to_csv());
      for (const auto& r : reg.rows)
        if (!r.pass()) std::cerr << "calibration failure: row " << r.row << '\n';
      return reg.passed() ? 0 : 1;
    }
    if (warm->parsed()) {
      auto cfg = make_config(o, warm);
      if (cfg.cache_dir().empty()) throw isg::config_error("warm-cache needs --cache-dir or BOSO_CACHE_DIR");
      const auto& c = cfg.cache();
      nlohmann::json j{{"cache_version", cfg.cache_version()},
                       {"modes", c.modes().size()},
                       {"zero_cutoff", c.zero_cutoff()},
                       {"radius", c.radius()}};
      emit(o, j, "");
      return 0;
    }
  } catch (const isg::config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
