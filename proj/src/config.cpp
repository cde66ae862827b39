#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "isg/suites.hpp"

namespace isg {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys{"suite", "seed",   "tol_scale", "delta_all",    "tolerances", "samples", "points",
                                  "spin_pairs", "spin", "mass_profile", "test_density", "eps2",       "t"};

cplx parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw config_error(where + ": expected [x, y]");
  const cplx z{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw config_error(where + ": non-finite coordinate");
  if (std::abs(z) >= 1.0) throw config_error(where + ": point outside the open unit disk");
  return z;
}

double positive(const json& j, const std::string& where) {
  if (!j.is_number()) throw config_error(where + ": expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw config_error(where + ": must be positive and finite");
  return v;
}

void require_separated(const std::vector<cplx>& pts, double delta, const std::string& where) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (std::abs(pts[i] - pts[j]) < delta)
        throw config_error(where + ": points " + std::to_string(i) + " and " + std::to_string(j) +
                           " closer than delta_all");
}

json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool toml_ext = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool looks_json = first != std::string::npos && text[first] == '{';
  if (!toml_ext && looks_json) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw config_error(std::string("config JSON: ") + e.what());
    }
  }
  try {
    const auto table = toml::parse(text, path);
    std::stringstream out;
    out << toml::json_formatter{table};
    return json::parse(out.str());
  } catch (const toml::parse_error& e) {
    throw config_error(std::string("config TOML: ") + std::string(e.description()));
  }
}

}  // namespace

RunConfig::RunConfig() = default;

RunConfig RunConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw config_error("config must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!kKeys.count(it.key())) throw config_error("unknown config key '" + it.key() + "'");
  RunConfig c;
  c.doc_ = doc;
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      throw config_error("seed: expected a non-negative integer");
    c.seed_ = s.get<std::uint64_t>();
  }
  if (doc.contains("tol_scale")) c.tol_scale_ = positive(doc["tol_scale"], "tol_scale");
  if (doc.contains("delta_all")) c.delta_all_ = positive(doc["delta_all"], "delta_all");
  if (doc.contains("suite") && !doc["suite"].is_string()) throw config_error("suite: expected a string");
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    if (!t.is_object()) throw config_error("tolerances: expected a table");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!it.value().is_number()) throw config_error("tolerances." + it.key() + ": expected a number");
      const double v = it.value().get<double>();
      // zero is accepted: the check then fails unless it is exact
      if (!(v >= 0.0) || !std::isfinite(v)) throw config_error("tolerances." + it.key() + ": must be >= 0");
    }
  }
  if (doc.contains("samples")) {
    const auto& s = doc["samples"];
    if (!s.is_number_integer() || s.get<long long>() < 1000) throw config_error("samples: integer >= 1000 required");
  }
  for (const char* k : {"eps2", "t"})
    if (doc.contains(k)) positive(doc[k], k);
  std::vector<cplx> all;
  if (doc.contains("points")) {
    if (!doc["points"].is_array()) throw config_error("points: expected a list");
    std::vector<cplx> pts;
    for (std::size_t i = 0; i < doc["points"].size(); ++i)
      pts.push_back(parse_point(doc["points"][i], "points[" + std::to_string(i) + "]"));
    require_separated(pts, c.delta_all_, "points");
  }
  if (doc.contains("spin")) {
    const cplx a = parse_point(doc["spin"], "spin");
    if (doc.contains("points"))
      for (std::size_t i = 0; i < doc["points"].size(); ++i)
        require_separated({a, parse_point(doc["points"][i], "points")}, c.delta_all_, "spin vs points");
  }
  if (doc.contains("spin_pairs")) {
    if (!doc["spin_pairs"].is_array()) throw config_error("spin_pairs: expected a list");
    for (std::size_t i = 0; i < doc["spin_pairs"].size(); ++i) {
      const auto& p = doc["spin_pairs"][i];
      const std::string w = "spin_pairs[" + std::to_string(i) + "]";
      if (!p.is_array() || p.size() != 2) throw config_error(w + ": expected [[x, y], [x, y]]");
      require_separated({parse_point(p[0], w), parse_point(p[1], w)}, c.delta_all_, w);
    }
  }
  if (doc.contains("mass_profile")) c.mass_profile(MassProfile(1.0, 0.0, 0.1));
  if (doc.contains("test_density")) c.test_density({});
  return c;
}

RunConfig RunConfig::load(const std::string& path) { return from_json(read_document(path)); }

void RunConfig::set_tol_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw config_error("tol-scale must be positive");
  tol_scale_ = s;
}

double RunConfig::tol(const std::string& check, double fallback) const {
  double t = fallback;
  if (doc_.contains("tolerances") && doc_["tolerances"].contains(check)) t = doc_["tolerances"][check].get<double>();
  return t * tol_scale_;
}

std::size_t RunConfig::samples(std::size_t fallback) const {
  return doc_.contains("samples") ? doc_["samples"].get<std::size_t>() : fallback;
}

double RunConfig::number(const std::string& key, double fallback) const {
  return doc_.contains(key) ? doc_[key].get<double>() : fallback;
}

std::vector<cplx> RunConfig::points(std::vector<cplx> fallback) const {
  if (!doc_.contains("points")) return fallback;
  std::vector<cplx> out;
  for (const auto& p : doc_["points"]) out.push_back(parse_point(p, "points"));
  return out;
}

std::vector<std::pair<cplx, cplx>> RunConfig::spin_pairs(std::vector<std::pair<cplx, cplx>> fallback) const {
  if (!doc_.contains("spin_pairs")) return fallback;
  std::vector<std::pair<cplx, cplx>> out;
  for (const auto& p : doc_["spin_pairs"]) out.emplace_back(parse_point(p[0], "spin_pairs"), parse_point(p[1], "spin_pairs"));
  return out;
}

cplx RunConfig::spin(const cplx& fallback) const { return doc_.contains("spin") ? parse_point(doc_["spin"], "spin") : fallback; }

MassProfile RunConfig::mass_profile(const MassProfile& fallback) const {
  if (!doc_.contains("mass_profile")) return fallback;
  const auto& m = doc_["mass_profile"];
  if (!m.is_object()) throw config_error("mass_profile: expected a table");
  for (auto it = m.begin(); it != m.end(); ++it)
    if (it.key() != "amplitude" && it.key() != "center" && it.key() != "radius")
      throw config_error("mass_profile: unknown key '" + it.key() + "'");
  if (!m.contains("amplitude") || !m["amplitude"].is_number()) throw config_error("mass_profile.amplitude: number required");
  const cplx c = parse_point(m.value("center", json::array({0.0, 0.0})), "mass_profile.center");
  const double r = positive(m.value("radius", json(0.3)), "mass_profile.radius");
  if (std::abs(c) + r >= 1.0) throw config_error("mass_profile: support leaves the disk");
  return MassProfile(m["amplitude"].get<double>(), c, r);
}

TestDensity RunConfig::test_density(const TestDensity& fallback) const {
  if (!doc_.contains("test_density")) return fallback;
  const auto& d = doc_["test_density"];
  if (!d.is_object() || !d.contains("bumps") || !d["bumps"].is_array())
    throw config_error("test_density: expected {bumps = [...]}");
  std::vector<DensityBump> bumps;
  for (std::size_t i = 0; i < d["bumps"].size(); ++i) {
    const auto& b = d["bumps"][i];
    const std::string w = "test_density.bumps[" + std::to_string(i) + "]";
    if (!b.is_object()) throw config_error(w + ": expected a table");
    DensityBump bump;
    if (!b.contains("sigma") || !b["sigma"].is_number_integer()) throw config_error(w + ".sigma: integer required");
    bump.sigma = b["sigma"].get<int>();
    if (bump.sigma == 0 || std::abs(bump.sigma) > 2) throw config_error(w + ".sigma: must be +-1 or +-2");
    const auto& amp = b.value("amplitude", json::array({0.0, 0.0}));
    if (amp.is_number())
      bump.amplitude = amp.get<double>();
    else if (amp.is_array() && amp.size() == 2 && amp[0].is_number() && amp[1].is_number())
      bump.amplitude = cplx{amp[0].get<double>(), amp[1].get<double>()};
    else
      throw config_error(w + ".amplitude: number or [re, im] required");
    bump.center = parse_point(b.value("center", json::array({0.0, 0.0})), w + ".center");
    bump.radius = positive(b.value("radius", json(0.1)), w + ".radius");
    if (std::abs(bump.center) + bump.radius >= 1.0) throw config_error(w + ": support leaves the disk");
    bumps.push_back(bump);
  }
  return TestDensity(std::move(bumps));
}

json RunConfig::canonical() const {
  json c = doc_;
  c["seed"] = seed_;
  c["tol_scale"] = tol_scale_;
  c["delta_all"] = delta_all_;
  return c;
}

std::string RunConfig::hash() const {
  const std::string s = canonical().dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const SpectralCache& RunConfig::cache() const {
  if (cache_dir_.empty()) return default_cache();
  if (!cache_) cache_ = std::make_shared<const SpectralCache>(SpectralCache::load_or_warm(cache_dir_));
  return *cache_;
}

std::string RunConfig::cache_version() const { return SpectralCache::kVersion; }

}  // namespace isg
