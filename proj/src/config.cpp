#include "germlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "germlab/error.hpp"

namespace germlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::vector<std::string>& known_kinds() {
  static const std::vector<std::string> kinds = {
      "coherence", "homogeneity", "enhanced", "reconstruct",
      "residual",  "glue",        "atlas-compare", "demo"};
  return kinds;
}

const std::vector<std::string>& known_sections() {
  static const std::vector<std::string> sections = {
      "experiment", "germ", "domain", "atlas", "scan",   "mollifier",
      "quadrature", "testfn", "glue", "compare", "residual", "pou", "demo", "output"};
  return sections;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_config("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string canonical;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    std::size_t comment = stripped.find('#');
    if (comment != std::string::npos) stripped = trim(stripped.substr(0, comment));
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail_config("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    std::size_t dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
      fail_config("config line " + std::to_string(lineno) + ": keys are section.name");
    std::string section = key.substr(0, dot);
    if (std::find(known_sections().begin(), known_sections().end(), section) ==
        known_sections().end())
      fail_config("config line " + std::to_string(lineno) + ": unknown section '" + section + "'");
    if (cfg.values_.count(key)) fail_config("duplicate config key: " + key);
    cfg.values_[key] = value;
  }
  for (const auto& [k, v] : cfg.values_) canonical += k + "=" + v + "\n";
  cfg.hash_ = fnv1a(canonical);
  cfg.kind_ = cfg.get_or("experiment.kind", "");
  return cfg;
}

std::uint64_t ExperimentConfig::seed() const {
  return static_cast<std::uint64_t>(int_or("scan.seed", 1));
}

std::string ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail_config("missing required config key: " + key);
  return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& dflt) const {
  auto it = values_.find(key);
  return it == values_.end() ? dflt : it->second;
}

double ExperimentConfig::num(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) fail_config("config key " + key + ": not a number: " + v);
    return x;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail_config("config key " + key + ": not a number: " + v);
  }
}

double ExperimentConfig::num_or(const std::string& key, double dflt) const {
  return has(key) ? num(key) : dflt;
}

int ExperimentConfig::int_or(const std::string& key, int dflt) const {
  return has(key) ? static_cast<int>(num(key)) : dflt;
}

std::vector<double> ExperimentConfig::nums(const std::string& key) const {
  std::string v = get(key);
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t next = v.find(';', pos);
    std::string part = trim(next == std::string::npos ? v.substr(pos) : v.substr(pos, next - pos));
    if (!part.empty()) {
      try {
        out.push_back(std::stod(part));
      } catch (...) {
        fail_config("config key " + key + ": not a number list: " + v);
      }
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (out.empty()) fail_config("config key " + key + ": empty number list");
  return out;
}

void ExperimentConfig::validate() const {
  if (kind_.empty()) fail_config("missing required config key: experiment.kind");
  if (std::find(known_kinds().begin(), known_kinds().end(), kind_) == known_kinds().end())
    fail_config("unknown experiment kind: " + kind_);
  auto require = [&](const std::string& key) { (void)get(key); };
  if (kind_ == "demo") {
    require("demo.name");
    return;
  }
  if (kind_ == "glue" || kind_ == "atlas-compare") {
    require("atlas.kind");
    require("germ.kind");
    if (kind_ == "atlas-compare") require("compare.with");
    return;
  }
  require("germ.kind");
  require("domain.kind");
  const std::string g = get("germ.kind");
  if (g != "constant" && g != "taylor" && g != "young")
    fail_config("unknown germ kind: " + g);
  if (g == "constant") require("germ.density");
  if (g == "taylor") {
    require("germ.g");
    require("germ.k");
  }
  if (g == "young") {
    require("germ.beta_g");
    require("germ.a");
  }
  const std::string d = get("domain.kind");
  if (d == "box") {
    require("domain.lo");
    require("domain.hi");
  } else if (d != "circle" && d != "torus" && d != "line") {
    fail_config("unknown domain kind: " + d);
  }
}

}  // namespace germlab
