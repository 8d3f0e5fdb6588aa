#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace germlab {

/// Plain-text experiment configuration: one `section.key = value` per line,
/// `#` comments. Sections: experiment, germ, domain, atlas, scan, mollifier,
/// quadrature, testfn, glue, compare, residual, pou, demo, output.
class ExperimentConfig {
 public:
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_text(const std::string& text);

  const std::string& kind() const { return kind_; }
  std::uint64_t hash() const { return hash_; }
  std::uint64_t seed() const;

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;                       // config error if absent
  std::string get_or(const std::string& key, const std::string& dflt) const;
  double num(const std::string& key) const;
  double num_or(const std::string& key, double dflt) const;
  int int_or(const std::string& key, int dflt) const;
  std::vector<double> nums(const std::string& key) const;  // ';'-separated components

  const std::map<std::string, std::string>& values() const { return values_; }

  /// Checks the required keys for the chosen experiment kind.
  void validate() const;

 private:
  std::string kind_;
  std::map<std::string, std::string> values_;
  std::uint64_t hash_ = 0;
};

}  // namespace germlab
