#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "germlab/geometry.hpp"

namespace germlab {

/// 17 significant digits, '.' decimal separator, locale independent.
std::string fmt_g17(double v);
/// Vector field: "x" in d = 1, "x;y" in d = 2.
std::string fmt_vec(const Vec& v);

/// CSV writer; every file starts with a header comment carrying the tool
/// version, the config hash and the seed.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
            const std::string& columns);
  void row(const std::vector<std::string>& fields);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

/// Plain-text summary report with the same header line.
class SummaryWriter {
 public:
  SummaryWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed);
  void line(const std::string& text);
  void kv(const std::string& key, const std::string& value);
  void kv(const std::string& key, double value);
  void check(const std::string& name, bool pass);
  bool all_passed() const { return all_passed_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  bool all_passed_ = true;
};

std::string header_line(std::uint64_t config_hash, std::uint64_t seed);

}  // namespace germlab
