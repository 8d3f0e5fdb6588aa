#include "germlab/csvio.hpp"

#include <cstdio>

#include "germlab/error.hpp"
#include "germlab/version.hpp"

namespace germlab {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_vec(const Vec& v) {
  std::string s = fmt_g17(v[0]);
  for (int i = 1; i < v.dim; ++i) s += ";" + fmt_g17(v[i]);
  return s;
}

std::string header_line(std::uint64_t config_hash, std::uint64_t seed) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# germlab %s config_hash=%016llx seed=%llu", kVersion,
                static_cast<unsigned long long>(config_hash),
                static_cast<unsigned long long>(seed));
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
                     const std::string& columns)
    : path_(path), out_(path) {
  if (!out_) fail_config("cannot open output file: " + path);
  out_ << header_line(config_hash, seed) << "\n" << columns << "\n";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ",";
    out_ << fields[i];
  }
  out_ << "\n";
}

SummaryWriter::SummaryWriter(const std::string& path, std::uint64_t config_hash,
                             std::uint64_t seed)
    : path_(path), out_(path) {
  if (!out_) fail_config("cannot open output file: " + path);
  out_ << header_line(config_hash, seed) << "\n";
}

void SummaryWriter::line(const std::string& text) { out_ << text << "\n"; }

void SummaryWriter::kv(const std::string& key, const std::string& value) {
  out_ << key << " = " << value << "\n";
}

void SummaryWriter::kv(const std::string& key, double value) { kv(key, fmt_g17(value)); }

void SummaryWriter::check(const std::string& name, bool pass) {
  out_ << "check " << name << " = " << (pass ? "PASS" : "FAIL") << "\n";
  if (!pass) all_passed_ = false;
}

}  // namespace germlab
