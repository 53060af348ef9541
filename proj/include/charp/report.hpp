// Verification reports: one record per check, with an input digest, a
// verdict and canonical witness strings. The machine-readable stream is
// newline-delimited JSON and is byte-identical across runs with the same
// seed and inputs (wall-clock timing appears only in the human summary).
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace charp {

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

struct CheckRecord {
  std::string check;
  std::string inputs;
  bool pass = true;
  std::vector<std::string> witness;
};

struct Report {
  std::vector<CheckRecord> records;
  double total_ms = 0.0;

  bool all_pass() const {
    for (const auto& r : records)
      if (!r.pass) return false;
    return true;
  }

  void add(std::string check, std::string digest, bool pass, std::vector<std::string> witness) {
    records.push_back(CheckRecord{std::move(check), std::move(digest), pass, std::move(witness)});
  }

  void print_human(std::ostream& os, bool quiet) const {
    for (const auto& r : records) {
      os << "check " << r.check << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
      if (!quiet)
        for (const auto& w : r.witness) os << "  " << w << "\n";
    }
    std::size_t passed = 0;
    for (const auto& r : records) passed += r.pass ? 1 : 0;
    os << passed << "/" << records.size() << " checks passed";
    if (total_ms > 0) os << " (" << total_ms << " ms)";
    os << "\n";
  }

  void write_json(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open json output file: " + path);
    for (const auto& r : records) {
      nlohmann::ordered_json j;
      j["check"] = r.check;
      j["inputs"] = r.inputs;
      j["verdict"] = r.pass ? "pass" : "fail";
      j["witness"] = r.witness;
      out << j.dump() << "\n";
    }
  }
};

} // namespace charp
