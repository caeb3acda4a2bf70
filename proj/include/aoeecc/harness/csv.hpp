#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "aoeecc/harness/config.hpp"
#include "aoeecc/harness/run.hpp"

namespace aoeecc {

inline constexpr const char* kCsvHeader = "t,policy,regime,seed,regret,violation,lambda,ee,expected_power";

struct CsvRow {
  long long t = 0;
  std::string policy;
  std::string regime;
  std::string seed;  // a number, or "mean" / "std" in aggregate tables
  double regret = 0.0;
  double violation = 0.0;
  double lambda = 0.0;
  double ee = 0.0;
  double expected_power = 0.0;

  bool operator==(const CsvRow&) const = default;
};

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::vector<CsvRow> to_rows(const RunResult& r) {
  std::vector<CsvRow> rows;
  rows.reserve(r.records.size());
  for (const auto& rec : r.records) {
    rows.push_back({rec.t, r.policy, r.regime, std::to_string(r.seed), rec.regret, rec.violation, rec.lambda, rec.ee,
                    rec.expected_power});
  }
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.t << ',' << r.policy << ',' << r.regime << ',' << r.seed << ',' << format_double(r.regret) << ','
       << format_double(r.violation) << ',' << format_double(r.lambda) << ',' << format_double(r.ee) << ','
       << format_double(r.expected_power) << '\n';
  }
}

inline void write_csv(const std::string& path, const std::vector<CsvRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_csv(os, rows);
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

namespace detail {

inline double csv_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw IoError("bad " + what + " value '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<CsvRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw IoError("missing or unexpected CSV header");
  std::vector<CsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw IoError("expected 9 columns, got " + std::to_string(cells.size()));
    CsvRow r;
    r.t = static_cast<long long>(detail::csv_double(cells[0], "t"));
    r.policy = cells[1];
    r.regime = cells[2];
    r.seed = cells[3];
    r.regret = detail::csv_double(cells[4], "regret");
    r.violation = detail::csv_double(cells[5], "violation");
    r.lambda = detail::csv_double(cells[6], "lambda");
    r.ee = detail::csv_double(cells[7], "ee");
    r.expected_power = detail::csv_double(cells[8], "expected_power");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<CsvRow> read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(is);
}

}  // namespace aoeecc
