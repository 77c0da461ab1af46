// SPDX-License-Identifier: Apache-2.0
#include "cirnn/cmapss.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "cirnn/error.hpp"
#include "cirnn/metrics.hpp"

namespace cirnn {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_number(std::string_view text, double& out) {
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

// Unit and cycle columns are written as reals in some copies of the data
// ("1.0"), so accept any integral value.
bool parse_integral(std::string_view text, int& out) {
  double v = 0.0;
  if (!parse_number(text, v) || v != std::floor(v) || v < 1.0 || v > 1e9) return false;
  out = static_cast<int>(v);
  return true;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<RawRecord> parse_cmapss(std::istream& in, const std::string& source) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != kCmapssColumns) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(kCmapssColumns) + " columns, found " +
                           std::to_string(fields.size()));
    }
    RawRecord r;
    if (!parse_integral(fields[0], r.unit_id)) {
      throw ParseError(source, line_no, "bad unit id '" + std::string(fields[0]) + "'");
    }
    if (!parse_integral(fields[1], r.cycle)) {
      throw ParseError(source, line_no, "bad cycle '" + std::string(fields[1]) + "'");
    }
    for (std::size_t j = 0; j < kOpSettings + kSensors; ++j) {
      double v = 0.0;
      if (!parse_number(fields[2 + j], v)) {
        throw ParseError(source, line_no,
                         "column " + std::to_string(3 + j) + ": not a finite number '" +
                             std::string(fields[2 + j]) + "'");
      }
      if (j < kOpSettings) {
        r.op_settings[j] = v;
      } else {
        r.sensors[j - kOpSettings] = v;
      }
    }
    records.push_back(r);
  }

  std::stable_sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
    return a.unit_id != b.unit_id ? a.unit_id < b.unit_id : a.cycle < b.cycle;
  });
  for (std::size_t i = 1; i < records.size(); ++i) {
    const RawRecord& prev = records[i - 1];
    const RawRecord& cur = records[i];
    if (prev.unit_id != cur.unit_id) continue;
    if (cur.cycle == prev.cycle) {
      throw DataError(source + ": unit " + std::to_string(cur.unit_id) + " repeats cycle " +
                      std::to_string(cur.cycle));
    }
    if (cur.cycle != prev.cycle + 1) {
      throw DataError(source + ": unit " + std::to_string(cur.unit_id) + " jumps from cycle " +
                      std::to_string(prev.cycle) + " to " + std::to_string(cur.cycle));
    }
  }
  return records;
}

std::vector<RawRecord> read_cmapss(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_cmapss(in, path.string());
}

std::vector<double> parse_rul_truth(std::istream& in, const std::string& source) {
  std::vector<double> truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    double v = 0.0;
    if (fields.size() != 1 || !parse_number(fields[0], v) || v < 0.0) {
      throw ParseError(source, line_no, "expected one non-negative RUL value");
    }
    truth.push_back(v);
  }
  return truth;
}

std::vector<double> read_rul_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_rul_truth(in, path.string());
}

void write_cmapss(std::ostream& out, std::span<const RawRecord> records) {
  for (const RawRecord& r : records) {
    out << r.unit_id << ' ' << r.cycle;
    for (double v : r.op_settings) out << ' ' << format_double(v);
    for (double v : r.sensors) out << ' ' << format_double(v);
    out << '\n';
  }
}

void write_rul_truth(std::ostream& out, std::span<const double> truth) {
  for (double v : truth) out << format_double(v) << '\n';
}

std::vector<int> unit_ids(std::span<const RawRecord> records) {
  std::vector<int> ids;
  for (const RawRecord& r : records) ids.push_back(r.unit_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace cirnn
