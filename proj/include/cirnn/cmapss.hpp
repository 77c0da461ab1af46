// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cirnn {

inline constexpr std::size_t kOpSettings = 3;
inline constexpr std::size_t kSensors = 21;
inline constexpr std::size_t kCmapssColumns = 2 + kOpSettings + kSensors;

/// One row of a C-MAPSS file: unit, cycle, three operational settings
/// (altitude, Mach number, throttle resolver angle) and 21 sensors.
struct RawRecord {
  int unit_id = 0;
  int cycle = 0;
  std::array<double, kOpSettings> op_settings{};
  std::array<double, kSensors> sensors{};

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

/// Parses whitespace-delimited rows of exactly 26 numeric columns. Blank lines
/// are skipped. The result is sorted by (unit, cycle).
///
/// Throws ParseError (with the line number) for a malformed row and
/// DataError when a unit repeats or skips a cycle.
std::vector<RawRecord> parse_cmapss(std::istream& in, const std::string& source = "<input>");
std::vector<RawRecord> read_cmapss(const std::filesystem::path& path);

/// One truth RUL per line, in test-unit order.
std::vector<double> parse_rul_truth(std::istream& in, const std::string& source = "<input>");
std::vector<double> read_rul_truth(const std::filesystem::path& path);

/// Writes records in the C-MAPSS layout (shortest round-trip decimals).
void write_cmapss(std::ostream& out, std::span<const RawRecord> records);
void write_rul_truth(std::ostream& out, std::span<const double> truth);

/// Distinct unit ids in ascending order.
std::vector<int> unit_ids(std::span<const RawRecord> records);

}  // namespace cirnn
