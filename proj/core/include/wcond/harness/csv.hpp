#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wcond::harness {

/// Shortest round-trip decimal form ('.' separator); "nan", "inf", "-inf" for
/// non-finite values.
std::string format_number(double v);
std::string format_number(std::uint64_t v);
std::string format_number(std::int64_t v);
inline std::string format_number(int v) { return format_number(std::int64_t{v}); }
inline std::string format_bool(bool b) { return b ? "1" : "0"; }
std::string format_hex(std::uint64_t v);

/// Quotes a field when it holds a comma, a double quote, CR or LF; embedded
/// quotes are doubled.
std::string csv_escape(std::string_view field);

/// RFC 4180 table: header row, CRLF record terminators, fixed column count.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Throws InvalidArgument on a column-count mismatch.
  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Strict RFC 4180 reader (CRLF or LF terminators). Throws InvalidArgument on
/// an unterminated quote or a stray quote inside an unquoted field.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace wcond::harness
