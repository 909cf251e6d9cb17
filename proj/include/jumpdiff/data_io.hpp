#pragma once

// Daily market-data ingestion: delimited text in, validated PriceSeries out.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jumpdiff/price_series.hpp"

namespace jumpdiff {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // same arity as header
  std::vector<std::size_t> line_numbers;       // 1-based source line of each row
  std::string source;
};

// Comma-separated text with a header row. Blank lines are skipped; fields may
// be double-quoted. Ragged rows raise DataError with the offending line.
RawTable parse_csv(std::istream& in, std::string source = "<stream>");
RawTable read_csv(const std::filesystem::path& path);

// ISO `YYYY-MM-DD`, with `MM/DD/YYYY` accepted as a fallback.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& d);

PriceSeries price_series_from_table(const RawTable& table, std::string_view date_column = "Date",
                                    std::string_view price_column = "Close");

PriceSeries load_price_csv(const std::filesystem::path& path, std::string_view date_column = "Date",
                           std::string_view price_column = "Close");

// Writes `Date,Close` with ISO dates and shortest round-trip decimals.
void write_price_csv(std::ostream& os, const PriceSeries& series);

struct PeriodSlice {
  Date start;
  Date end;
  PriceSeries series;
};

// Rows with start <= date <= end. Throws DataError on an empty window.
PeriodSlice slice_period(const PriceSeries& series, const Date& start, const Date& end);

}  // namespace jumpdiff
