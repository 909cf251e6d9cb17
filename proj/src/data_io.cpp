#include "jumpdiff/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "jumpdiff/errors.hpp"

namespace jumpdiff {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(std::string_view line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(lineno), lineno);
  out.emplace_back(trim(cur));
  return out;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

std::optional<Date> make_date(int y, unsigned m, unsigned d) {
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::size_t column_index(const RawTable& t, std::string_view name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end())
    throw DataError("column '" + std::string(name) + "' not found in " + t.source);
  return static_cast<std::size_t>(it - t.header.begin());
}

}  // namespace

void PriceSeries::validate() const {
  if (closes.size() != dates.size())
    throw DataError("price series: dates and closes differ in length");
  if (closes.size() < 2) throw DataError("price series: need at least 2 observations");
  for (std::size_t i = 0; i < closes.size(); ++i) {
    if (!std::isfinite(closes[i]) || closes[i] <= 0.0)
      throw DataError("price series: close #" + std::to_string(i) + " is not a positive number");
    if (i > 0 && !(dates[i - 1] < dates[i]))
      throw DataError("price series: dates not strictly increasing at #" + std::to_string(i));
  }
}

PriceSeries make_series(std::vector<double> closes, std::string label) {
  PriceSeries s;
  s.label = std::move(label);
  s.closes = std::move(closes);
  const std::chrono::sys_days start = Date{std::chrono::year{2000}, std::chrono::January,
                                           std::chrono::day{3}};
  s.dates.reserve(s.closes.size());
  for (std::size_t i = 0; i < s.closes.size(); ++i)
    s.dates.emplace_back(start + std::chrono::days{static_cast<int>(i)});
  return s;
}

RawTable parse_csv(std::istream& in, std::string source) {
  RawTable t;
  t.source = std::move(source);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    auto cells = split_line(line, lineno);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw DataError(t.source + ": line " + std::to_string(lineno) + " has " +
                          std::to_string(cells.size()) + " fields, expected " +
                          std::to_string(t.header.size()),
                      lineno);
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw DataError(t.source + ": empty file");
  return t;
}

RawTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

std::optional<Date> parse_date(std::string_view s) {
  s = trim(s);
  int y = 0;
  unsigned m = 0, d = 0;
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    if (parse_int(s.substr(0, 4), y) && parse_int(s.substr(5, 2), m) &&
        parse_int(s.substr(8, 2), d))
      return make_date(y, m, d);
    return std::nullopt;
  }
  const auto a = s.find('/');
  const auto b = a == std::string_view::npos ? a : s.find('/', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  if (parse_int(s.substr(0, a), m) && parse_int(s.substr(a + 1, b - a - 1), d) &&
      s.size() - b - 1 == 4 && parse_int(s.substr(b + 1), y))
    return make_date(y, m, d);
  return std::nullopt;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

PriceSeries price_series_from_table(const RawTable& t, std::string_view date_column,
                                    std::string_view price_column) {
  const std::size_t dc = column_index(t, date_column);
  const std::size_t pc = column_index(t, price_column);
  struct Row {
    Date date;
    double close;
    std::size_t line;
  };
  std::vector<Row> rows;
  rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::size_t line = t.line_numbers[i];
    const std::string_view dtext = t.rows[i][dc];
    const auto date = parse_date(dtext);
    if (!date)
      throw DataError(t.source + ": line " + std::to_string(line) + ": bad date '" +
                          std::string(dtext) + "'",
                      line);
    const std::string_view ptext = t.rows[i][pc];
    double v = 0.0;
    const auto* end = ptext.data() + ptext.size();
    auto [p, ec] = std::from_chars(ptext.data(), end, v);
    if (ec != std::errc{} || p != end || !std::isfinite(v))
      throw DataError(t.source + ": line " + std::to_string(line) + ": bad " +
                          std::string(price_column) + " value '" + std::string(ptext) + "'",
                      line);
    if (v <= 0.0)
      throw DataError(t.source + ": line " + std::to_string(line) + ": non-positive " +
                          std::string(price_column) + " " + std::string(ptext),
                      line);
    rows.push_back({*date, v, line});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      const auto [l1, l2] = std::minmax(rows[i - 1].line, rows[i].line);
      throw DataError(t.source + ": duplicate date " + format_date(rows[i].date) + " on lines " +
                          std::to_string(l1) + " and " + std::to_string(l2),
                      l2);
    }
  }
  PriceSeries s;
  s.label = std::filesystem::path(t.source).stem().string();
  for (const auto& r : rows) {
    s.dates.push_back(r.date);
    s.closes.push_back(r.close);
  }
  s.validate();
  return s;
}

PriceSeries load_price_csv(const std::filesystem::path& path, std::string_view date_column,
                           std::string_view price_column) {
  return price_series_from_table(read_csv(path), date_column, price_column);
}

void write_price_csv(std::ostream& os, const PriceSeries& series) {
  os << "Date,Close\n";
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, series.closes[i]);
    os << format_date(series.dates[i]) << ',' << std::string_view(buf, p - buf) << '\n';
  }
}

PeriodSlice slice_period(const PriceSeries& series, const Date& start, const Date& end) {
  require(!(end < start), "slice_period: start must not be after end");
  PeriodSlice out{start, end, {}};
  out.series.label = series.label;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (start <= series.dates[i] && series.dates[i] <= end) {
      out.series.dates.push_back(series.dates[i]);
      out.series.closes.push_back(series.closes[i]);
    }
  }
  if (out.series.closes.empty())
    throw DataError("slice_period: no rows between " + format_date(start) + " and " +
                    format_date(end));
  return out;
}

}  // namespace jumpdiff
