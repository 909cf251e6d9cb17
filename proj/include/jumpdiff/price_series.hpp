#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

namespace jumpdiff {

using Date = std::chrono::year_month_day;

// Daily closing prices in ascending date order.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> closes;
  std::string label;

  std::size_t size() const { return closes.size(); }
  // length >= 2, closes > 0 and finite, dates strictly increasing.
  void validate() const;
};

// Builds an undated series (consecutive days from 2000-01-03) for synthetic
// inputs where only the closes matter.
PriceSeries make_series(std::vector<double> closes, std::string label = "synthetic");

}  // namespace jumpdiff
