#pragma once

#include <string>
#include <vector>

#include "npcvar/forecast_record.hpp"
#include "npcvar/return_series.hpp"

namespace npcvar {

struct PriceSeries {
  std::vector<std::string> dates;
  std::vector<double> prices;
};

// RFC-4180-style reading: header row required, quoted fields supported.
// Rows are sorted by date; duplicate dates, missing columns, non-positive
// prices and unparseable rows raise errors naming the offending row.
PriceSeries load_prices_csv(const std::string& path,
                            const std::string& date_column,
                            const std::string& price_column);

// X_t = -ln(P_{t+1}/P_t); timestamps carried from the second price on.
ReturnSeries to_negative_log_returns(const PriceSeries& prices);

// Returns file written by the simulate command (or any value column).
ReturnSeries load_returns_csv(const std::string& path,
                              const std::string& value_column = "value",
                              const std::string& date_column = "");

void write_returns_csv(const std::string& path, const ReturnSeries& series);

// Forecast trace round-trips exactly: doubles are written in shortest
// round-trip form.
void write_forecasts_csv(const std::string& path,
                         const std::vector<ForecastRecord>& records);
std::vector<ForecastRecord> read_forecasts_csv(const std::string& path);

// Writes through a temp file in the same directory, then renames.
void atomic_write_text(const std::string& path, const std::string& content);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace npcvar
