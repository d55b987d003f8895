#include "npcvar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace npcvar {

namespace {

std::runtime_error row_error(const std::string& path, std::size_t row,
                             const std::string& what) {
  return std::runtime_error(path + ": row " + std::to_string(row) + ": " + what);
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name, const std::string& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw std::runtime_error(path + ": missing column '" + name + "'");
  }
  return (std::size_t)(it - header.begin());
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t row) {
  if (s == "nan" || s == "-nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw row_error(path, row, "cannot parse number '" + s + "'");
  }
  return v;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty file, header required");
  return rows;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
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
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for write");
    out << content;
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  fs::rename(tmp, target);
}

PriceSeries load_prices_csv(const std::string& path,
                            const std::string& date_column,
                            const std::string& price_column) {
  const auto rows = read_csv(path);
  const std::size_t di = find_column(rows[0], date_column, path);
  const std::size_t pi = find_column(rows[0], price_column, path);

  std::vector<std::pair<std::string, double>> entries;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max(di, pi)) {
      throw row_error(path, r + 1, "too few fields");
    }
    const double price = parse_double(row[pi], path, r + 1);
    if (!(price > 0.0)) {
      throw row_error(path, r + 1, "non-positive price");
    }
    entries.emplace_back(row[di], price);
  }
  if (entries.size() < 2) {
    throw std::runtime_error(path + ": need at least two price rows");
  }

  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].first == entries[i - 1].first) {
      throw std::runtime_error(path + ": duplicate date '" + entries[i].first + "'");
    }
  }

  PriceSeries out;
  for (auto& [d, p] : entries) {
    out.dates.push_back(std::move(d));
    out.prices.push_back(p);
  }
  return out;
}

ReturnSeries to_negative_log_returns(const PriceSeries& prices) {
  if (prices.prices.size() < 2) {
    throw std::invalid_argument("to_negative_log_returns: need >= 2 prices");
  }
  std::vector<double> xs;
  std::vector<std::string> ts;
  xs.reserve(prices.prices.size() - 1);
  for (std::size_t i = 1; i < prices.prices.size(); ++i) {
    xs.push_back(-std::log(prices.prices[i] / prices.prices[i - 1]));
    ts.push_back(prices.dates[i]);
  }
  return ReturnSeries(std::move(xs), std::move(ts));
}

ReturnSeries load_returns_csv(const std::string& path,
                              const std::string& value_column,
                              const std::string& date_column) {
  const auto rows = read_csv(path);
  const std::size_t vi = find_column(rows[0], value_column, path);
  const bool with_dates = !date_column.empty();
  const std::size_t di = with_dates ? find_column(rows[0], date_column, path) : 0;

  std::vector<double> xs;
  std::vector<std::string> ts;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= vi || (with_dates && row.size() <= di)) {
      throw row_error(path, r + 1, "too few fields");
    }
    xs.push_back(parse_double(row[vi], path, r + 1));
    if (with_dates) ts.push_back(row[di]);
  }
  if (xs.empty()) throw std::runtime_error(path + ": no data rows");
  return ReturnSeries(std::move(xs), std::move(ts));
}

void write_returns_csv(const std::string& path, const ReturnSeries& series) {
  std::ostringstream out;
  const bool dated = series.has_timestamps();
  out << (dated ? "date,value\n" : "t,value\n");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (dated) {
      out << csv_escape(series.timestamps()[i]);
    } else {
      out << (i + 1);
    }
    out << ',' << format_double(series.values()[i]) << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_forecasts_csv(const std::string& path,
                         const std::vector<ForecastRecord>& records) {
  std::ostringstream out;
  out << "index,date,level,forecast,realized,hit,error_flag\n";
  for (const auto& r : records) {
    out << r.index << ',' << csv_escape(r.date) << ',' << format_double(r.level)
        << ',' << format_double(r.forecast) << ',' << format_double(r.realized)
        << ',' << (r.hit ? 1 : 0) << ',' << (r.error ? 1 : 0) << '\n';
  }
  atomic_write_text(path, out.str());
}

std::vector<ForecastRecord> read_forecasts_csv(const std::string& path) {
  const auto rows = read_csv(path);
  const std::size_t ii = find_column(rows[0], "index", path);
  const std::size_t di = find_column(rows[0], "date", path);
  const std::size_t li = find_column(rows[0], "level", path);
  const std::size_t fi = find_column(rows[0], "forecast", path);
  const std::size_t ri = find_column(rows[0], "realized", path);
  const std::size_t hi = find_column(rows[0], "hit", path);
  const std::size_t ei = find_column(rows[0], "error_flag", path);

  std::vector<ForecastRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max({ii, di, li, fi, ri, hi, ei})) {
      throw row_error(path, r + 1, "too few fields");
    }
    ForecastRecord rec;
    rec.index = (long)parse_double(row[ii], path, r + 1);
    rec.date = row[di];
    rec.level = parse_double(row[li], path, r + 1);
    rec.forecast = parse_double(row[fi], path, r + 1);
    rec.realized = parse_double(row[ri], path, r + 1);
    rec.hit = parse_double(row[hi], path, r + 1) != 0.0;
    rec.error = parse_double(row[ei], path, r + 1) != 0.0;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace npcvar
