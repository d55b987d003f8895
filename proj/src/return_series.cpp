#include "npcvar/return_series.hpp"

#include <cmath>
#include <stdexcept>

namespace npcvar {

ReturnSeries::ReturnSeries(std::vector<double> values,
                           std::vector<std::string> timestamps)
    : values_(std::move(values)), timestamps_(std::move(timestamps)) {
  if (values_.empty()) {
    throw std::invalid_argument("ReturnSeries: empty series");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("ReturnSeries: non-finite value");
    }
  }
  if (!timestamps_.empty()) {
    if (timestamps_.size() != values_.size()) {
      throw std::invalid_argument("ReturnSeries: timestamp count mismatch");
    }
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
      if (!(timestamps_[i - 1] < timestamps_[i])) {
        throw std::invalid_argument(
            "ReturnSeries: timestamps not strictly increasing");
      }
    }
  }
}

ReturnSeries ReturnSeries::window(std::size_t first, std::size_t count) const {
  if (first + count > values_.size()) {
    throw std::out_of_range("ReturnSeries::window out of range");
  }
  std::vector<double> vals(values_.begin() + first,
                           values_.begin() + first + count);
  std::vector<std::string> ts;
  if (!timestamps_.empty()) {
    ts.assign(timestamps_.begin() + first, timestamps_.begin() + first + count);
  }
  return ReturnSeries(std::move(vals), std::move(ts));
}

double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("sample_mean: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / (double)xs.size();
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_sd: need >= 2 values");
  const double m = sample_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (double)(xs.size() - 1));
}

}  // namespace npcvar
