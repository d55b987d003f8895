#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace npcvar {

// An ordered series of losses (negative log-returns). Timestamps are optional
// labels; when present they must match the length and be strictly increasing.
class ReturnSeries {
 public:
  ReturnSeries() = default;
  explicit ReturnSeries(std::vector<double> values,
                        std::vector<std::string> timestamps = {});

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::string>& timestamps() const { return timestamps_; }
  bool has_timestamps() const { return !timestamps_.empty(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  // Contiguous sub-series [first, first + count); timestamps carried along.
  ReturnSeries window(std::size_t first, std::size_t count) const;

 private:
  std::vector<double> values_;
  std::vector<std::string> timestamps_;
};

double sample_mean(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);

}  // namespace npcvar
