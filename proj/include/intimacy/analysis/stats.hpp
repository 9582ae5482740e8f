#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace intimacy::analysis {

// z = (x - mean) / sample SD. Throws zero_variance when all values are equal.
std::vector<double> zstandardize(std::span<const double> values);

// Standardizes each domain's scores separately; output is parallel to input.
std::vector<double> zstandardize_within_domain(const std::vector<std::string>& domains,
                                               std::span<const double> scores);

double mean(std::span<const double> values);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Percentile interval of a sample (linear interpolation between order stats).
Interval percentile_interval(std::vector<double> samples, double level = 0.95);

// Percentile-bootstrap CI of the mean.
Interval bootstrap_mean_ci(std::span<const double> values, std::size_t resamples,
                           std::uint64_t seed, double level = 0.95);

}  // namespace intimacy::analysis
