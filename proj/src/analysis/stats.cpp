#include "intimacy/analysis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "intimacy/common/error.hpp"
#include "intimacy/common/rng.hpp"

namespace intimacy::analysis {

double mean(std::span<const double> values) {
  if (values.empty()) throw Error("insufficient_data", "mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::vector<double> zstandardize(std::span<const double> values) {
  if (values.size() < 2) throw Error("insufficient_data", "need at least 2 values to standardize");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  if (!(sd > 0.0)) throw Error("zero_variance", "all values are equal");
  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - m) / sd;
  return z;
}

std::vector<double> zstandardize_within_domain(const std::vector<std::string>& domains,
                                               std::span<const double> scores) {
  if (domains.size() != scores.size())
    throw Error("length_mismatch", "domains and scores differ in length");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < domains.size(); ++i) members[domains[i]].push_back(i);
  std::vector<double> out(scores.size());
  for (const auto& [domain, idx] : members) {
    std::vector<double> vals;
    for (auto i : idx) vals.push_back(scores[i]);
    std::vector<double> z;
    try {
      z = zstandardize(vals);
    } catch (const Error& e) {
      throw Error(e.code(), "domain '" + domain + "': " + e.what());
    }
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = z[k];
  }
  return out;
}

Interval percentile_interval(std::vector<double> samples, double level) {
  if (samples.empty()) throw Error("insufficient_data", "no samples for an interval");
  std::sort(samples.begin(), samples.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
  };
  const double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

Interval bootstrap_mean_ci(std::span<const double> values, std::size_t resamples,
                           std::uint64_t seed, double level) {
  if (values.empty()) throw Error("insufficient_data", "bootstrap of an empty sample");
  if (resamples == 0) throw Error("invalid_argument", "resamples must be positive");
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[rng() % values.size()];
    m = sum / static_cast<double>(values.size());
  }
  return percentile_interval(std::move(means), level);
}

}  // namespace intimacy::analysis
