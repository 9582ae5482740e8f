#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "intimacy/analysis/stats.hpp"

namespace intimacy::analysis {

class Lexicon {
 public:
  Lexicon(std::string name, const std::vector<std::string>& phrases);

  // One phrase per line; blank lines and lines starting with '#' are skipped.
  static Lexicon load(const std::string& path, std::string name = "");

  const std::string& name() const { return name_; }
  std::size_t size() const { return entries_.size(); }
  // Tokenized phrases, longest first.
  const std::vector<std::vector<std::string>>& entries() const { return entries_; }

 private:
  std::string name_;
  std::vector<std::vector<std::string>> entries_;
};

// True iff some phrase occurs as a contiguous token run of the text.
bool tag_markers(std::string_view question, const Lexicon& lexicon);

struct ScoredQuestion {
  std::string domain;
  std::string text;
  double z = 0.0;
};

struct DomainContrast {
  std::string domain;
  std::size_t n_with = 0;
  std::size_t n_without = 0;
  double mean_with = 0.0;
  double mean_without = 0.0;
  Interval ci_with;
  Interval ci_without;
  double delta = 0.0;  // mean_with - mean_without
  Interval ci_delta;
};

struct MarkerContrast {
  std::string lexicon;
  std::vector<DomainContrast> domains;  // sorted by domain name
  std::vector<std::string> warnings;    // domains omitted for an empty group
};

// Per-domain marked vs unmarked means with percentile-bootstrap CIs. Each
// group is resampled independently; domain d uses derive_seed(seed, d) in
// sorted-domain order.
MarkerContrast marker_contrast(const std::vector<ScoredQuestion>& questions,
                               const Lexicon& lexicon, std::size_t bootstrap_n = 1000,
                               std::uint64_t seed = 0, std::size_t threads = 0);

// domain,n_with,n_without,mean_with,with_low,with_high,mean_without,
// without_low,without_high,delta,delta_low,delta_high
std::string format_contrast(const MarkerContrast& contrast);

}  // namespace intimacy::analysis
