#include "intimacy/analysis/markers.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/common/text.hpp"

namespace intimacy::analysis {

Lexicon::Lexicon(std::string name, const std::vector<std::string>& phrases)
    : name_(std::move(name)) {
  std::set<std::vector<std::string>> seen;
  for (const auto& p : phrases) {
    auto toks = text::tokenize(p);
    if (toks.empty()) continue;
    if (seen.insert(toks).second) entries_.push_back(std::move(toks));
  }
  if (entries_.empty()) throw Error("empty_lexicon", "lexicon '" + name_ + "' has no entries");
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
}

Lexicon Lexicon::load(const std::string& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  if (name.empty()) {
    name = path.substr(path.find_last_of('/') + 1);
    name = name.substr(0, name.find('.'));
  }
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    line = text::trim(line);
    if (line.empty() || line[0] == '#') continue;
    phrases.push_back(line);
  }
  return Lexicon(std::move(name), phrases);
}

bool tag_markers(std::string_view question, const Lexicon& lexicon) {
  const auto toks = text::tokenize(question);
  for (const auto& phrase : lexicon.entries()) {
    if (phrase.size() > toks.size()) continue;
    if (std::search(toks.begin(), toks.end(), phrase.begin(), phrase.end()) != toks.end())
      return true;
  }
  return false;
}

namespace {

// Bootstrap draws for one group: resampled means, seeded per group.
std::vector<double> resampled_means(const std::vector<double>& values, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& m : out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[rng() % values.size()];
    m = sum / static_cast<double>(values.size());
  }
  return out;
}

}  // namespace

MarkerContrast marker_contrast(const std::vector<ScoredQuestion>& questions,
                               const Lexicon& lexicon, std::size_t bootstrap_n,
                               std::uint64_t seed, std::size_t threads) {
  if (bootstrap_n == 0) throw Error("invalid_argument", "bootstrap_n must be positive");
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& q : questions) {
    auto& g = groups[q.domain];
    (tag_markers(q.text, lexicon) ? g.first : g.second).push_back(q.z);
  }

  MarkerContrast out;
  out.lexicon = lexicon.name();
  std::vector<std::string> names;
  for (const auto& [domain, g] : groups) {
    if (g.first.empty() || g.second.empty()) {
      out.warnings.push_back("domain '" + domain + "' omitted: " +
                             (g.first.empty() ? "no marked questions" : "no unmarked questions"));
      continue;
    }
    names.push_back(domain);
  }
  out.domains.resize(names.size());
  parallel_for(
      names.size(),
      [&](std::size_t d) {
        const auto& [with, without] = groups.at(names[d]);
        Rng rng(derive_seed(seed, d));
        auto bw = resampled_means(with, bootstrap_n, rng);
        auto bo = resampled_means(without, bootstrap_n, rng);
        std::vector<double> deltas(bootstrap_n);
        for (std::size_t b = 0; b < bootstrap_n; ++b) deltas[b] = bw[b] - bo[b];

        DomainContrast c;
        c.domain = names[d];
        c.n_with = with.size();
        c.n_without = without.size();
        c.mean_with = mean(with);
        c.mean_without = mean(without);
        c.delta = c.mean_with - c.mean_without;
        c.ci_with = percentile_interval(std::move(bw));
        c.ci_without = percentile_interval(std::move(bo));
        c.ci_delta = percentile_interval(std::move(deltas));
        out.domains[d] = std::move(c);
      },
      threads);
  return out;
}

std::string format_contrast(const MarkerContrast& contrast) {
  std::string out =
      "domain,n_with,n_without,mean_with,with_low,with_high,mean_without,without_low,"
      "without_high,delta,delta_low,delta_high\n";
  auto f = [](double v) { return csv::format_double(v); };
  for (const auto& c : contrast.domains) {
    out += csv::format_row({c.domain, std::to_string(c.n_with), std::to_string(c.n_without),
                            f(c.mean_with), f(c.ci_with.low), f(c.ci_with.high),
                            f(c.mean_without), f(c.ci_without.low), f(c.ci_without.high),
                            f(c.delta), f(c.ci_delta.low), f(c.ci_delta.high)});
  }
  return out;
}

}  // namespace intimacy::analysis
