#include "intimacy/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/rng.hpp"

namespace intimacy::reliability {

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("length_mismatch", std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.size() < 2) throw Error("insufficient_data", "pearson_r needs at least 2 points");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double split_half_correlation(const std::vector<bws::JudgedTuple>& half_a,
                              const std::vector<bws::JudgedTuple>& half_b,
                              const bws::IlsrOptions& options) {
  bws::IntimacyScores a, b;
  try {
    a = bws::score_judgments(half_a, options);
    b = bws::score_judgments(half_b, options);
  } catch (const Error& e) {
    throw Error("insufficient_data", std::string("split half could not be scored: ") + e.what());
  }
  std::unordered_map<std::string, double> b_scores;
  for (std::size_t i = 0; i < b.items.size(); ++i) b_scores[b.items[i]] = b.score[i];
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    auto it = b_scores.find(a.items[i]);
    if (it == b_scores.end()) continue;
    xs.push_back(a.score[i]);
    ys.push_back(it->second);
  }
  if (xs.size() < 2) throw Error("insufficient_data", "fewer than 2 items shared by both halves");
  return pearson_r(xs, ys);
}

SplitHalfResult split_half_ranking(const std::vector<bws::JudgedTuple>& judged,
                                   std::size_t resamples, std::uint64_t seed,
                                   const bws::IlsrOptions& options, std::size_t threads) {
  if (judged.size() < 2) throw Error("insufficient_data", "need at least 2 judgments");
  if (resamples == 0) throw Error("invalid_argument", "resamples must be positive");
  SplitHalfResult result;
  result.per_resample.assign(resamples, 0.0);
  parallel_for(
      resamples,
      [&](std::size_t k) {
        Rng rng(derive_seed(seed, k));
        std::vector<std::size_t> order(judged.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t half = judged.size() / 2;
        std::vector<bws::JudgedTuple> a, b;
        a.reserve(half);
        b.reserve(half);
        for (std::size_t i = 0; i < half; ++i) a.push_back(judged[order[i]]);
        for (std::size_t i = half; i < 2 * half; ++i) b.push_back(judged[order[i]]);
        result.per_resample[k] = split_half_correlation(a, b, options);
      },
      threads);
  result.mean = std::accumulate(result.per_resample.begin(), result.per_resample.end(), 0.0) /
                static_cast<double>(resamples);
  return result;
}

double krippendorff_alpha(const LabelTable& labels) {
  std::map<std::string, std::size_t> value_index;
  for (const auto& unit : labels)
    for (const auto& v : unit)
      if (v) value_index.emplace(*v, 0);
  std::size_t next = 0;
  for (auto& [_, idx] : value_index) idx = next++;
  const std::size_t k = value_index.size();

  // Coincidence matrix over pairable values.
  std::vector<double> coincidence(k * k, 0.0);
  bool pairable = false;
  for (const auto& unit : labels) {
    std::vector<std::size_t> counts(k, 0);
    std::size_t m = 0;
    for (const auto& v : unit) {
      if (!v) continue;
      ++counts[value_index.at(*v)];
      ++m;
    }
    if (m < 2) continue;
    pairable = true;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t c = 0; c < k; ++c) {
      if (!counts[c]) continue;
      for (std::size_t d = 0; d < k; ++d) {
        double pairs = c == d ? static_cast<double>(counts[c]) * (counts[c] - 1)
                              : static_cast<double>(counts[c]) * counts[d];
        coincidence[c * k + d] += pairs * w;
      }
    }
  }
  if (!pairable) throw Error("no_overlap", "no unit has two or more labels");

  std::vector<double> marginal(k, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) marginal[c] += coincidence[c * k + d];
    n += marginal[c];
  }
  double observed = 0.0, expected = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      if (c == d) continue;
      observed += coincidence[c * k + d];
      expected += marginal[c] * marginal[d];
    }
  }
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

LabelTable bws_alpha_table(const std::vector<bws::JudgedTuple>& judged) {
  std::set<std::string> annotator_set;
  for (const auto& j : judged) annotator_set.insert(j.judgment.annotator_id);
  std::vector<std::string> annotators(annotator_set.begin(), annotator_set.end());
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < annotators.size(); ++i) column[annotators[i]] = i;

  std::map<std::string, std::size_t> unit_of_tuple;
  LabelTable table;
  for (const auto& j : judged) {
    auto [it, inserted] = unit_of_tuple.emplace(j.tuple.tuple_id, table.size());
    if (inserted) {
      table.emplace_back(annotators.size());
      table.emplace_back(annotators.size());
    }
    const std::size_t col = column[j.judgment.annotator_id];
    auto& best_unit = table[it->second];
    auto& worst_unit = table[it->second + 1];
    if (!best_unit[col]) best_unit[col] = j.judgment.best;
    if (!worst_unit[col]) worst_unit[col] = j.judgment.worst;
  }
  return table;
}

std::string to_string(PairLabel l) {
  switch (l) {
    case PairLabel::kAMore: return "a_more";
    case PairLabel::kBMore: return "b_more";
    case PairLabel::kSame: return "same";
  }
  return "same";
}

PairLabel parse_pair_label(const std::string& s) {
  if (s == "a_more") return PairLabel::kAMore;
  if (s == "b_more") return PairLabel::kBMore;
  if (s == "same") return PairLabel::kSame;
  throw Error("parse_error", "unknown pair label '" + s + "'");
}

namespace {

std::size_t gap_bin(double gap, double width) {
  return static_cast<std::size_t>(std::floor(gap / width + 1e-9));
}

struct PairGroup {
  double gap = 0.0;
  std::map<std::string, PairLabel> labels;  // by annotator
};

bool majority_follows_model(const PairGroup& g) {
  std::size_t follow = 0;
  for (const auto& [_, label] : g.labels)
    if (label == PairLabel::kAMore) ++follow;
  return 2 * follow > g.labels.size();
}

}  // namespace

ValidationReport pairwise_validation(const std::vector<PairJudgment>& judgments,
                                     double bin_width) {
  if (!(bin_width > 0.0)) throw Error("invalid_argument", "bin_width must be positive");
  std::map<std::string, PairGroup> pairs;
  for (const auto& j : judgments) {
    if (j.model_gap < 0.0) throw Error("invalid_argument", "model_gap must be >= 0");
    auto& g = pairs[j.pair_id];
    g.gap = j.model_gap;
    g.labels.emplace(j.annotator_id, j.label);
  }

  std::map<std::size_t, std::vector<const PairGroup*>> by_bin;
  for (const auto& [_, g] : pairs) by_bin[gap_bin(g.gap, bin_width)].push_back(&g);

  ValidationReport report;
  std::size_t follow_total = 0;
  for (const auto& [bin, groups] : by_bin) {
    ValidationBin vb;
    vb.index = bin;
    vb.low = static_cast<double>(bin) * bin_width;
    vb.high = static_cast<double>(bin + 1) * bin_width;
    vb.pairs = groups.size();

    std::set<std::string> annotator_set;
    for (const auto* g : groups)
      for (const auto& [a, _] : g->labels) annotator_set.insert(a);
    std::vector<std::string> annotators(annotator_set.begin(), annotator_set.end());
    LabelTable table;
    std::size_t follow = 0;
    for (const auto* g : groups) {
      std::vector<std::optional<std::string>> unit(annotators.size());
      for (std::size_t a = 0; a < annotators.size(); ++a) {
        auto it = g->labels.find(annotators[a]);
        if (it != g->labels.end()) unit[a] = to_string(it->second);
      }
      table.push_back(std::move(unit));
      if (majority_follows_model(*g)) ++follow;
    }
    try {
      vb.alpha = krippendorff_alpha(table);
    } catch (const Error&) {
      vb.alpha.reset();
    }
    vb.agreement = static_cast<double>(follow) / static_cast<double>(groups.size());
    follow_total += follow;
    report.bins.push_back(vb);
  }
  report.total_pairs = pairs.size();
  report.overall_agreement =
      pairs.empty() ? 0.0 : static_cast<double>(follow_total) / static_cast<double>(pairs.size());
  return report;
}

std::vector<SampledPair> sample_validation_pairs(const std::map<std::string, double>& scores,
                                                 std::size_t bins, std::size_t per_bin,
                                                 double bin_width, std::uint64_t seed) {
  if (scores.size() < 2) throw Error("insufficient_data", "need at least 2 scored questions");
  std::vector<std::pair<std::string, double>> items(scores.begin(), scores.end());
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);

  std::vector<std::vector<SampledPair>> filled(bins);
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::size_t remaining = bins * per_bin;
  const std::size_t max_draws = 2000 * std::max<std::size_t>(remaining, 1);
  for (std::size_t draw = 0; draw < max_draws && remaining > 0; ++draw) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    if (items[i].second < items[j].second) std::swap(i, j);
    const double gap = items[i].second - items[j].second;
    const std::size_t bin = gap_bin(gap, bin_width);
    if (bin >= bins || filled[bin].size() >= per_bin) continue;
    if (!used.insert({std::min(i, j), std::max(i, j)}).second) continue;
    filled[bin].push_back({"", items[i].first, items[j].first, gap, bin});
    --remaining;
  }
  if (remaining > 0)
    throw Error("insufficient_data", "could not fill every gap bin with " +
                                         std::to_string(per_bin) + " pairs");
  std::vector<SampledPair> out;
  for (auto& bin_pairs : filled)
    for (auto& p : bin_pairs) {
      std::string digits = std::to_string(out.size() + 1);
      if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
      p.pair_id = "p" + digits;
      out.push_back(std::move(p));
    }
  return out;
}

std::vector<PairJudgment> read_pair_judgments(const std::string& path) {
  auto table = csv::read_file(path);
  const auto pid = table.column("pair_id"), qa = table.column("qa_id"),
             qb = table.column("qb_id"), gap = table.column("model_gap"),
             ann = table.column("annotator_id"), label = table.column("label");
  std::vector<PairJudgment> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    PairJudgment j;
    j.pair_id = row[pid];
    j.question_a = row[qa];
    j.question_b = row[qb];
    try {
      j.model_gap = std::stod(row[gap]);
      j.label = parse_pair_label(row[label]);
    } catch (const std::exception& e) {
      throw Error("parse_error", path + ":" + std::to_string(table.lines[r]) + ": " + e.what());
    }
    if (!std::isfinite(j.model_gap) || j.model_gap < 0.0)
      throw Error("parse_error", path + ":" + std::to_string(table.lines[r]) +
                                     ": model_gap must be a finite value >= 0");
    j.annotator_id = row[ann];
    out.push_back(std::move(j));
  }
  return out;
}

std::string format_report(const ReliabilityReport& report) {
  std::ostringstream out;
  out << "judgments=" << report.judgments << "\n";
  out << "shr_mean=" << csv::format_double(report.shr.mean, 6) << "\n";
  out << "shr_resamples=" << report.shr.per_resample.size() << "\n";
  out << "shr_per_resample=";
  for (std::size_t i = 0; i < report.shr.per_resample.size(); ++i)
    out << (i ? ";" : "") << csv::format_double(report.shr.per_resample[i], 6);
  out << "\n";
  out << "krippendorff_alpha="
      << (report.krippendorff_alpha ? csv::format_double(*report.krippendorff_alpha, 6) : "NA")
      << "\n";
  for (const auto& note : report.notes) out << "note=" << note << "\n";
  return out.str();
}

std::string format_validation_bins(const ValidationReport& report) {
  std::string out = "bin_low,bin_high,pairs,alpha,agreement\n";
  for (const auto& b : report.bins) {
    out += csv::format_row({csv::format_double(b.low, 2), csv::format_double(b.high, 2),
                            std::to_string(b.pairs),
                            b.alpha ? csv::format_double(*b.alpha, 6) : "NA",
                            csv::format_double(b.agreement, 6)});
  }
  out += csv::format_row({"all", "", std::to_string(report.total_pairs), "",
                          csv::format_double(report.overall_agreement, 6)});
  return out;
}

}  // namespace intimacy::reliability
