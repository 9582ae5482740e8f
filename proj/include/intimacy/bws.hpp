#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace intimacy::bws {

struct Tuple4 {
  std::string tuple_id;
  std::array<std::string, 4> items;
};

struct Judgment {
  std::string tuple_id;
  std::string best;
  std::string worst;
  std::string annotator_id;
  std::string timestamp;
};

struct PairwiseComparison {
  std::string winner;
  std::string loser;

  bool operator==(const PairwiseComparison&) const = default;
};

// A judgment joined with the tuple it was made on; the unit the judgment
// file carries and the unit split-half resampling draws from.
struct JudgedTuple {
  Tuple4 tuple;
  Judgment judgment;
};

// Every item appears in at least `tuples_per_item` tuples, no tuple repeats
// an item and no two tuples share the same item set. Deterministic in seed.
std::vector<Tuple4> generate_tuples(const std::vector<std::string>& item_ids,
                                    std::size_t tuples_per_item, std::uint64_t seed);

// best beats the other three, the other three beat worst; the two middle
// items are not compared.
std::vector<PairwiseComparison> expand_pairs(const Judgment& judgment, const Tuple4& tuple);

struct IlsrOptions {
  // Pseudo-comparisons added in both directions between every pair of items.
  double regularization = 0.01;
  double tolerance = 1e-9;
  std::size_t max_iterations = 1000;
};

// Dense-index comparison used by the numeric core.
struct IndexedComparison {
  std::size_t winner;
  std::size_t loser;
};

// Strengths for items 0..n_items-1, positive and summing to one.
std::vector<double> ilsr(std::size_t n_items, std::span<const IndexedComparison> comparisons,
                         const IlsrOptions& options = {});

struct BtlStrengths {
  std::vector<std::string> items;  // sorted
  std::vector<double> strength;    // parallel to items

  double at(const std::string& item) const;
};

BtlStrengths ilsr(const std::vector<PairwiseComparison>& comparisons,
                  const IlsrOptions& options = {});

// Stationary distribution of the continuous-time chain with generator built
// from rates[j][i] (rate of moving j -> i). Exposed for tests.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& rates,
                                            const std::vector<double>& warm_start);

struct IntimacyScores {
  std::vector<std::string> items;
  std::vector<double> score;  // in [-1, 1], parallel to items
  bool degenerate = false;    // all strengths equal; every score is 0

  double at(const std::string& item) const;
};

// Min-max scaling of log-strengths onto [-1, 1].
IntimacyScores strengths_to_scores(const BtlStrengths& strengths);
std::vector<double> strengths_to_scores(std::span<const double> strengths,
                                        bool* degenerate = nullptr);

// Expands every judgment and runs ilsr + strengths_to_scores.
IntimacyScores score_judgments(const std::vector<JudgedTuple>& judged,
                               const IlsrOptions& options = {});

// --- file formats -------------------------------------------------------------
// Tuples:    tuple_id,item_1,item_2,item_3,item_4
// Judgments: tuple_id,item_1,item_2,item_3,item_4,best,worst,annotator_id,timestamp
// Scores:    item_id,score

extern const char* const kTupleHeader;
extern const char* const kJudgmentHeader;

std::string format_tuples(const std::vector<Tuple4>& tuples);
std::vector<Tuple4> read_tuples(const std::string& path);

std::string format_judgment_row(const JudgedTuple& judged);
std::string format_judgments(const std::vector<JudgedTuple>& judged);
std::vector<JudgedTuple> read_judgments(const std::string& path);
std::vector<JudgedTuple> parse_judgments(const std::string& content, const std::string& source);

std::string format_scores(const IntimacyScores& scores);

}  // namespace intimacy::bws
