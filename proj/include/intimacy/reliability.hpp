#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intimacy/bws.hpp"

namespace intimacy::reliability {

// Product-moment correlation. Returns 0 when either vector is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

struct SplitHalfResult {
  double mean = 0.0;
  std::vector<double> per_resample;
};

// Correlation of scores inferred independently from two judgment sets, over
// the items scored in both.
double split_half_correlation(const std::vector<bws::JudgedTuple>& half_a,
                              const std::vector<bws::JudgedTuple>& half_b,
                              const bws::IlsrOptions& options = {});

// Each resample randomly halves the judgment records, scores each half and
// correlates. Resample k uses derive_seed(seed, k), so results do not depend
// on the thread count.
SplitHalfResult split_half_ranking(const std::vector<bws::JudgedTuple>& judged,
                                   std::size_t resamples, std::uint64_t seed,
                                   const bws::IlsrOptions& options = {},
                                   std::size_t threads = 0);

// Units x annotators table of nominal labels; nullopt marks a missing value.
using LabelTable = std::vector<std::vector<std::optional<std::string>>>;

// Krippendorff's alpha with the nominal metric. Units with fewer than two
// labels are not pairable and are ignored. When every pairable value is
// identical the expected disagreement is zero; alpha is reported as 1.
double krippendorff_alpha(const LabelTable& labels);

// Two units per (tuple, annotator set): the best pick and the worst pick, with
// one column per annotator in sorted annotator order.
LabelTable bws_alpha_table(const std::vector<bws::JudgedTuple>& judged);

enum class PairLabel { kAMore, kBMore, kSame };
std::string to_string(PairLabel l);
PairLabel parse_pair_label(const std::string& s);

// Pairs are oriented so the model scores question_a at least as high as
// question_b; the model's own order is therefore always kAMore.
struct PairJudgment {
  std::string pair_id;
  std::string question_a;
  std::string question_b;
  double model_gap = 0.0;
  std::string annotator_id;
  PairLabel label = PairLabel::kSame;
};

struct ValidationBin {
  std::size_t index = 0;
  double low = 0.0;
  double high = 0.0;
  std::size_t pairs = 0;
  std::optional<double> alpha;  // absent when no pair has two annotations
  double agreement = 0.0;       // fraction of pairs whose majority label is kAMore
};

struct ValidationReport {
  std::vector<ValidationBin> bins;  // non-empty bins only, ascending
  double overall_agreement = 0.0;
  std::size_t total_pairs = 0;
};

ValidationReport pairwise_validation(const std::vector<PairJudgment>& judgments,
                                     double bin_width = 0.1);

struct SampledPair {
  std::string pair_id;
  std::string question_a;
  std::string question_b;
  double model_gap = 0.0;
  std::size_t bin = 0;
};

// Draws `per_bin` question pairs into each of `bins` gap bins of width
// `bin_width` (e.g. 10 x 30 = 300 pairs). Throws insufficient_data when a bin
// cannot be filled.
std::vector<SampledPair> sample_validation_pairs(const std::map<std::string, double>& scores,
                                                 std::size_t bins, std::size_t per_bin,
                                                 double bin_width, std::uint64_t seed);

// CSV with columns pair_id,qa_id,qb_id,model_gap,annotator_id,label.
std::vector<PairJudgment> read_pair_judgments(const std::string& path);

struct ReliabilityReport {
  SplitHalfResult shr;
  std::optional<double> krippendorff_alpha;
  std::size_t judgments = 0;
  std::vector<std::string> notes;
};

std::string format_report(const ReliabilityReport& report);
std::string format_validation_bins(const ValidationReport& report);

}  // namespace intimacy::reliability
