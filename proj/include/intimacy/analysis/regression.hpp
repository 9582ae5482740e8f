#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace intimacy::analysis {

// Outcome, one focal categorical and an optional nested grouping per
// observation (e.g. {author, book} or {subreddit}). Every observation must
// carry the same nesting depth.
struct RegressionData {
  std::vector<double> y;
  std::vector<std::string> focal;
  std::vector<std::vector<std::string>> groups;
  std::string reference;
};

struct Coefficient {
  std::string term;
  double beta = 0.0;
  double se = 0.0;
  double p_value = 1.0;
  std::string stars;  // *** p<0.01, ** p<0.05, * p<0.1
};

struct RegressionResult {
  std::string reference;
  std::vector<Coefficient> terms;  // focal levels except the reference, sorted
  // Mean of the top-level groups' reference-level intercepts. Its SE comes
  // from the spread of those intercepts, so between-group variation counts.
  Coefficient intercept;
  std::size_t n_observations = 0;
  std::size_t n_parameters = 0;
  std::vector<std::size_t> groups_per_level;
  double group_intercept_sd = 0.0;
  double residual_sd = 0.0;

  const Coefficient& term(const std::string& name) const;
};

// Least squares on focal dummies plus fixed group intercepts: one dummy per
// top-level group and, below it, one per child group with the first child of
// each parent dropped. Stands in for a random-intercept model.
RegressionResult group_intercept_regression(const RegressionData& data);

struct MarginalEffect {
  std::string level;
  double ame = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t resamples = 0;  // bootstrap fits that succeeded
};

// In a dummy-coded linear model the AME of a level equals its coefficient;
// CIs come from refitting on observation-level bootstrap resamples. The
// reference level is listed first with AME 0.
std::vector<MarginalEffect> marginal_effects(const RegressionData& data,
                                             std::size_t bootstrap_n = 1000,
                                             std::uint64_t seed = 0, std::size_t threads = 0);

// term,beta,se,p_stars  (intercept last, then an observations row)
std::string format_regression(const RegressionResult& result);
// level,ame,ci_low,ci_high
std::string format_effects(const std::vector<MarginalEffect>& effects);

}  // namespace intimacy::analysis
