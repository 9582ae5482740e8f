#include "intimacy/analysis/regression.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <boost/math/distributions/students_t.hpp>

#include "intimacy/analysis/stats.hpp"
#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/rng.hpp"

namespace intimacy::analysis {

namespace {

constexpr char kPathSep = '\x1f';

std::string path_key(const std::vector<std::string>& groups, std::size_t depth) {
  std::string key;
  for (std::size_t d = 0; d <= depth; ++d) {
    if (d) key.push_back(kPathSep);
    key += groups[d];
  }
  return key;
}

std::string readable(std::string key) {
  std::replace(key.begin(), key.end(), kPathSep, '/');
  return key;
}

std::string stars_for(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

void finish(Coefficient& c, double df) {
  if (c.se > 0.0 && df >= 1.0) {
    boost::math::students_t dist(df);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(c.beta / c.se)));
  } else {
    c.p_value = 1.0;
  }
  c.stars = stars_for(c.p_value);
}

struct Design {
  std::vector<std::string> names;
  std::vector<std::string> focal_levels;         // non-reference, sorted
  std::vector<std::vector<int>> row_columns;     // columns set to 1 per row
  std::vector<std::string> top_groups;           // sorted
  std::vector<int> top_column;                   // column per top group
  // Leaves (full group paths) with their columns, per top group.
  std::vector<std::vector<std::vector<int>>> leaves_by_top;
  std::size_t depth = 0;
};

Design make_design(const RegressionData& data) {
  const std::size_t n = data.y.size();
  if (data.focal.size() != n) throw Error("length_mismatch", "focal labels vs outcomes");
  if (!data.groups.empty() && data.groups.size() != n)
    throw Error("length_mismatch", "group paths vs outcomes");

  Design d;
  d.depth = data.groups.empty() ? 0 : data.groups.front().size();
  for (const auto& g : data.groups)
    if (g.size() != d.depth) throw Error("invalid_argument", "group nesting depth differs");

  std::set<std::string> levels(data.focal.begin(), data.focal.end());
  if (!levels.count(data.reference))
    throw Error("missing_reference", "reference level '" + data.reference + "' has no observations");
  if (levels.size() < 2) throw Error("insufficient_data", "focal term needs at least 2 levels");

  std::map<std::string, int> focal_col;
  for (const auto& l : levels) {
    if (l == data.reference) continue;
    focal_col[l] = static_cast<int>(d.names.size());
    d.names.push_back(l);
    d.focal_levels.push_back(l);
  }

  // Group columns: every top-level group; children drop their first sibling.
  std::map<std::string, int> group_col;
  std::map<std::string, std::size_t> top_index;
  if (d.depth == 0) {
    group_col[""] = static_cast<int>(d.names.size());
    d.top_groups.push_back("");
    d.top_column.push_back(static_cast<int>(d.names.size()));
    d.names.push_back("(intercept)");
  } else {
    std::vector<std::set<std::string>> keys(d.depth);
    for (const auto& g : data.groups)
      for (std::size_t k = 0; k < d.depth; ++k) keys[k].insert(path_key(g, k));
    for (const auto& top : keys[0]) {
      top_index[top] = d.top_groups.size();
      d.top_groups.push_back(top);
      d.top_column.push_back(static_cast<int>(d.names.size()));
      group_col[top] = static_cast<int>(d.names.size());
      d.names.push_back("group:" + readable(top));
    }
    for (std::size_t k = 1; k < d.depth; ++k) {
      std::string prev_parent;
      bool first = true;
      for (const auto& key : keys[k]) {  // sorted, so siblings are contiguous
        const auto parent = key.substr(0, key.rfind(kPathSep));
        if (first || parent != prev_parent) {
          prev_parent = parent;
          first = false;
          continue;  // first child of this parent is absorbed by the parent
        }
        group_col[key] = static_cast<int>(d.names.size());
        d.names.push_back("group:" + readable(key));
      }
    }
  }

  d.row_columns.resize(n);
  d.leaves_by_top.resize(d.top_groups.size());
  std::set<std::string> seen_leaf;
  for (std::size_t i = 0; i < n; ++i) {
    auto& cols = d.row_columns[i];
    if (auto it = focal_col.find(data.focal[i]); it != focal_col.end()) cols.push_back(it->second);
    std::vector<int> group_cols;
    if (d.depth == 0) {
      group_cols.push_back(group_col.at(""));
    } else {
      for (std::size_t k = 0; k < d.depth; ++k)
        if (auto it = group_col.find(path_key(data.groups[i], k)); it != group_col.end())
          group_cols.push_back(it->second);
    }
    cols.insert(cols.end(), group_cols.begin(), group_cols.end());
    const auto leaf = d.depth == 0 ? std::string() : path_key(data.groups[i], d.depth - 1);
    if (seen_leaf.insert(leaf).second) {
      const std::size_t top = d.depth == 0 ? 0 : top_index.at(path_key(data.groups[i], 0));
      d.leaves_by_top[top].push_back(group_cols);
    }
  }
  return d;
}

struct Fit {
  Eigen::VectorXd beta;
  double sigma2 = 0.0;
  double df = 0.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

void fit(const Design& d, const std::vector<double>& y, Fit& f) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto p = static_cast<Eigen::Index>(d.names.size());
  if (n <= p)
    throw Error("insufficient_data", std::to_string(n) + " observations for " +
                                         std::to_string(p) + " parameters");
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c : d.row_columns[static_cast<std::size_t>(i)]) entries.emplace_back(i, c, 1.0);
  Eigen::SparseMatrix<double> x(n, p);
  x.setFromTriplets(entries.begin(), entries.end());
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

  Eigen::SparseMatrix<double> xtx = x.transpose() * x;
  for (Eigen::Index j = 0; j < p; ++j)
    if (xtx.coeff(j, j) == 0.0)
      throw Error("rank_deficient", "term '" + d.names[static_cast<std::size_t>(j)] +
                                        "' has no observations");
  f.solver.compute(xtx);
  if (f.solver.info() != Eigen::Success)
    throw Error("rank_deficient", "normal equations could not be factorized");

  // A vanishing pivot marks a column that is a combination of earlier ones.
  const Eigen::VectorXd piv = f.solver.vectorD();
  const double scale = piv.cwiseAbs().maxCoeff();
  const auto& perm = f.solver.permutationP().indices();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::fabs(piv(perm(j))) <= 1e-10 * scale)
      throw Error("rank_deficient", "term '" + d.names[static_cast<std::size_t>(j)] +
                                        "' is collinear with other terms");
  }
  f.beta = f.solver.solve(Eigen::VectorXd(x.transpose() * yv));
  const Eigen::VectorXd resid = yv - x * f.beta;
  f.df = static_cast<double>(n - p);
  f.sigma2 = resid.squaredNorm() / f.df;
}

double contrast_variance(Fit& f, const Eigen::VectorXd& c) {
  return f.sigma2 * c.dot(f.solver.solve(c));
}

}  // namespace

const Coefficient& RegressionResult::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.term == name) return t;
  throw Error("unknown_term", "no coefficient named '" + name + "'");
}

RegressionResult group_intercept_regression(const RegressionData& data) {
  const Design d = make_design(data);
  Fit f;
  fit(d, data.y, f);
  const auto p = static_cast<Eigen::Index>(d.names.size());

  RegressionResult r;
  r.reference = data.reference;
  r.n_observations = data.y.size();
  r.n_parameters = d.names.size();
  r.residual_sd = std::sqrt(f.sigma2);
  for (std::size_t j = 0; j < d.focal_levels.size(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e(static_cast<Eigen::Index>(j)) = 1.0;
    Coefficient c{d.focal_levels[j], f.beta(static_cast<Eigen::Index>(j)),
                  std::sqrt(contrast_variance(f, e)), 1.0, ""};
    finish(c, f.df);
    r.terms.push_back(c);
  }

  // Reference-level intercept of each top group: the mean over its leaves.
  std::vector<Eigen::VectorXd> contrasts;
  std::vector<double> group_means;
  for (const auto& leaves : d.leaves_by_top) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
    for (const auto& cols : leaves)
      for (int col : cols) c(col) += 1.0 / static_cast<double>(leaves.size());
    group_means.push_back(c.dot(f.beta));
    contrasts.push_back(std::move(c));
  }
  const std::size_t g = group_means.size();
  r.intercept.term = "intercept";
  r.intercept.beta = mean(group_means);
  if (g >= 2) {
    double ss = 0.0;
    for (double m : group_means) ss += (m - r.intercept.beta) * (m - r.intercept.beta);
    r.group_intercept_sd = std::sqrt(ss / static_cast<double>(g - 1));
    r.intercept.se = r.group_intercept_sd / std::sqrt(static_cast<double>(g));
  } else {
    r.intercept.se = std::sqrt(contrast_variance(f, contrasts.front()));
  }
  finish(r.intercept, g >= 2 ? static_cast<double>(g - 1) : f.df);

  if (d.depth == 0) {
    r.groups_per_level.push_back(1);
  } else {
    std::vector<std::set<std::string>> keys(d.depth);
    for (const auto& path : data.groups)
      for (std::size_t k = 0; k < d.depth; ++k) keys[k].insert(path_key(path, k));
    for (const auto& k : keys) r.groups_per_level.push_back(k.size());
  }
  return r;
}

std::vector<MarginalEffect> marginal_effects(const RegressionData& data, std::size_t bootstrap_n,
                                             std::uint64_t seed, std::size_t threads) {
  const auto full = group_intercept_regression(data);
  const std::size_t levels = full.terms.size();
  const std::size_t n = data.y.size();
  std::vector<std::vector<double>> draws(bootstrap_n);

  parallel_for(
      bootstrap_n,
      [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        RegressionData sample;
        sample.reference = data.reference;
        sample.y.reserve(n);
        sample.focal.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto k = static_cast<std::size_t>(rng() % n);
          sample.y.push_back(data.y[k]);
          sample.focal.push_back(data.focal[k]);
          if (!data.groups.empty()) sample.groups.push_back(data.groups[k]);
        }
        try {
          const auto r = group_intercept_regression(sample);
          if (r.terms.size() != levels) return;  // a level fell out of the resample
          std::vector<double> betas;
          for (const auto& t : r.terms) betas.push_back(t.beta);
          draws[b] = std::move(betas);
        } catch (const Error&) {
          // Degenerate resample; it simply does not contribute.
        }
      },
      threads);

  std::vector<MarginalEffect> out;
  out.push_back({data.reference, 0.0, 0.0, 0.0, bootstrap_n});
  for (std::size_t j = 0; j < levels; ++j) {
    std::vector<double> samples;
    for (const auto& d : draws)
      if (!d.empty()) samples.push_back(d[j]);
    MarginalEffect e{full.terms[j].term, full.terms[j].beta, full.terms[j].beta,
                     full.terms[j].beta, samples.size()};
    if (!samples.empty()) {
      const auto ci = percentile_interval(std::move(samples));
      e.ci_low = ci.low;
      e.ci_high = ci.high;
    }
    out.push_back(e);
  }
  return out;
}

std::string format_regression(const RegressionResult& r) {
  std::string out = "term,beta,se,p_stars\n";
  auto row = [&](const Coefficient& c) {
    out += csv::format_row(
        {c.term, csv::format_double(c.beta), csv::format_double(c.se), c.stars});
  };
  for (const auto& t : r.terms) row(t);
  row(r.intercept);
  out += csv::format_row({"observations", std::to_string(r.n_observations), "", ""});
  return out;
}

std::string format_effects(const std::vector<MarginalEffect>& effects) {
  std::string out = "level,ame,ci_low,ci_high\n";
  for (const auto& e : effects)
    out += csv::format_row({e.level, csv::format_double(e.ame), csv::format_double(e.ci_low),
                            csv::format_double(e.ci_high)});
  return out;
}

}  // namespace intimacy::analysis
