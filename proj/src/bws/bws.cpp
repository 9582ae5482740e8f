#include "intimacy/bws.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/io.hpp"
#include "intimacy/common/rng.hpp"

namespace intimacy::bws {

namespace {

// Below this size the stationary distribution is solved directly; above it
// warm-started power iteration is cheaper than an O(n^3) factorization.
constexpr std::size_t kDirectSolveLimit = 1000;
constexpr std::size_t kPowerIterationCap = 10000;

std::string tuple_key(std::array<std::string, 4> items) {
  std::sort(items.begin(), items.end());
  return items[0] + '\x1f' + items[1] + '\x1f' + items[2] + '\x1f' + items[3];
}

double binomial4(std::size_t n) {
  double v = 1.0;
  for (std::size_t k = 0; k < 4; ++k) v *= static_cast<double>(n - k) / static_cast<double>(k + 1);
  return v;
}

std::string make_tuple_id(std::size_t index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "t" + digits;
}

bool strongly_connected(std::size_t n, std::span<const IndexedComparison> comparisons) {
  std::vector<std::vector<std::size_t>> fwd(n), rev(n);
  for (const auto& c : comparisons) {
    fwd[c.loser].push_back(c.winner);
    rev[c.winner].push_back(c.loser);
  }
  auto reaches_all = [n](const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(rev);
}

std::vector<double> solve_stationary(const Eigen::MatrixXd& rates) {
  const auto n = rates.rows();
  Eigen::MatrixXd generator = rates;
  for (Eigen::Index i = 0; i < n; ++i) {
    generator(i, i) = 0.0;
    generator(i, i) = -generator.row(i).sum();
  }
  // pi^T Q = 0  <=>  Q^T pi = 0, with one equation swapped for sum(pi) = 1.
  Eigen::MatrixXd a = generator.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = a.partialPivLu().solve(b);
  std::vector<double> out(pi.data(), pi.data() + n);
  return out;
}

std::vector<double> power_stationary(const Eigen::MatrixXd& rates, const std::vector<double>& warm,
                                     bool& converged) {
  const auto n = rates.rows();
  Eigen::VectorXd out_rate = rates.rowwise().sum() - rates.diagonal();
  double uniform_rate = out_rate.maxCoeff() * 1.0001;
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(warm.data(), n);
  p /= p.sum();
  Eigen::MatrixXd rates_t = rates.transpose();
  rates_t.diagonal().setZero();
  converged = false;
  for (std::size_t step = 0; step < kPowerIterationCap; ++step) {
    Eigen::VectorXd flow = rates_t * p - out_rate.cwiseProduct(p);
    Eigen::VectorXd next = p + flow / uniform_rate;
    next /= next.sum();
    double delta = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (delta < 1e-13 * p.maxCoeff()) {
      converged = true;
      break;
    }
  }
  return std::vector<double>(p.data(), p.data() + n);
}

}  // namespace

std::vector<Tuple4> generate_tuples(const std::vector<std::string>& item_ids,
                                    std::size_t tuples_per_item, std::uint64_t seed) {
  const std::size_t n = item_ids.size();
  if (n < 4) throw Error("too_few_items", "need at least 4 items, got " + std::to_string(n));
  if (std::set<std::string>(item_ids.begin(), item_ids.end()).size() != n)
    throw Error("duplicate_id", "item ids must be distinct");
  if (tuples_per_item == 0) return {};

  const std::size_t per_round = (n + 3) / 4;
  if (binomial4(n) < static_cast<double>(per_round * tuples_per_item))
    throw Error("too_few_items", std::to_string(n) + " items cannot form " +
                                     std::to_string(per_round * tuples_per_item) +
                                     " distinct tuples");

  Rng rng(seed);
  std::set<std::string> used;
  std::vector<Tuple4> tuples;
  std::vector<std::size_t> order(n);

  for (std::size_t round = 0; round < tuples_per_item; ++round) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);

      std::vector<std::array<std::string, 4>> round_tuples;
      std::size_t full = n / 4;
      for (std::size_t c = 0; c < full; ++c) {
        std::array<std::string, 4> t;
        for (std::size_t k = 0; k < 4; ++k) t[k] = item_ids[order[4 * c + k]];
        round_tuples.push_back(t);
      }
      if (std::size_t leftover = n % 4; leftover > 0) {
        // Pad the remainder with items already placed this round.
        std::array<std::string, 4> t;
        for (std::size_t k = 0; k < leftover; ++k) t[k] = item_ids[order[4 * full + k]];
        std::vector<std::size_t> fillers(order.begin(), order.begin() + 4 * full);
        std::shuffle(fillers.begin(), fillers.end(), rng);
        for (std::size_t k = leftover; k < 4; ++k) t[k] = item_ids[fillers[k - leftover]];
        round_tuples.push_back(t);
      }

      std::set<std::string> keys;
      bool clash = false;
      for (const auto& t : round_tuples) {
        auto key = tuple_key(t);
        if (used.count(key) || !keys.insert(key).second) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      used.insert(keys.begin(), keys.end());
      for (auto& t : round_tuples) tuples.push_back({make_tuple_id(tuples.size()), std::move(t)});
      placed = true;
    }
    if (!placed)
      throw Error("too_few_items", "could not form distinct tuples for round " +
                                       std::to_string(round + 1));
  }
  return tuples;
}

std::vector<PairwiseComparison> expand_pairs(const Judgment& judgment, const Tuple4& tuple) {
  const auto& items = tuple.items;
  auto contains = [&](const std::string& id) {
    return std::find(items.begin(), items.end(), id) != items.end();
  };
  if (!judgment.tuple_id.empty() && judgment.tuple_id != tuple.tuple_id)
    throw Error("invalid_judgment", "judgment for " + judgment.tuple_id + " applied to tuple " +
                                        tuple.tuple_id);
  if (judgment.best == judgment.worst)
    throw Error("invalid_judgment", "best and worst are both '" + judgment.best + "'");
  if (!contains(judgment.best) || !contains(judgment.worst))
    throw Error("invalid_judgment", "best/worst not in tuple " + tuple.tuple_id);

  std::vector<PairwiseComparison> pairs;
  pairs.reserve(5);
  for (const auto& item : items)
    if (item != judgment.best) pairs.push_back({judgment.best, item});
  for (const auto& item : items)
    if (item != judgment.best && item != judgment.worst) pairs.push_back({item, judgment.worst});
  return pairs;
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& rates,
                                            const std::vector<double>& warm_start) {
  const auto n = static_cast<Eigen::Index>(rates.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = i == j ? 0.0 : rates[i][j];
  if (static_cast<std::size_t>(n) <= kDirectSolveLimit) return solve_stationary(m);
  bool converged = false;
  auto p = power_stationary(m, warm_start, converged);
  return converged ? p : solve_stationary(m);
}

std::vector<double> ilsr(std::size_t n_items, std::span<const IndexedComparison> comparisons,
                         const IlsrOptions& options) {
  if (n_items < 2) throw Error("insufficient_data", "ilsr needs at least 2 items");
  if (options.regularization < 0.0)
    throw Error("invalid_argument", "regularization must be non-negative");
  for (const auto& c : comparisons) {
    if (c.winner >= n_items || c.loser >= n_items || c.winner == c.loser)
      throw Error("invalid_argument", "comparison index out of range or self-comparison");
  }
  if (options.regularization == 0.0 && !strongly_connected(n_items, comparisons))
    throw Error("not_connected", "comparison graph is not strongly connected");

  const auto n = static_cast<Eigen::Index>(n_items);
  Eigen::MatrixXd wins = Eigen::MatrixXd::Zero(n, n);  // wins(i, j): i beat j
  for (const auto& c : comparisons) wins(c.winner, c.loser) += 1.0;

  std::vector<double> pi(n_items, 1.0 / static_cast<double>(n_items));
  Eigen::MatrixXd rates(n, n);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // rates(j, i): flow from loser j to winner i, weighted by 1 / (pi_i + pi_j).
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        rates(j, i) = i == j ? 0.0 : (wins(i, j) + options.regularization) / (pi[i] + pi[j]);
      }
    }
    std::vector<double> next;
    if (n_items <= kDirectSolveLimit) {
      next = solve_stationary(rates);
    } else {
      bool converged = false;
      next = power_stationary(rates, pi, converged);
      if (!converged) next = solve_stationary(rates);
    }
    double total = 0.0;
    for (double& v : next) {
      v = std::max(v, 1e-300);
      total += v;
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < n_items; ++i) {
      next[i] /= total;
      delta = std::max(delta, std::abs(next[i] - pi[i]));
    }
    pi = std::move(next);
    if (delta < options.tolerance) return pi;
  }
  throw Error("no_convergence", "ilsr did not converge in " +
                                    std::to_string(options.max_iterations) + " iterations");
}

double BtlStrengths::at(const std::string& item) const {
  auto it = std::lower_bound(items.begin(), items.end(), item);
  if (it == items.end() || *it != item) throw Error("unknown_item", item);
  return strength[static_cast<std::size_t>(it - items.begin())];
}

BtlStrengths ilsr(const std::vector<PairwiseComparison>& comparisons,
                  const IlsrOptions& options) {
  std::set<std::string> ids;
  for (const auto& c : comparisons) {
    if (c.winner == c.loser) throw Error("invalid_argument", "self-comparison " + c.winner);
    ids.insert(c.winner);
    ids.insert(c.loser);
  }
  BtlStrengths out;
  out.items.assign(ids.begin(), ids.end());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < out.items.size(); ++i) index[out.items[i]] = i;
  std::vector<IndexedComparison> indexed;
  indexed.reserve(comparisons.size());
  for (const auto& c : comparisons) indexed.push_back({index[c.winner], index[c.loser]});
  out.strength = ilsr(out.items.size(), indexed, options);
  return out;
}

std::vector<double> strengths_to_scores(std::span<const double> strengths, bool* degenerate) {
  std::vector<double> logs(strengths.size());
  for (std::size_t i = 0; i < strengths.size(); ++i) {
    if (!(strengths[i] > 0.0)) throw Error("invalid_argument", "strengths must be positive");
    logs[i] = std::log(strengths[i]);
  }
  std::vector<double> scores(strengths.size(), 0.0);
  if (logs.empty()) return scores;
  auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
  const double min_log = *lo, range = *hi - *lo;
  bool flat = range <= 1e-12;
  if (degenerate) *degenerate = flat;
  if (flat) return scores;
  for (std::size_t i = 0; i < logs.size(); ++i)
    scores[i] = 2.0 * (logs[i] - min_log) / range - 1.0;
  return scores;
}

IntimacyScores strengths_to_scores(const BtlStrengths& strengths) {
  IntimacyScores out;
  out.items = strengths.items;
  out.score = strengths_to_scores(strengths.strength, &out.degenerate);
  return out;
}

double IntimacyScores::at(const std::string& item) const {
  auto it = std::find(items.begin(), items.end(), item);
  if (it == items.end()) throw Error("unknown_item", item);
  return score[static_cast<std::size_t>(it - items.begin())];
}

IntimacyScores score_judgments(const std::vector<JudgedTuple>& judged,
                               const IlsrOptions& options) {
  std::vector<PairwiseComparison> comparisons;
  comparisons.reserve(judged.size() * 5);
  for (const auto& j : judged) {
    auto pairs = expand_pairs(j.judgment, j.tuple);
    comparisons.insert(comparisons.end(), pairs.begin(), pairs.end());
  }
  return strengths_to_scores(ilsr(comparisons, options));
}

// --- file formats -------------------------------------------------------------

const char* const kTupleHeader = "tuple_id,item_1,item_2,item_3,item_4";
const char* const kJudgmentHeader =
    "tuple_id,item_1,item_2,item_3,item_4,best,worst,annotator_id,timestamp";

std::string format_tuples(const std::vector<Tuple4>& tuples) {
  std::string out = std::string(kTupleHeader) + "\n";
  for (const auto& t : tuples)
    out += csv::format_row({t.tuple_id, t.items[0], t.items[1], t.items[2], t.items[3]});
  return out;
}

std::vector<Tuple4> read_tuples(const std::string& path) {
  auto table = csv::read_file(path);
  const std::size_t id = table.column("tuple_id");
  const std::size_t cols[4] = {table.column("item_1"), table.column("item_2"),
                               table.column("item_3"), table.column("item_4")};
  std::vector<Tuple4> tuples;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Tuple4 t;
    t.tuple_id = row[id];
    for (std::size_t k = 0; k < 4; ++k) t.items[k] = row[cols[k]];
    if (std::set<std::string>(t.items.begin(), t.items.end()).size() != 4)
      throw Error("parse_error", path + ":" + std::to_string(table.lines[r]) +
                                     ": tuple items must be 4 distinct ids");
    if (!seen.insert(t.tuple_id).second)
      throw Error("duplicate_id", path + ": tuple id '" + t.tuple_id + "' repeats");
    tuples.push_back(std::move(t));
  }
  return tuples;
}

std::string format_judgment_row(const JudgedTuple& j) {
  const auto& t = j.tuple;
  return csv::format_row({t.tuple_id, t.items[0], t.items[1], t.items[2], t.items[3],
                          j.judgment.best, j.judgment.worst, j.judgment.annotator_id,
                          j.judgment.timestamp});
}

std::string format_judgments(const std::vector<JudgedTuple>& judged) {
  std::string out = std::string(kJudgmentHeader) + "\n";
  for (const auto& j : judged) out += format_judgment_row(j);
  return out;
}

std::vector<JudgedTuple> parse_judgments(const std::string& content, const std::string& source) {
  std::istringstream in(content);
  auto table = csv::read_stream(in, source);
  const std::size_t id = table.column("tuple_id");
  const std::size_t cols[4] = {table.column("item_1"), table.column("item_2"),
                               table.column("item_3"), table.column("item_4")};
  const std::size_t best = table.column("best"), worst = table.column("worst");
  const auto annotator = table.find_column("annotator_id");
  const auto timestamp = table.find_column("timestamp");
  std::vector<JudgedTuple> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    JudgedTuple j;
    j.tuple.tuple_id = row[id];
    for (std::size_t k = 0; k < 4; ++k) j.tuple.items[k] = row[cols[k]];
    j.judgment = {row[id], row[best], row[worst], annotator ? row[*annotator] : "",
                  timestamp ? row[*timestamp] : ""};
    try {
      expand_pairs(j.judgment, j.tuple);
    } catch (const Error& e) {
      throw Error("invalid_judgment", source + ":" + std::to_string(table.lines[r]) + ": " +
                                          e.what());
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<JudgedTuple> read_judgments(const std::string& path) {
  return parse_judgments(io::read_file(path), path);
}

std::string format_scores(const IntimacyScores& scores) {
  std::string out = "item_id,score\n";
  for (std::size_t i = 0; i < scores.items.size(); ++i)
    out += csv::format_row({scores.items[i], csv::format_double(scores.score[i], 6)});
  return out;
}

}  // namespace intimacy::bws
