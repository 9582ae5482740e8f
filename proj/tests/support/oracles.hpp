#pragma once

// Independent reference implementations used to check the library. Each one
// takes the slow, obvious route on purpose.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// BTL maximum likelihood by plain gradient ascent on log-strengths.
// wins[i][j] = times i beat j. Returns strengths normalized to sum 1.
inline std::vector<double> btl_mle(const std::vector<std::vector<double>>& wins,
                                   int iterations = 20000, double step = 0.05) {
  const std::size_t n = wins.size();
  std::vector<double> theta(n, 0.0);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double games = wins[i][j] + wins[j][i];
        if (games == 0.0) continue;
        const double p = 1.0 / (1.0 + std::exp(theta[j] - theta[i]));
        grad[i] += wins[i][j] - games * p;
      }
    for (std::size_t i = 0; i < n; ++i) theta[i] += step * grad[i];
    const double m = theta[0];
    for (auto& t : theta) t -= m;
  }
  double z = 0.0;
  for (double t : theta) z += std::exp(t);
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = std::exp(theta[i]) / z;
  return pi;
}

// Single-source BFS distances (in edges) over an explicit edge set.
inline std::map<std::string, int> bfs_distances(
    const std::set<std::pair<std::string, std::string>>& undirected, const std::string& source) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [a, b] : undirected) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::map<std::string, int> dist{{source, 0}};
  std::queue<std::string> q;
  q.push(source);
  while (!q.empty()) {
    const auto x = q.front();
    q.pop();
    for (const auto& y : adj[x])
      if (!dist.count(y)) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
  }
  return dist;
}

// Pairs seen in both directions, as (smaller, larger).
inline std::set<std::pair<std::string, std::string>> reciprocated(
    const std::vector<std::pair<std::string, std::string>>& directed) {
  std::set<std::pair<std::string, std::string>> seen(directed.begin(), directed.end());
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [a, b] : seen)
    if (a != b && seen.count({b, a})) out.insert(std::minmax(a, b));
  return out;
}

// Krippendorff's nominal alpha from its pairwise definition:
// D_o averages within-unit disagreement, D_e disagreement over all value pairs.
inline double krippendorff_nominal(const std::vector<std::vector<std::optional<std::string>>>& units) {
  std::vector<std::vector<std::string>> pairable;
  for (const auto& u : units) {
    std::vector<std::string> vals;
    for (const auto& v : u)
      if (v) vals.push_back(*v);
    if (vals.size() >= 2) pairable.push_back(vals);
  }
  std::vector<std::string> all;
  for (const auto& u : pairable) all.insert(all.end(), u.begin(), u.end());
  const double n = static_cast<double>(all.size());
  double d_o = 0.0;
  for (const auto& u : pairable) {
    double dis = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j && u[i] != u[j]) dis += 1.0;
    d_o += dis / static_cast<double>(u.size() - 1);
  }
  d_o /= n;
  double d_e = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (i != j && all[i] != all[j]) d_e += 1.0;
  d_e /= n * (n - 1.0);
  return 1.0 - d_o / d_e;
}

// Ordinary least squares with intercept via normal equations solved by
// Gauss-Jordan elimination; x is row-major n x p.
inline std::vector<double> ols_with_intercept(const std::vector<std::vector<double>>& x,
                                              const std::vector<double>& y) {
  const std::size_t p = x.front().size() + 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < x.size(); ++r) {
    std::vector<double> row{1.0};
    row.insert(row.end(), x[r].begin(), x[r].end());
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) a[i][j] += row[i] * row[j];
      a[i][p] += row[i] * y[r];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = a[i][p] / a[i][i];
  return beta;  // intercept first
}

}  // namespace oracle
