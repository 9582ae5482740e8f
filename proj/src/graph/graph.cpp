#include "intimacy/graph.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/common/text.hpp"

namespace intimacy::graph {

namespace {

constexpr char kMagic[8] = {'I', 'M', 'G', 'R', 'A', 'P', 'H', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw Error("parse_error", path + ": truncated graph file");
  return v;
}

}  // namespace

std::vector<MentionEvent> read_mention_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  csv::Reader reader(in);
  std::vector<MentionEvent> out;
  bool first = true;
  while (auto rec = reader.next()) {
    if (rec->size() < 2 || rec->size() > 3)
      throw Error("parse_error", path + ":" + std::to_string(reader.line()) +
                                     ": expected from,to[,timestamp]");
    if (first) {
      first = false;
      if (text::to_lower((*rec)[0]) == "from" && text::to_lower((*rec)[1]) == "to") continue;
    }
    out.push_back({(*rec)[0], (*rec)[1], rec->size() == 3 ? (*rec)[2] : std::string()});
  }
  return out;
}

MutualGraph MutualGraph::build(const std::vector<MentionEvent>& events) {
  std::set<std::pair<std::string_view, std::string_view>> directed;
  for (const auto& e : events)
    if (e.from != e.to) directed.emplace(e.from, e.to);

  std::set<std::string_view> users;
  std::vector<std::pair<std::string_view, std::string_view>> mutual;
  for (const auto& [a, b] : directed) {
    if (a < b && directed.count({b, a})) {
      mutual.emplace_back(a, b);
      users.insert(a);
      users.insert(b);
    }
  }

  MutualGraph g;
  g.names_.assign(users.begin(), users.end());
  g.index_names();
  std::vector<std::vector<NodeId>> adj(g.names_.size());
  for (const auto& [a, b] : mutual) {
    const NodeId u = g.ids_.at(std::string(a)), v = g.ids_.at(std::string(b));
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  g.offsets_.assign(1, 0);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    g.targets_.insert(g.targets_.end(), list.begin(), list.end());
    g.offsets_.push_back(g.targets_.size());
  }
  return g;
}

void MutualGraph::index_names() {
  ids_.clear();
  ids_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i)
    ids_.emplace(names_[i], static_cast<NodeId>(i));
}

std::optional<NodeId> MutualGraph::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const NodeId> MutualGraph::neighbors(NodeId id) const {
  return {targets_.data() + offsets_[id], targets_.data() + offsets_[id + 1]};
}

bool MutualGraph::has_edge(NodeId u, NodeId v) const {
  const auto n = neighbors(u);
  return std::binary_search(n.begin(), n.end(), v);
}

void MutualGraph::save(const std::string& path) const {
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write " + tmp);
    out.write(kMagic, sizeof kMagic);
    put(out, kFormatVersion);
    put(out, static_cast<std::uint64_t>(names_.size()));
    put(out, static_cast<std::uint64_t>(targets_.size()));
    for (const auto& n : names_) {
      put(out, static_cast<std::uint32_t>(n.size()));
      out.write(n.data(), static_cast<std::streamsize>(n.size()));
    }
    out.write(reinterpret_cast<const char*>(offsets_.data()),
              static_cast<std::streamsize>(offsets_.size() * sizeof(std::uint64_t)));
    out.write(reinterpret_cast<const char*>(targets_.data()),
              static_cast<std::streamsize>(targets_.size() * sizeof(NodeId)));
    if (!out.flush()) throw Error("io_error", "failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

MutualGraph MutualGraph::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error("parse_error", path + ": not a mutual-mention graph file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    throw Error("parse_error", path + ": unsupported graph version " + std::to_string(version));
  const auto n = get<std::uint64_t>(in, path);
  const auto m = get<std::uint64_t>(in, path);
  MutualGraph g;
  g.names_.resize(n);
  for (auto& name : g.names_) {
    name.resize(get<std::uint32_t>(in, path));
    if (!in.read(name.data(), static_cast<std::streamsize>(name.size())))
      throw Error("parse_error", path + ": truncated graph file");
  }
  g.offsets_.resize(n + 1);
  g.targets_.resize(m);
  in.read(reinterpret_cast<char*>(g.offsets_.data()),
          static_cast<std::streamsize>(g.offsets_.size() * sizeof(std::uint64_t)));
  in.read(reinterpret_cast<char*>(g.targets_.data()),
          static_cast<std::streamsize>(g.targets_.size() * sizeof(NodeId)));
  if (!in || g.offsets_.back() != m) throw Error("parse_error", path + ": truncated graph file");
  g.index_names();
  return g;
}

DistanceResult degree_of_separation(const MutualGraph& g, NodeId u, NodeId v, int max_depth) {
  if (u >= g.node_count() || v >= g.node_count())
    throw Error("unknown_node", "node id out of range");
  if (u == v) throw Error("invalid_argument", "asker and recipient are the same node");

  std::unordered_map<NodeId, int> dist[2];
  std::vector<NodeId> frontier[2] = {{u}, {v}};
  dist[0][u] = 0;
  dist[1][v] = 0;
  int level[2] = {0, 0};

  while (!frontier[0].empty() && !frontier[1].empty() && level[0] + level[1] < max_depth) {
    const int s = frontier[1].size() < frontier[0].size() ? 1 : 0;
    auto& mine = dist[s];
    const auto& other = dist[1 - s];
    std::vector<NodeId> next;
    int best = -1;
    for (NodeId x : frontier[s]) {
      for (NodeId y : g.neighbors(x)) {
        if (mine.count(y)) continue;
        mine[y] = level[s] + 1;
        if (auto it = other.find(y); it != other.end()) {
          const int len = level[s] + 1 + it->second;
          if (best < 0 || len < best) best = len;
        }
        next.push_back(y);
      }
    }
    ++level[s];
    frontier[s] = std::move(next);
    if (best >= 0) {
      if (best > max_depth) return {};
      return {best - 1};
    }
  }
  return {};
}

DistanceResult degree_of_separation(const MutualGraph& g, std::string_view u, std::string_view v,
                                    int max_depth) {
  const auto a = g.find(u), b = g.find(v);
  if (!a) throw Error("unknown_node", "user '" + std::string(u) + "' is not in the graph");
  if (!b) throw Error("unknown_node", "user '" + std::string(v) + "' is not in the graph");
  return degree_of_separation(g, *a, *b, max_depth);
}

DistanceReport intimacy_by_distance(const std::vector<DistanceQuestion>& questions,
                                    const MutualGraph& g, const PopularityFilter& filter,
                                    std::size_t bootstrap_n, std::uint64_t seed, int max_depth,
                                    std::size_t threads) {
  DistanceReport report;
  std::vector<const DistanceQuestion*> kept;
  for (const auto& q : questions) {
    if ((filter.drop_verified && q.recipient_verified) ||
        q.recipient_followers >= filter.follower_limit) {
      ++report.dropped_popular;
    } else if (q.asker == q.recipient) {
      ++report.dropped_self;
    } else {
      kept.push_back(&q);
    }
  }

  constexpr int kUnreachable = -1;
  std::vector<int> degree(kept.size(), kUnreachable);
  parallel_for(
      kept.size(),
      [&](std::size_t i) {
        const auto a = g.find(kept[i]->asker), b = g.find(kept[i]->recipient);
        if (!a || !b) return;
        const auto r = degree_of_separation(g, *a, *b, max_depth);
        if (r.degree) degree[i] = *r.degree;
      },
      threads);

  // Unreachable sorts last.
  std::map<int, std::vector<double>> grouped;
  for (std::size_t i = 0; i < kept.size(); ++i)
    grouped[degree[i] == kUnreachable ? std::numeric_limits<int>::max() : degree[i]].push_back(
        kept[i]->z);

  std::size_t index = 0;
  for (const auto& [deg, zs] : grouped) {
    DistanceBin bin;
    if (deg != std::numeric_limits<int>::max()) bin.degree = deg;
    bin.n = zs.size();
    bin.mean = analysis::mean(zs);
    bin.ci = analysis::bootstrap_mean_ci(zs, bootstrap_n, derive_seed(seed, index++));
    report.bins.push_back(bin);
  }
  return report;
}

std::string format_distance(const DistanceReport& report) {
  std::string out = "degree,mean,ci_low,ci_high,n\n";
  for (const auto& b : report.bins)
    out += csv::format_row({b.degree ? std::to_string(*b.degree) : "unreachable",
                            csv::format_double(b.mean), csv::format_double(b.ci.low),
                            csv::format_double(b.ci.high), std::to_string(b.n)});
  return out;
}

}  // namespace intimacy::graph
