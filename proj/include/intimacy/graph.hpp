#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "intimacy/analysis/stats.hpp"

namespace intimacy::graph {

struct MentionEvent {
  std::string from;
  std::string to;
  std::string timestamp;
};

// from,to[,timestamp]; an optional header row is skipped.
std::vector<MentionEvent> read_mention_events(const std::string& path);

using NodeId = std::uint32_t;

// Undirected graph over users who mentioned each other. Node ids follow the
// sorted order of user names; adjacency lists are sorted.
class MutualGraph {
 public:
  static MutualGraph build(const std::vector<MentionEvent>& events);

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return targets_.size() / 2; }
  std::optional<NodeId> find(std::string_view name) const;
  const std::string& name(NodeId id) const { return names_[id]; }
  std::span<const NodeId> neighbors(NodeId id) const;
  bool has_edge(NodeId u, NodeId v) const;

  void save(const std::string& path) const;
  static MutualGraph load(const std::string& path);

 private:
  void index_names();

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> ids_;
  std::vector<std::uint64_t> offsets_;  // node_count + 1
  std::vector<NodeId> targets_;
};

struct DistanceResult {
  std::optional<int> degree;  // path length in edges minus one; nullopt if unreachable
  bool reachable() const { return degree.has_value(); }
};

// Bidirectional BFS. Paths longer than max_depth edges count as unreachable.
DistanceResult degree_of_separation(const MutualGraph& g, NodeId u, NodeId v, int max_depth = 6);
DistanceResult degree_of_separation(const MutualGraph& g, std::string_view u, std::string_view v,
                                    int max_depth = 6);

struct DistanceQuestion {
  std::string asker;
  std::string recipient;
  double z = 0.0;
  long long recipient_followers = 0;
  bool recipient_verified = false;
};

struct PopularityFilter {
  long long follower_limit = 5000;  // recipients with at least this many are dropped
  bool drop_verified = true;
};

struct DistanceBin {
  std::optional<int> degree;  // nullopt = unreachable
  std::size_t n = 0;
  double mean = 0.0;
  analysis::Interval ci;
};

struct DistanceReport {
  std::vector<DistanceBin> bins;  // ascending degree, unreachable last
  std::size_t dropped_popular = 0;
  std::size_t dropped_self = 0;
};

// Users absent from the graph have no mutual ties, so their pairs land in the
// unreachable bin.
DistanceReport intimacy_by_distance(const std::vector<DistanceQuestion>& questions,
                                    const MutualGraph& g, const PopularityFilter& filter = {},
                                    std::size_t bootstrap_n = 1000, std::uint64_t seed = 0,
                                    int max_depth = 6, std::size_t threads = 0);

// degree,mean,ci_low,ci_high,n
std::string format_distance(const DistanceReport& report);

}  // namespace intimacy::graph
