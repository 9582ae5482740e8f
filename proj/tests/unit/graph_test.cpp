#include <filesystem>
#include <set>

#include "doctest.h"
#include "intimacy/common/error.hpp"
#include "intimacy/common/io.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/graph.hpp"
#include "support/oracles.hpp"

using namespace intimacy;
using namespace intimacy::graph;

namespace {

std::vector<MentionEvent> events(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<MentionEvent> out;
  for (const auto& [a, b] : pairs) out.push_back({a, b, ""});
  return out;
}

std::set<std::pair<std::string, std::string>> edge_set(const MutualGraph& g) {
  std::set<std::pair<std::string, std::string>> out;
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (NodeId v : g.neighbors(u))
      if (u < v) out.insert(std::minmax(g.name(u), g.name(v)));
  return out;
}

std::vector<std::pair<std::string, std::string>> random_mentions(std::size_t nodes, std::size_t n,
                                                                 std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = "u" + std::to_string(pick(rng)), b = "u" + std::to_string(pick(rng));
    out.push_back({a, b});
    if (i % 2 == 0) out.push_back({b, a});
  }
  return out;
}

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("only reciprocated mentions become edges") {
  const auto g = MutualGraph::build(events({{"a", "b"}, {"b", "a"}, {"a", "c"}, {"d", "d"}}));
  CHECK(g.edge_count() == 1);
  CHECK(edge_set(g) == std::set<std::pair<std::string, std::string>>{{"a", "b"}});
  CHECK(MutualGraph::build({}).node_count() == 0);
}

TEST_CASE("edge set matches a hash-set reconciliation") {
  const auto raw = random_mentions(120, 1000, 3);
  const auto g = MutualGraph::build(events(raw));
  CHECK(edge_set(g) == oracle::reciprocated(raw));
}

TEST_CASE("adjacency is symmetric and sorted") {
  const auto g = MutualGraph::build(events(random_mentions(80, 600, 4)));
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto nb = g.neighbors(u);
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    for (NodeId v : nb) {
      CHECK(u != v);
      CHECK(g.has_edge(v, u));
    }
  }
}

TEST_CASE("adding events never removes edges") {
  auto raw = random_mentions(60, 300, 5);
  const auto before = edge_set(MutualGraph::build(events(raw)));
  const auto more = random_mentions(60, 300, 6);
  raw.insert(raw.end(), more.begin(), more.end());
  const auto after = edge_set(MutualGraph::build(events(raw)));
  CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
}

TEST_CASE("degree conventions") {
  const auto g = MutualGraph::build(
      events({{"u", "x"}, {"x", "u"}, {"x", "v"}, {"v", "x"}, {"v", "w"}, {"w", "v"}, {"z", "q"}, {"q", "z"}}));
  CHECK(degree_of_separation(g, "u", "x").degree == 0);
  CHECK(degree_of_separation(g, "u", "v").degree == 1);
  CHECK(degree_of_separation(g, "u", "w").degree == 2);
  CHECK_FALSE(degree_of_separation(g, "u", "z").reachable());
  CHECK_FALSE(degree_of_separation(g, "u", "w", 2).reachable());
  CHECK(degree_of_separation(g, "u", "w", 3).degree == 2);
  CHECK(code_of([&] { degree_of_separation(g, "u", "nobody"); }) == "unknown_node");
  CHECK(code_of([&] { degree_of_separation(g, "u", "u"); }) == "invalid_argument");
}

TEST_CASE("bidirectional search equals single-source BFS") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto raw = random_mentions(150, 300, 100 + seed);
    const auto g = MutualGraph::build(events(raw));
    const auto truth = oracle::reciprocated(raw);
    for (NodeId u = 0; u < g.node_count(); u += 3) {
      const auto dist = oracle::bfs_distances(truth, g.name(u));
      for (NodeId v = 0; v < g.node_count(); ++v) {
        if (u == v) continue;
        const auto r = degree_of_separation(g, u, v, 1000);
        const auto it = dist.find(g.name(v));
        if (it == dist.end()) {
          CHECK_FALSE(r.reachable());
        } else {
          REQUIRE(r.reachable());
          CHECK(*r.degree == it->second - 1);
        }
        CHECK(degree_of_separation(g, v, u, 1000).degree == r.degree);
      }
    }
  }
}

TEST_CASE("graph file round trip") {
  const auto g = MutualGraph::build(events(random_mentions(50, 400, 9)));
  const auto dir = std::filesystem::temp_directory_path() / "intimacy_graph_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "g.bin").string();
  g.save(path);
  const auto h = MutualGraph::load(path);
  CHECK(edge_set(h) == edge_set(g));
  CHECK(h.node_count() == g.node_count());
  io::atomic_write(path, "not a graph");
  CHECK_THROWS_AS(MutualGraph::load(path), Error);
}

TEST_CASE("popular recipients are filtered out") {
  const auto g = MutualGraph::build(events({{"a", "b"}, {"b", "a"}}));
  std::vector<DistanceQuestion> qs{{"a", "b", 0.5, 6000, false},
                                   {"a", "b", 0.1, 10, true},
                                   {"a", "b", 0.3, 10, false},
                                   {"a", "a", 0.3, 10, false}};
  const auto r = intimacy_by_distance(qs, g, {}, 100, 1);
  CHECK(r.dropped_popular == 2);
  CHECK(r.dropped_self == 1);
  REQUIRE(r.bins.size() == 1);
  CHECK(r.bins[0].n == 1);
  CHECK(r.bins[0].mean == doctest::Approx(0.3));
}

TEST_CASE("all pairs unreachable give a single bin") {
  const auto g = MutualGraph::build(events({{"a", "b"}, {"b", "a"}, {"c", "d"}, {"d", "c"}}));
  std::vector<DistanceQuestion> qs{{"a", "c", 0.1, 0, false}, {"b", "d", 0.2, 0, false},
                                   {"x", "y", 0.3, 0, false}};
  const auto r = intimacy_by_distance(qs, g, {}, 50, 1);
  REQUIRE(r.bins.size() == 1);
  CHECK_FALSE(r.bins[0].degree.has_value());
  CHECK(r.bins[0].n == 3);
  CHECK(format_distance(r).find("unreachable") != std::string::npos);
}

TEST_CASE("binned means reproduce a planted U shape") {
  // Chain u0 - u1 - ... - u5 so distances from u0 are known.
  std::vector<std::pair<std::string, std::string>> raw;
  for (int i = 0; i < 5; ++i) {
    raw.push_back({"u" + std::to_string(i), "u" + std::to_string(i + 1)});
    raw.push_back({"u" + std::to_string(i + 1), "u" + std::to_string(i)});
  }
  const auto g = MutualGraph::build(events(raw));
  const std::map<std::string, double> planted{{"u1", 0.8}, {"u2", 0.3}, {"u3", -0.5},
                                              {"u4", 0.0}, {"u5", 0.4}, {"stranger", 0.9}};
  Rng rng(5);
  std::normal_distribution<double> n(0, 0.05);
  std::vector<DistanceQuestion> qs;
  for (const auto& [to, z] : planted)
    for (int k = 0; k < 30; ++k) qs.push_back({"u0", to, z + n(rng), 0, false});
  const auto r = intimacy_by_distance(qs, g, {}, 200, 2);
  REQUIRE(r.bins.size() == 6);
  CHECK(r.bins[0].degree == 0);
  CHECK(r.bins[2].degree == 2);
  CHECK_FALSE(r.bins.back().degree.has_value());
  CHECK(r.bins[0].mean > r.bins[2].mean);
  CHECK(r.bins.back().mean > r.bins[2].mean);
  for (const auto& b : r.bins) {
    CHECK(b.n == 30);
    CHECK(b.ci.low <= b.mean);
    CHECK(b.ci.high >= b.mean);
  }
  CHECK(format_distance(r) == format_distance(intimacy_by_distance(qs, g, {}, 200, 2, 6, 3)));
}
