#include "doctest.h"
// Eigen (via the harness) must precede httplib: <resolv.h> defines a _res macro.
#include "support/cli_harness.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("intimacy_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Creates a session, judges every tuple (first displayed best, last worst) and
// returns the export.
std::string drive_session(int port) {
  httplib::Client c("127.0.0.1", port);
  auto res = c.Post("/sessions", R"({"annotator_id":"ann","tuple_set_id":"set1"})",
                    "application/json");
  REQUIRE(res);
  const auto sid = json::parse(res->body)["session_id"].get<std::string>();
  for (;;) {
    const auto next = json::parse(c.Get("/sessions/" + sid + "/next")->body);
    if (next["done"]) break;
    json body{{"tuple_id", next["tuple_id"]},
              {"best", next["items"][0]["id"]},
              {"worst", next["items"][3]["id"]}};
    REQUIRE(c.Post("/sessions/" + sid + "/judgments", body.dump(), "application/json")->status == 200);
  }
  return c.Get("/tuple-sets/set1/export")->body;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch("usage");
  const auto log = (dir / "log.txt").string();
  const auto judgments = (dir / "j.csv").string();
  intimacy::io::atomic_write(judgments, std::string(intimacy::bws::kJudgmentHeader) + "\n");
  CHECK(cli::run({"score", "--judgments", judgments, "--out", (dir / "s.csv").string(),
                  "--no-such-flag"},
                 log) == 2);
  CHECK(cli::slurp(log).find("--no-such-flag") != std::string::npos);
  CHECK(cli::slurp(log).find("Usage:") != std::string::npos);
  CHECK(cli::run({}, log) == 2);
  CHECK(cli::run({"frobnicate"}, log) == 2);
  CHECK(cli::run({"--help"}, log) == 0);
}

TEST_CASE("every subcommand documents its output") {
  const auto dir = scratch("help");
  const auto log = (dir / "log.txt").string();
  for (const char* sub : {"extract", "tuples", "serve", "score", "reliability", "train", "predict",
                          "evaluate", "analyze-markers", "analyze-dyads", "analyze-anonymity",
                          "graph-build", "graph-distance", "analyze-distance"}) {
    CHECK(cli::run({sub, "--help"}, log) == 0);
    const auto help = cli::slurp(log);
    const bool documented = help.find("Output") != std::string::npos ||
                            help.find("Endpoints") != std::string::npos;
    CHECK_MESSAGE(documented, sub);
  }
}

TEST_CASE("runtime errors exit with 1") {
  const auto dir = scratch("runtime");
  const auto log = (dir / "log.txt").string();
  CHECK(cli::run({"analyze-markers", "--input", (dir / "missing.csv").string(), "--lexicon",
                  cli::kData + "/hedges.txt", "--out", (dir / "o.csv").string()},
                 log) == 1);
  CHECK(cli::slurp(log).rfind("error:", 0) == 0);
  CHECK_FALSE(fs::exists(dir / "o.csv"));
}

TEST_CASE("markers on the shipped corpus match the checked-in output") {
  const auto dir = scratch("markers");
  REQUIRE(cli::run({"analyze-markers", "--input", cli::kFixtures + "/markers_corpus.csv",
                    "--lexicon", cli::kData + "/hedges.txt", "--out", (dir / "m.csv").string()}) ==
          0);
  CHECK(cli::slurp(dir / "m.csv") == cli::slurp(cli::kFixtures + "/markers_golden.csv"));
  CHECK(fs::exists(dir / "m.csv.config.toml"));
}

TEST_CASE("batch subcommands are byte-for-byte reproducible") {
  const auto w = scratch("determinism_in");
  cli::write_inputs(w);
  const auto o = fs::temp_directory_path() / "intimacy_cli_determinism_out";
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(o);
    fs::create_directories(o);
    for (const auto& inv : cli::invocations(w, o)) {
      const auto log = (w / (inv.name + ".log")).string();
      const int code = cli::run(inv.args, log);
      CHECK_MESSAGE(code == 0, inv.name << ": " << cli::slurp(log));
    }
    const auto snap = cli::snapshot(o);
    if (pass == 0) {
      first = snap;
      CHECK(first.size() >= 25);
    } else {
      CHECK(snap.size() == first.size());
      for (const auto& [name, content] : first) CHECK_MESSAGE(snap.count(name) == 1, name);
      for (const auto& [name, content] : first)
        if (snap.count(name)) CHECK_MESSAGE(snap.at(name) == content, name);
    }
  }
  const auto scores = cli::slurp(o / "scores.csv");
  CHECK(scores.rfind("item_id,score\n", 0) == 0);
}

TEST_CASE("serve journals are reproducible with a logical clock") {
  const auto root = scratch("serve");
  std::vector<std::string> exports, journals;
  for (int pass = 0; pass < 2; ++pass) {
    const auto data = root / ("data" + std::to_string(pass));
    fs::create_directories(data / "set1");
    std::vector<std::string> ids;
    for (int i = 0; i < 12; ++i) ids.push_back(synth::item_name(i));
    intimacy::io::atomic_write((data / "set1" / "tuples.csv").string(),
                               intimacy::bws::format_tuples(intimacy::bws::generate_tuples(ids, 4, 2)));
    const auto run = cli::start_serve(data, root / "port", (root / "serve.log").string());
    REQUIRE(run.port > 0);
    exports.push_back(drive_session(run.port));
    CHECK(cli::stop_serve(run) == 0);
    journals.push_back(cli::slurp(data / "set1" / "journal.jsonl"));
  }
  CHECK(exports[0] == exports[1]);
  CHECK(journals[0] == journals[1]);
  CHECK(journals[0].find("seq-") != std::string::npos);
}
