#pragma once

// Drives the intimacy executable end to end: writes a seeded input workspace,
// runs every subcommand, and snapshots the files each run produces.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "intimacy/bws.hpp"
#include "intimacy/common/csv.hpp"
#include "intimacy/common/io.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/reliability.hpp"
#include "support/synthetic.hpp"

namespace cli {

namespace fs = std::filesystem;

inline const std::string kBinary = INTIMACY_CLI_PATH;
inline const std::string kData = INTIMACY_DATA_DIR;
inline const std::string kFixtures = INTIMACY_FIXTURES;

inline pid_t spawn(const std::vector<std::string>& args, const std::string& log) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(kBinary.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const pid_t pid = fork();
  if (pid == 0) {
    const int fd = open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      dup2(fd, 1);
      dup2(fd, 2);
    }
    execv(kBinary.c_str(), argv.data());
    _exit(127);
  }
  return pid;
}

inline int wait_exit(pid_t pid) {
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Exit code of one invocation; output goes to `log`.
inline int run(const std::vector<std::string>& args, const std::string& log = "/dev/null") {
  return wait_exit(spawn(args, log));
}

inline std::string slurp(const fs::path& p) { return intimacy::io::read_file(p.string()); }

// Every regular file under dir, keyed by relative path.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

// Seeded inputs for every subcommand.
inline void write_inputs(const fs::path& w) {
  using intimacy::csv::format_double;
  using intimacy::csv::format_row;
  fs::create_directories(w);
  auto put = [&](const std::string& name, const std::string& content) {
    intimacy::io::atomic_write((w / name).string(), content);
  };

  const auto world = synth::uniform_world(60, 1);
  std::string items = "id,text\n", scores = "item_id,score\n";
  for (const auto& id : world.ids) {
    items += format_row({id, "What is question " + id + " about?"});
    scores += format_row({id, format_double(world.truth.at(id))});
  }
  put("items.csv", items);
  put("scores.csv", scores);
  const auto tuples = intimacy::bws::generate_tuples(world.ids, 12, 1);
  auto judged = synth::simulate_bws(tuples, world.truth, 4.0, 2, "ann1");
  const auto second = synth::simulate_bws(tuples, world.truth, 4.0, 3, "ann2");
  judged.insert(judged.end(), second.begin(), second.end());
  put("judgments.csv", intimacy::bws::format_judgments(judged));

  const auto plan = intimacy::reliability::sample_validation_pairs(world.truth, 10, 10, 0.1, 4);
  intimacy::Rng rng(5);
  std::uniform_int_distribution<int> coin(0, 2);
  std::string pairs = "pair_id,qa_id,qb_id,model_gap,annotator_id,label\n";
  for (const auto& p : plan)
    for (const char* a : {"h1", "h2"}) {
      const auto label = p.model_gap >= 0.2 ? intimacy::reliability::PairLabel::kAMore
                                            : static_cast<intimacy::reliability::PairLabel>(coin(rng));
      pairs += format_row({p.pair_id, p.question_a, p.question_b, format_double(p.model_gap), a,
                           intimacy::reliability::to_string(label)});
    }
  put("pairs.csv", pairs);

  std::string labeled = "id,text,score\n", external = "question_id,score\n";
  std::normal_distribution<double> noise(0.0, 0.2);
  for (const auto& q : synth::linear_signal_corpus(300, 8, 6)) {
    labeled += format_row({q.id, q.text, format_double(q.score)});
    external += format_row({q.id, format_double(q.score + noise(rng))});
  }
  put("labeled.csv", labeled);
  put("external.csv", external);

  const auto dyads = synth::simulate_regression(synth::dyad_spec(), 7);
  std::string dy = "domain,author_gender,author_id,book_id,speaker_gender,audience_gender,score\n";
  for (std::size_t i = 0; i < dyads.y.size(); ++i) {
    const auto& g = dyads.groups[i];
    const std::string author_gender = (std::stoi(g[0].substr(1)) % 2) ? "M" : "F";
    dy += format_row({"book", author_gender, g[0], g[0] + g[1], dyads.focal[i].substr(0, 1),
                      dyads.focal[i].substr(1, 1), format_double(dyads.y[i])});
  }
  put("dyads.csv", dy);

  const std::map<std::string, std::vector<std::string>> usernames{
      {"anonymous", {"throwaway_acct", "anon42", "anonymous_dog", "throwaway1234"}},
      {"name_containing", {"SamIsCool", "TomLovesPie", "JessicaRuns"}},
      {"depersonalized", {"atomiccyle", "quietriver", "blue_lantern"}},
      {"other", {"cooldude1994", "maga_fan", "bigbob88"}}};
  const auto anon = synth::simulate_regression(synth::anonymity_spec(), 8);
  std::string an = "username,subreddit,score\n";
  for (std::size_t i = 0; i < anon.y.size(); ++i) {
    const auto& pool = usernames.at(anon.focal[i]);
    an += format_row({pool[i % pool.size()], anon.groups[i][0], format_double(anon.y[i])});
  }
  put("anonymity.csv", an);

  std::uniform_int_distribution<int> user(0, 79);
  std::string events = "from,to,timestamp\n", gpairs = "asker,recipient\n",
              distq = "asker,recipient,score,recipient_followers,recipient_verified\n";
  for (int i = 0; i < 400; ++i) {
    const auto a = "u" + std::to_string(user(rng)), b = "u" + std::to_string(user(rng));
    events += format_row({a, b, "2020-01-" + std::to_string(1 + i % 28)});
    if (i % 2 == 0) events += format_row({b, a, "2020-02-01"});
  }
  std::normal_distribution<double> z(0.0, 1.0);
  for (int i = 0; i < 150; ++i) {
    const auto a = "u" + std::to_string(user(rng)), b = "u" + std::to_string(user(rng));
    gpairs += format_row({a, b});
    distq += format_row({a, b, format_double(z(rng)), std::to_string(i % 10 == 0 ? 6000 : 40),
                         i % 17 == 0 ? "true" : "false"});
  }
  put("events.csv", events);
  put("graph_pairs.csv", gpairs);
  put("distance_questions.csv", distq);
}

struct Invocation {
  std::string name;
  std::vector<std::string> args;
};

// Every batch subcommand, reading from workspace w and writing under o.
inline std::vector<Invocation> invocations(const fs::path& w, const fs::path& o) {
  auto in = [&](const char* f) { return (w / f).string(); };
  auto out = [&](const char* f) { return (o / f).string(); };
  return {
      {"extract",
       {"extract", "--input", kFixtures + "/raw_items.jsonl", "--mention-names",
        kFixtures + "/mention_names.tsv", "--out", out("questions.jsonl"), "--rejected",
        out("rejected.jsonl")}},
      {"tuples",
       {"tuples", "--items", in("items.csv"), "--out", out("tuples.csv"), "--questions-out",
        out("service_questions.csv"), "--seed", "3"}},
      {"score", {"score", "--judgments", in("judgments.csv"), "--out", out("scores.csv")}},
      {"reliability",
       {"reliability", "--judgments", in("judgments.csv"), "--out", out("reliability.txt"),
        "--resamples", "20", "--seed", "1", "--pairs", in("pairs.csv"), "--bins-out",
        out("validation_bins.csv"), "--sample-pairs", in("scores.csv"), "--plan-out",
        out("pair_plan.csv"), "--bins", "5", "--per-bin", "4"}},
      {"train",
       {"train", "--data", in("labeled.csv"), "--out", out("ridge.json"), "--split",
        out("split.csv"), "--seed", "2"}},
      {"train-lda",
       {"train", "--data", in("labeled.csv"), "--out", out("lda.json"), "--kind", "lda_ridge",
        "--split", out("split.csv"), "--topics", "5", "--lda-iterations", "30",
        "--infer-iterations", "10", "--seed", "2"}},
      {"predict",
       {"predict", "--model", out("lda.json"), "--input", in("labeled.csv"), "--out",
        out("predictions.csv")}},
      {"evaluate",
       {"evaluate", "--data", in("labeled.csv"), "--split", out("split.csv"), "--out",
        out("comparison.csv"), "--baselines", "--topic-sweep", "3,5", "--topics", "5",
        "--lda-iterations", "30", "--infer-iterations", "10", "--external", in("external.csv"),
        "--predictions", out("predictions.csv")}},
      {"analyze-markers",
       {"analyze-markers", "--input", kFixtures + "/markers_corpus.csv", "--lexicon",
        kData + "/hedges.txt", "--lexicon", kData + "/swears.txt", "--out", out("markers.csv"),
        "--bootstrap", "200"}},
      {"analyze-dyads",
       {"analyze-dyads", "--input", in("dyads.csv"), "--out-dir", out("dyads"), "--bootstrap",
        "50"}},
      {"analyze-anonymity",
       {"analyze-anonymity", "--input", in("anonymity.csv"), "--out-dir", out("anonymity"),
        "--bootstrap", "50"}},
      {"graph-build", {"graph-build", "--events", in("events.csv"), "--out", out("graph.bin")}},
      {"graph-distance",
       {"graph-distance", "--graph", out("graph.bin"), "--pairs", in("graph_pairs.csv"), "--out",
        out("distances.csv")}},
      {"analyze-distance",
       {"analyze-distance", "--graph", out("graph.bin"), "--questions",
        in("distance_questions.csv"), "--out", out("distance_bins.csv"), "--bootstrap", "100"}},
  };
}

// The service on a free port with a logical clock; the port is read back from
// the port file once it is listening.
struct ServeRun {
  pid_t pid = -1;
  int port = 0;
};

inline ServeRun start_serve(const fs::path& data_dir, const fs::path& port_file,
                            const std::string& log) {
  fs::remove(port_file);
  ServeRun r;
  r.pid = spawn({"serve", "--data-dir", data_dir.string(), "--port", "0", "--clock", "logical",
                 "--seed", "4", "--port-file", port_file.string()},
                log);
  for (int i = 0; i < 500 && !fs::exists(port_file); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  if (fs::exists(port_file)) r.port = std::stoi(slurp(port_file));
  return r;
}

inline int stop_serve(const ServeRun& r) {
  kill(r.pid, SIGTERM);
  return wait_exit(r.pid);
}

}  // namespace cli
