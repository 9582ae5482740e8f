#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/service.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace intimacy::service {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Store::TupleSet {
  std::string id;
  std::vector<bws::Tuple4> tuples;
  std::map<std::string, std::size_t> tuple_index;
  std::map<std::string, std::string> texts;
  std::string journal_path;
  int fd = -1;
  std::vector<bws::JudgedTuple> judgments;  // journal order
};

struct Store::Session {
  std::string id;
  std::string annotator_id;
  TupleSet* set = nullptr;
  std::vector<std::size_t> order;  // indices into set->tuples
  std::size_t cursor = 0;
  std::string created_at;
};

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

// Same permutation every time the tuple at `cursor` is served to this session.
std::array<int, 4> display_permutation(const std::string& session_id, std::size_t cursor) {
  std::array<int, 4> p{0, 1, 2, 3};
  Rng rng(derive_seed(fnv1a(session_id), cursor));
  for (int i = 3; i > 0; --i) std::swap(p[i], p[rng() % static_cast<std::uint64_t>(i + 1)]);
  return p;
}

std::string session_id_for(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%06zu", n);
  return buf;
}

}  // namespace

Store::Store(std::string data_dir, std::uint64_t seed, Clock clock)
    : data_dir_(std::move(data_dir)), seed_(seed), clock_(std::move(clock)) {
  if (!fs::is_directory(data_dir_)) throw Error("io_error", data_dir_ + " is not a directory");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(data_dir_))
    if (entry.is_directory() && fs::exists(entry.path() / "tuples.csv"))
      ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) load_set(id);
}

Store::~Store() {
  for (auto& [_, set] : sets_)
    if (set->fd >= 0) ::close(set->fd);
}

void Store::load_set(const std::string& id) {
  auto set = std::make_unique<TupleSet>();
  set->id = id;
  const fs::path dir = fs::path(data_dir_) / id;
  set->tuples = bws::read_tuples((dir / "tuples.csv").string());
  for (std::size_t i = 0; i < set->tuples.size(); ++i)
    set->tuple_index[set->tuples[i].tuple_id] = i;
  if (fs::exists(dir / "questions.csv")) {
    const auto table = csv::read_file((dir / "questions.csv").string());
    const auto qid = table.column("id"), qtext = table.column("text");
    for (const auto& row : table.rows) set->texts[row[qid]] = row[qtext];
  }
  set->journal_path = (dir / "journal.jsonl").string();
  replay(*set);
  set->fd = ::open(set->journal_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (set->fd < 0)
    throw Error("io_error", "cannot open " + set->journal_path + ": " + std::strerror(errno));
  sets_[id] = std::move(set);
}

void Store::replay(TupleSet& set) {
  std::ifstream in(set.journal_path);
  if (!in) return;
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception&) {
      // A torn final line is a write that was never acknowledged.
      if (i + 1 == lines.size()) break;
      throw Error("parse_error", set.journal_path + ":" + std::to_string(i + 1) + ": bad record");
    }
    const auto type = j.at("type").get<std::string>();
    if (type == "session") {
      auto s = std::make_unique<Session>();
      s->id = j.at("session_id").get<std::string>();
      s->annotator_id = j.at("annotator_id").get<std::string>();
      s->created_at = j.at("created_at").get<std::string>();
      s->set = &set;
      s->order = j.at("order").get<std::vector<std::size_t>>();
      std::size_t n = 0;
      std::sscanf(s->id.c_str(), "s%zu", &n);
      next_session_ = std::max(next_session_, n + 1);
      sessions_[s->id] = std::move(s);
    } else if (type == "judgment") {
      auto& s = *sessions_.at(j.at("session_id").get<std::string>());
      const auto& tuple = set.tuples.at(s.order.at(s.cursor));
      bws::Judgment judgment{tuple.tuple_id, j.at("best").get<std::string>(),
                             j.at("worst").get<std::string>(), s.annotator_id,
                             j.at("received_at").get<std::string>()};
      set.judgments.push_back({tuple, judgment});
      ++s.cursor;
    }
  }
}

void Store::append(TupleSet& set, const std::string& line) {
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const auto n = ::write(set.fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("io_error", "journal write failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(set.fd) != 0)
    throw Error("io_error", "journal fsync failed: " + std::string(std::strerror(errno)));
}

std::vector<std::string> Store::tuple_sets() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sets_) out.push_back(id);
  return out;
}

const Store::Session& Store::session(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown_session", "no session '" + id + "'");
  return *it->second;
}

SessionInfo Store::info(const Session& s) const {
  return {s.id, s.annotator_id, s.set->id, s.order.size(), s.cursor, s.created_at};
}

SessionInfo Store::create_session(const std::string& annotator_id,
                                  const std::string& tuple_set_id) {
  if (annotator_id.empty()) throw Error("invalid_argument", "annotator_id is required");
  std::unique_lock lock(mutex_);
  auto it = sets_.find(tuple_set_id);
  if (it == sets_.end())
    throw Error("unknown_tuple_set", "no tuple set '" + tuple_set_id + "'");
  auto& set = *it->second;

  auto s = std::make_unique<Session>();
  const std::size_t number = next_session_;
  s->id = session_id_for(number);
  s->annotator_id = annotator_id;
  s->set = &set;
  s->created_at = clock_();
  s->order.resize(set.tuples.size());
  std::iota(s->order.begin(), s->order.end(), std::size_t{0});
  Rng rng(derive_seed(seed_, number));
  std::shuffle(s->order.begin(), s->order.end(), rng);

  json rec = {{"type", "session"},         {"session_id", s->id},
              {"annotator_id", annotator_id}, {"tuple_set", set.id},
              {"order", s->order},         {"created_at", s->created_at}};
  append(set, rec.dump());
  ++next_session_;
  const auto out = info(*s);
  sessions_[s->id] = std::move(s);
  return out;
}

NextTuple Store::next(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  const auto& s = session(session_id);
  NextTuple out;
  out.total = s.order.size();
  out.position = s.cursor;
  if (s.cursor >= s.order.size()) {
    out.done = true;
    return out;
  }
  const auto& tuple = s.set->tuples[s.order[s.cursor]];
  out.tuple_id = tuple.tuple_id;
  out.display_order = display_permutation(s.id, s.cursor);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& id = tuple.items[static_cast<std::size_t>(out.display_order[k])];
    auto t = s.set->texts.find(id);
    out.items[k] = {id, t == s.set->texts.end() ? id : t->second};
  }
  return out;
}

SessionInfo Store::submit(const std::string& session_id, const std::string& tuple_id,
                          const std::string& best, const std::string& worst) {
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error("unknown_session", "no session '" + session_id + "'");
  auto& s = *it->second;
  if (s.cursor >= s.order.size())
    throw Error("out_of_order", "session '" + session_id + "' is already complete");
  const auto& tuple = s.set->tuples[s.order[s.cursor]];
  if (tuple_id != tuple.tuple_id)
    throw Error("out_of_order", "expected tuple '" + tuple.tuple_id + "', got '" + tuple_id + "'");

  bws::Judgment judgment{tuple.tuple_id, best, worst, s.annotator_id, clock_()};
  bws::expand_pairs(judgment, tuple);  // throws invalid_judgment

  const auto display = display_permutation(s.id, s.cursor);
  json rec = {{"type", "judgment"}, {"session_id", s.id},  {"tuple_id", tuple.tuple_id},
              {"best", best},       {"worst", worst},      {"display_order", display},
              {"received_at", judgment.timestamp}};
  append(*s.set, rec.dump());
  s.set->judgments.push_back({tuple, judgment});
  ++s.cursor;
  return info(s);
}

SessionInfo Store::progress(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  return info(session(session_id));
}

std::string Store::export_judgments(const std::string& tuple_set_id) const {
  std::shared_lock lock(mutex_);
  auto it = sets_.find(tuple_set_id);
  if (it == sets_.end())
    throw Error("unknown_tuple_set", "no tuple set '" + tuple_set_id + "'");
  return bws::format_judgments(it->second->judgments);
}

}  // namespace intimacy::service
