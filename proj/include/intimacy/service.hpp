#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "intimacy/bws.hpp"

namespace intimacy::service {

// Returns the timestamp recorded with sessions and judgments.
using Clock = std::function<std::string()>;
std::string utc_now();

struct SessionInfo {
  std::string session_id;
  std::string annotator_id;
  std::string tuple_set_id;
  std::size_t total = 0;
  std::size_t completed = 0;
  std::string created_at;
};

struct ServedItem {
  std::string id;
  std::string text;
};

struct NextTuple {
  bool done = false;
  std::string tuple_id;
  std::size_t position = 0;  // 0-based cursor
  std::size_t total = 0;
  std::array<ServedItem, 4> items;      // display order
  std::array<int, 4> display_order{};   // items[k] is tuple item display_order[k]
};

// Tuple sets live in data_dir/<set_id>/ as tuples.csv (the bws tuple format)
// plus an optional questions.csv (id,text). Each set keeps an append-only
// journal.jsonl of sessions and judgments that is fsynced before a request is
// acknowledged and replayed on startup.
class Store {
 public:
  explicit Store(std::string data_dir, std::uint64_t seed = 0, Clock clock = utc_now);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::vector<std::string> tuple_sets() const;

  SessionInfo create_session(const std::string& annotator_id, const std::string& tuple_set_id);
  // Idempotent until the current tuple is judged.
  NextTuple next(const std::string& session_id) const;
  SessionInfo submit(const std::string& session_id, const std::string& tuple_id,
                     const std::string& best, const std::string& worst);
  SessionInfo progress(const std::string& session_id) const;
  // Judgment file in the bws judgment format, in journal order.
  std::string export_judgments(const std::string& tuple_set_id) const;

 private:
  struct TupleSet;
  struct Session;

  void load_set(const std::string& id);
  void replay(TupleSet& set);
  void append(TupleSet& set, const std::string& line);
  const Session& session(const std::string& id) const;
  SessionInfo info(const Session& s) const;

  std::string data_dir_;
  std::uint64_t seed_;
  Clock clock_;
  std::size_t next_session_ = 1;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<TupleSet>> sets_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string instructions;
};

// HTTP+JSON front end:
//   POST /sessions                     {"annotator_id","tuple_set_id"} -> 201
//   GET  /sessions/{id}/next
//   POST /sessions/{id}/judgments      {"tuple_id","best","worst"}
//   GET  /sessions/{id}/progress
//   GET  /tuple-sets                   set ids
//   GET  /tuple-sets/{id}/export       text/csv
//   GET  /instructions                 text/plain
// Errors are {"error": code, "detail": text} with 400, 404, 409 or 422.
class Server {
 public:
  Server(Store& store, ServerOptions options);
  ~Server();

  // Binds and returns the bound port; throws io_error on failure.
  int bind();
  // Blocks until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace intimacy::service
