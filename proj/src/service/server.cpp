#include "httplib.h"
#include "intimacy/common/error.hpp"
#include "intimacy/service.hpp"
#include "json.hpp"

using nlohmann::json;

namespace intimacy::service {

namespace {

int status_for(const std::string& code) {
  if (code == "unknown_session" || code == "unknown_tuple_set") return 404;
  if (code == "out_of_order") return 409;
  if (code == "invalid_judgment") return 422;
  if (code == "io_error") return 500;
  return 400;
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& detail) {
  res.status = status;
  res.set_content(json{{"error", code}, {"detail", detail}}.dump(), "application/json");
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json session_json(const SessionInfo& s) {
  return {{"session_id", s.session_id},     {"annotator_id", s.annotator_id},
          {"tuple_set_id", s.tuple_set_id}, {"total", s.total},
          {"completed", s.completed},       {"done", s.completed >= s.total},
          {"created_at", s.created_at}};
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object())
    throw Error("bad_request", "request body must be a JSON object");
  return body;
}

std::string field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || !it->is_string())
    throw Error("bad_request", std::string("missing string field '") + name + "'");
  return it->get<std::string>();
}

// Wraps a handler so contract errors map onto HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal_error", e.what());
    }
  };
}

}  // namespace

struct Server::Impl {
  Store& store;
  ServerOptions options;
  httplib::Server http;
  int port = 0;

  Impl(Store& s, ServerOptions o) : store(s), options(std::move(o)) { routes(); }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto s =
                    store.create_session(field(body, "annotator_id"), field(body, "tuple_set_id"));
                send_json(res, 201, session_json(s));
              }));

    http.Get(R"(/sessions/([^/]+)/next)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto n = store.next(req.matches[1]);
               json body = {{"done", n.done}, {"position", n.position}, {"total", n.total}};
               if (!n.done) {
                 body["tuple_id"] = n.tuple_id;
                 body["display_order"] = n.display_order;
                 json items = json::array();
                 for (const auto& item : n.items) items.push_back({{"id", item.id}, {"text", item.text}});
                 body["items"] = items;
               }
               send_json(res, 200, body);
             }));

    http.Post(R"(/sessions/([^/]+)/judgments)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto s = store.submit(req.matches[1], field(body, "tuple_id"),
                                            field(body, "best"), field(body, "worst"));
                auto out = session_json(s);
                out["accepted"] = true;
                send_json(res, 200, out);
              }));

    http.Get(R"(/sessions/([^/]+)/progress)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, session_json(store.progress(req.matches[1])));
             }));

    http.Get("/tuple-sets", guarded([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, json{{"tuple_sets", store.tuple_sets()}});
             }));

    http.Get(R"(/tuple-sets/([^/]+)/export)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               res.set_content(store.export_judgments(req.matches[1]), "text/csv");
             }));

    http.Get("/instructions", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(options.instructions, "text/plain; charset=utf-8");
    });
  }
};

Server::Server(Store& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
  } else if (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0)
    throw Error("io_error", "cannot bind " + impl_->options.host + ":" +
                                std::to_string(impl_->options.port));
  return impl_->port;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace intimacy::service
