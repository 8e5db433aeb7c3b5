// Copyright 2026 The Avalon Solver Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP front end of the lobby. Routes are listed in docs/protocol.md.

#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "avalon/service/session.hpp"
#include "httplib.h"

// <resolv.h>, pulled in by httplib, defines _res, which Eigen uses as a
// parameter name.
#undef _res

namespace avalon::service {

inline int HttpStatus(const std::string& code) {
  if (code == "unknown_game" || code == "unknown_token") return 404;
  if (code == "not_your_turn" || code == "seat_taken" || code == "already_submitted" || code == "game_over") {
    return 409;
  }
  if (code == "illegal_action") return 422;
  return 400;
}

class Server {
 public:
  explicit Server(Lobby& lobby) : lobby_(lobby) { Routes(); }

  ~Server() { Stop(); }

  // Binds to `port` (0 picks a free port) and serves on a background
  // thread. Returns the bound port.
  int Start(const std::string& host, int port) {
    const int bound = port == 0 ? http_.bind_to_any_port(host) : (http_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
    return bound;
  }

  // Serves on the calling thread until Stop().
  void Run(const std::string& host, int port) {
    if (!http_.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
  }

  void Stop() {
    stopping_ = true;
    http_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  static void Reply(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static Json ParseBody(const httplib::Request& req) {
    try {
      return Json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("bad_request", std::string("body is not JSON: ") + e.what());
    }
  }

  static std::uint64_t AfterParam(const httplib::Request& req) {
    if (!req.has_param("after")) return 0;
    try {
      return std::stoull(req.get_param_value("after"));
    } catch (const std::exception&) {
      throw ProtocolError("bad_request", "\"after\" must be a sequence number");
    }
  }

  template <typename Fn>
  static void Guard(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const ProtocolError& e) {
      Reply(res, ErrorMessage(e), HttpStatus(e.code()));
    } catch (const std::exception& e) {
      Reply(res, ErrorMessage("internal", e.what()), 500);
    }
  }

  void Routes() {
    http_.Get("/games", [this](const httplib::Request&, httplib::Response& res) {
      Guard(res, [&] { Reply(res, {{"kind", "ack"}, {"games", lobby_.List()}}); });
    });

    http_.Post("/games", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const Json body = ParseBody(req);
        if (body.value("kind", "") != "create") throw ProtocolError("bad_request", "expected a create message");
        const auto g = lobby_.Create(body);
        Reply(res, {{"kind", "ack"}, {"gameId", g->id()}, {"game", g->Summary()}});
      });
    });

    http_.Post(R"(/games/([^/]+)/join)", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const Json body = ParseBody(req);
        if (body.value("kind", "") != "join") throw ProtocolError("bad_request", "expected a join message");
        const auto g = lobby_.Find(req.matches[1]);
        std::optional<Seat> seat;
        if (!body.value("spectator", false)) {
          if (!body.contains("seat") || !body["seat"].is_number_integer()) {
            throw ProtocolError("bad_request", "join needs a seat or \"spectator\": true");
          }
          seat = body["seat"].get<int>();
        }
        const std::string token = g->Join(seat);
        Reply(res, {{"kind", "ack"}, {"gameId", g->id()}, {"token", token}, {"seat", seat ? Json(*seat) : Json()}});
      });
    });

    http_.Post(R"(/games/([^/]+)/act)", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const Json body = ParseBody(req);
        if (body.value("kind", "") != "act" || !body.contains("token") || !body.contains("action")) {
          throw ProtocolError("bad_request", "expected an act message with token and action");
        }
        Reply(res, lobby_.Submit(req.matches[1], body["token"].get<std::string>(), body["action"]));
      });
    });

    // Buffered messages after a sequence number (polling clients).
    http_.Get(R"(/games/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const auto g = lobby_.Find(req.matches[1]);
        const int audience = g->Audience(req.get_param_value("token"));
        Reply(res, {{"kind", "ack"}, {"messages", g->Messages(audience, AfterParam(req))}});
      });
    });

    // Server-sent events: hello, then every message after `after`, ending
    // with the reveal.
    http_.Get(R"(/games/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const auto g = lobby_.Find(req.matches[1]);
        const int audience = g->Audience(req.get_param_value("token"));
        const std::uint64_t after = AfterParam(req);
        auto cursor = std::make_shared<std::uint64_t>(after);
        auto hello_sent = std::make_shared<bool>(false);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [this, g, audience, cursor, hello_sent](size_t, httplib::DataSink& sink) {
              const auto send = [&](const Json& m) {
                const std::string frame = "data: " + m.dump() + "\n\n";
                return sink.write(frame.data(), frame.size());
              };
              if (!*hello_sent) {
                *hello_sent = true;
                const Json hello = {{"kind", "hello"},
                                    {"protocol", kProtocolVersion},
                                    {"gameId", g->id()},
                                    {"seat", audience == kSpectator ? Json() : Json(audience)},
                                    {"resumeAfter", *cursor}};
                return send(hello);
              }
              if (stopping_) {
                sink.done();
                return true;
              }
              const std::vector<Json> batch = g->WaitMessages(audience, *cursor, std::chrono::milliseconds(250));
              if (batch.empty() && g->terminal() && *cursor >= g->LastSeq(audience)) {
                sink.done();
                return true;
              }
              for (const Json& m : batch) {
                if (!send(m)) return false;
                *cursor = m["seq"].get<std::uint64_t>();
                if (m["kind"] == "reveal") {
                  sink.done();
                  return true;
                }
              }
              return sink.is_writable();
            });
      });
    });
  }

  Lobby& lobby_;
  httplib::Server http_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
};

}  // namespace avalon::service
