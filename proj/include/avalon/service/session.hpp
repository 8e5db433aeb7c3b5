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

// Game sessions and the lobby. A session owns one game: the deal, the
// agents, pending submissions, the outgoing message log of every audience
// (five seats and spectators) and an append-only journal from which it can
// be rebuilt after a crash.
//
// Journal (<dir>/<gameId>.jsonl), one JSON object per line:
//   {"kind":"create","gameId":..,"config":{..},"assignment":..,"firstProposer":..}
//   {"kind":"join","seat":k,"token":".."}
//   {"kind":"obs","obs":{..}}          resolved observation, attributed
// Finished games are appended to <dir>/completed.jsonl as game records
// with an extra "gameId" and "lineup".

#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "avalon/agents/lineup.hpp"
#include "avalon/eval/match.hpp"
#include "avalon/service/protocol.hpp"

namespace avalon::service {

inline constexpr int kSpectator = kNumSeats;  // audience index of spectators

struct GameConfig {
  std::array<std::optional<AgentSpec>, kNumSeats> seats;  // empty = human
  std::uint64_t seed = 0;
  bool belief_panel = false;

  int humans() const {
    int n = 0;
    for (const auto& s : seats) n += s ? 0 : 1;
    return n;
  }

  Json ToJson() const {
    Json list = Json::array();
    for (const auto& s : seats) list.push_back(s ? s->ToString() : "human");
    return {{"seats", list}, {"seed", seed}, {"beliefPanel", belief_panel}};
  }

  // Parses the body of a "create" message. Missing seed and belief panel
  // take the given defaults.
  static GameConfig FromJson(const Json& j, std::uint64_t default_seed, bool default_panel) {
    GameConfig c;
    c.seed = default_seed;
    c.belief_panel = default_panel;
    try {
      const Json& seats = j.at("seats");
      if (!seats.is_array() || seats.size() != kNumSeats) {
        throw ProtocolError("bad_config", "\"seats\" must list exactly 5 entries");
      }
      for (int s = 0; s < kNumSeats; ++s) {
        const std::string text = seats[s].get<std::string>();
        if (text != "human") c.seats[s] = ParseAgentSpec(text);
      }
      if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("beliefPanel")) c.belief_panel = j["beliefPanel"].get<bool>();
    } catch (const ConfigError& e) {
      throw ProtocolError("bad_config", e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("bad_config", std::string("malformed create message: ") + e.what());
    }
    return c;
  }
};

inline std::string NewToken(std::mt19937_64& rng) {
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(16) << rng();
  return out.str();
}

class GameSession {
 public:
  // Starts a new game and journals it under `dir` (no journal when empty).
  GameSession(std::string id, const GameConfig& config, const AgentContext& ctx, std::string dir)
      : GameSession(std::move(id), config, ctx, std::move(dir), DealFor(config.seed, 0), true) {}

  // Rebuilds a game from its journal.
  static std::unique_ptr<GameSession> Recover(const std::string& path, const AgentContext& ctx) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open journal " + path);
    std::vector<Json> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        lines.push_back(Json::parse(line));
      } catch (const nlohmann::json::exception&) {
        // A torn final write; everything before it is intact.
        if (in.peek() == std::char_traits<char>::eof()) break;
        throw FormatError(path + ": corrupt journal line");
      }
    }
    if (lines.empty() || lines[0].value("kind", "") != "create") throw FormatError(path + ": missing create line");
    const Json& h = lines[0];
    std::unique_ptr<GameSession> g;
    try {
      const GameConfig config = GameConfig::FromJson(h.at("config"), 0, false);
      const MatchDeal deal{h.at("assignment").get<int>(), h.at("firstProposer").get<int>()};
      if (deal.assignment < 0 || deal.assignment >= kNumAssignments || deal.first_proposer < 0 ||
          deal.first_proposer >= kNumSeats) {
        throw FormatError(path + ": deal out of range");
      }
      g.reset(new GameSession(h.at("gameId").get<std::string>(), config, ctx, "", deal, false));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ": " + e.what());
    } catch (const ProtocolError& e) {
      throw FormatError(path + ": " + e.what());
    }
    std::lock_guard<std::mutex> lock(g->mu_);
    for (size_t k = 1; k < lines.size(); ++k) {
      const Json& j = lines[k];
      const std::string kind = j.value("kind", "");
      try {
        if (kind == "join") {
          g->tokens_[j.at("token").get<std::string>()] = j.at("seat").get<int>();
        } else if (kind == "obs") {
          g->ApplyLocked(ObservationFromJson(j.at("obs")));
        } else {
          throw FormatError(path + ": unknown journal entry " + kind);
        }
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
      } catch (const ContractViolation& e) {
        throw FormatError(path + ": journal does not replay: " + e.what());
      }
    }
    g->journal_path_ = path;
    return g;
  }

  const std::string& id() const { return id_; }
  const GameConfig& config() const { return config_; }
  int assignment() const { return rho_.index; }

  bool terminal() const {
    std::lock_guard<std::mutex> lock(mu_);
    return state_.IsTerminal();
  }

  PublicState state() const {
    std::lock_guard<std::mutex> lock(mu_);
    return state_;
  }

  std::vector<Observation> public_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_;
  }

  // Claims a human seat, or a spectator slot when `seat` is empty.
  // Returns the token.
  std::string Join(std::optional<Seat> seat) {
    std::lock_guard<std::mutex> lock(mu_);
    int audience = kSpectator;
    if (seat) {
      if (*seat < 0 || *seat >= kNumSeats) throw ProtocolError("bad_request", "seat out of range");
      if (config_.seats[*seat]) throw ProtocolError("seat_taken", "seat is played by an agent");
      for (const auto& [t, a] : tokens_) {
        if (a == *seat) throw ProtocolError("seat_taken", "seat already joined");
      }
      audience = *seat;
    }
    const std::string token = NewToken(token_rng_);
    tokens_[token] = audience;
    Journal({{"kind", "join"}, {"seat", audience}, {"token", token}});
    return token;
  }

  // Audience of a token: a seat, or kSpectator.
  int Audience(const std::string& token) const {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = tokens_.find(token);
    if (it == tokens_.end()) throw ProtocolError("unknown_token", "unknown session token");
    return it->second;
  }

  // Records a human action. Resolves the node when nothing else is pending
  // from humans and agents have already moved (see RunAgents).
  Json Submit(const std::string& token, const Json& action) {
    const int audience = Audience(token);
    std::lock_guard<std::mutex> lock(mu_);
    if (audience == kSpectator) throw ProtocolError("not_your_turn", "spectators cannot act");
    if (state_.IsTerminal()) throw ProtocolError("game_over", "the game has ended");
    const Seat seat = audience;
    const int index = ActionFromJson(state_, rho_, seat, action);
    Json ack = {{"kind", "ack"}, {"gameId", id_}, {"step", log_.size()}};
    if (pending_[seat]) {
      if (*pending_[seat] != index) {
        throw ProtocolError("already_submitted", "a different action was already submitted here",
                            Json::array({ActionToJson(state_, rho_, *pending_[seat])}));
      }
      ack["duplicate"] = true;
      return ack;
    }
    pending_[seat] = index;
    ack["duplicate"] = false;
    TryResolveLocked();
    return ack;
  }

  // Lets agents move until a human must act or the game ends.
  void RunAgents() {
    std::lock_guard<std::mutex> lock(mu_);
    while (!state_.IsTerminal()) {
      for (Seat s = 0; s < kNumSeats; ++s) {
        if (!agents_[s] || pending_[s]) continue;
        const int n = state_.ActionCount(s, InfoSetIndex(s, rho_));
        if (n <= 1) continue;
        std::mt19937_64 rng = MatchRng(config_.seed, log_.size() + 1, static_cast<std::uint64_t>(s));
        const int a = agents_[s]->ChooseAction(n, rng);
        AVALON_CHECK(a >= 0 && a < n, agents_[s]->name() + " chose an illegal action");
        pending_[s] = a;
      }
      if (!TryResolveLocked()) break;
    }
  }

  // Human seats that still have to act at the current node.
  std::vector<Seat> AwaitedHumans() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<Seat> out;
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (!agents_[s] && !pending_[s] && !state_.IsTerminal() && !LegalActions(state_, rho_, s).empty()) {
        out.push_back(s);
      }
    }
    return out;
  }

  // Messages for an audience with sequence number > after.
  std::vector<Json> Messages(int audience, std::uint64_t after) const {
    std::lock_guard<std::mutex> lock(mu_);
    return MessagesLocked(audience, after);
  }

  // Like Messages, but waits up to `timeout` for at least one.
  std::vector<Json> WaitMessages(int audience, std::uint64_t after, std::chrono::milliseconds timeout) const {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return outbox_[audience].size() > after; });
    return MessagesLocked(audience, after);
  }

  std::uint64_t LastSeq(int audience) const {
    std::lock_guard<std::mutex> lock(mu_);
    return outbox_[audience].size();
  }

  Json Summary() const {
    std::lock_guard<std::mutex> lock(mu_);
    Json open = Json::array();
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (config_.seats[s]) continue;
      bool taken = false;
      for (const auto& [t, a] : tokens_) taken = taken || a == s;
      if (!taken) open.push_back(s);
    }
    return {{"gameId", id_},
            {"config", config_.ToJson()},
            {"phase", PhaseWireName(state_.phase())},
            {"openSeats", open},
            {"step", log_.size()}};
  }

 private:
  GameSession(std::string id, GameConfig config, const AgentContext& ctx, std::string dir, MatchDeal deal,
              bool journal)
      : id_(std::move(id)),
        config_(std::move(config)),
        rho_(RoleAssignment::FromIndex(deal.assignment)),
        first_proposer_(deal.first_proposer),
        state_(PublicState::Initial(deal.first_proposer)),
        token_rng_(std::random_device{}()) {
    std::vector<AgentSpec> specs;
    for (const auto& s : config_.seats) {
      if (s) specs.push_back(*s);
    }
    std::vector<std::unique_ptr<Agent>> made;
    try {
      made = MakeAgents(specs, ctx);
    } catch (const ConfigError& e) {
      throw ProtocolError("bad_config", e.what());
    }
    size_t k = 0;
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (!config_.seats[s]) continue;
      agents_[s] = std::move(made[k++]);
      agents_[s]->Reset(InfoSetId{s, InfoSetIndex(s, rho_)}, first_proposer_);
    }
    if (config_.belief_panel) {
      if (ctx.nets) {
        panel_ = std::make_unique<DeepRoleAgent>(kDefaultDeepRoleIterations, ctx.nets);
        panel_->Reset(InfoSetId{0, InfoSetIndex(0, rho_)}, first_proposer_);
      }
      logical_.Reset(UniformBelief());
    }
    if (journal && !dir.empty()) {
      std::filesystem::create_directories(dir);
      journal_path_ = (std::filesystem::path(dir) / (id_ + ".jsonl")).string();
      Journal({{"kind", "create"},
               {"gameId", id_},
               {"config", config_.ToJson()},
               {"assignment", rho_.index},
               {"firstProposer", first_proposer_}});
    }
    PushStateLocked();
  }

  std::vector<Json> MessagesLocked(int audience, std::uint64_t after) const {
    AVALON_CHECK(audience >= 0 && audience <= kSpectator, "bad audience");
    const auto& box = outbox_[audience];
    if (after >= box.size()) return {};
    return std::vector<Json>(box.begin() + static_cast<std::ptrdiff_t>(after), box.end());
  }

  void Journal(const Json& j) {
    if (journal_path_.empty()) return;
    std::ofstream out(journal_path_, std::ios::app);
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot write journal " + journal_path_);
  }

  // Resolves the node when every seat with a choice has an action.
  bool TryResolveLocked() {
    if (state_.IsTerminal()) return false;
    JointAction joint{};
    for (Seat s = 0; s < kNumSeats; ++s) {
      const bool needs = agents_[s] ? state_.ActionCount(s, InfoSetIndex(s, rho_)) > 1
                                    : !LegalActions(state_, rho_, s).empty();
      if (!needs) continue;
      if (!pending_[s]) return false;
      joint[s] = *pending_[s];
    }
    const Observation split = ResolveActions(state_, joint, rho_);
    Journal({{"kind", "obs"}, {"obs", ObservationToJson(split)}});
    ApplyLocked(split);
    return true;
  }

  void ApplyLocked(const Observation& split) {
    const Observation pub = PublicPart(split);
    state_.CheckLegal(pub);
    for (auto& a : agents_) {
      if (a) a->Observe(pub);
    }
    if (panel_) panel_->Observe(pub);
    if (config_.belief_panel) logical_.ObserveLogical(pub);
    full_log_.push_back(split);
    log_.push_back(pub);
    state_ = state_.Apply(pub, false);
    pending_ = {};
    PushStateLocked();
    if (state_.IsTerminal()) {
      const Json reveal = BuildRevealMessage(id_, state_, rho_);
      for (int a = 0; a <= kSpectator; ++a) Push(a, reveal);
      WriteCompleted();
    }
  }

  void Push(int audience, Json msg) {
    msg["seq"] = outbox_[audience].size() + 1;
    outbox_[audience].push_back(std::move(msg));
    cv_.notify_all();
  }

  void PushStateLocked() {
    const JointBelief* belief = nullptr;
    if (config_.belief_panel) belief = panel_ ? &panel_->belief() : &logical_.belief();
    for (int a = 0; a <= kSpectator; ++a) {
      ViewInput in;
      in.game_id = id_;
      in.state = &state_;
      in.log = &log_;
      in.rho = &rho_;
      if (a != kSpectator) in.seat = a;
      in.belief = belief;
      Push(a, BuildStateMessage(in));
    }
  }

  void WriteCompleted() {
    if (journal_path_.empty()) return;
    Json rec = GameRecordToJson(GameRecord{config_.seed, rho_.index, first_proposer_, log_});
    rec["gameId"] = id_;
    rec["lineup"] = config_.ToJson()["seats"];
    const auto path = std::filesystem::path(journal_path_).parent_path() / "completed.jsonl";
    std::ofstream out(path, std::ios::app);
    out << rec.dump() << '\n';
  }

  std::string id_;
  GameConfig config_;
  RoleAssignment rho_;
  Seat first_proposer_;
  PublicState state_;
  std::vector<Observation> log_;       // public
  std::vector<Observation> full_log_;  // attributed
  std::array<std::unique_ptr<Agent>, kNumSeats> agents_;
  std::unique_ptr<DeepRoleAgent> panel_;
  BeliefTracker logical_;
  std::array<std::optional<int>, kNumSeats> pending_{};
  std::map<std::string, int> tokens_;
  std::array<std::vector<Json>, kNumSeats + 1> outbox_;
  std::string journal_path_;
  std::mt19937_64 token_rng_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
};

struct LobbyConfig {
  std::string dir;  // journal directory; empty disables persistence
  AgentContext agents;
  bool belief_panel_default = false;
  int agent_workers = 1;  // 0 runs agent turns inline
};

// Registry of sessions plus the workers that run agent turns off the
// request path.
class Lobby {
 public:
  explicit Lobby(LobbyConfig config) : config_(std::move(config)) {
    for (int w = 0; w < config_.agent_workers; ++w) workers_.emplace_back([this] { WorkerLoop(); });
  }

  ~Lobby() {
    {
      std::lock_guard<std::mutex> lock(queue_mu_);
      stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  // Rebuilds every journaled game. Returns the number recovered.
  int Recover() {
    if (config_.dir.empty() || !std::filesystem::exists(config_.dir)) return 0;
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(config_.dir)) {
      const auto& p = entry.path();
      if (p.extension() != ".jsonl" || p.filename() == "completed.jsonl") continue;
      std::shared_ptr<GameSession> g = GameSession::Recover(p.string(), config_.agents);
      {
        std::unique_lock lock(mu_);
        next_id_ = std::max(next_id_, IdNumber(g->id()) + 1);
        games_[g->id()] = g;
      }
      Schedule(g);
      ++n;
    }
    return n;
  }

  std::shared_ptr<GameSession> Create(const Json& create) {
    GameConfig cfg = GameConfig::FromJson(create, 0, config_.belief_panel_default);
    std::string id;
    {
      std::unique_lock lock(mu_);
      id = FormatId(next_id_++);
    }
    if (!create.contains("seed")) cfg.seed = std::random_device{}();
    auto g = std::make_shared<GameSession>(id, cfg, config_.agents, config_.dir);
    {
      std::unique_lock lock(mu_);
      games_[id] = g;
    }
    Schedule(g);
    return g;
  }

  std::shared_ptr<GameSession> Find(const std::string& id) const {
    std::shared_lock lock(mu_);
    const auto it = games_.find(id);
    if (it == games_.end()) throw ProtocolError("unknown_game", "no game " + id);
    return it->second;
  }

  Json List() const {
    std::shared_lock lock(mu_);
    Json out = Json::array();
    for (const auto& [id, g] : games_) out.push_back(g->Summary());
    return out;
  }

  Json Submit(const std::string& id, const std::string& token, const Json& action) {
    auto g = Find(id);
    Json ack = g->Submit(token, action);
    Schedule(g);
    return ack;
  }

  // Runs agent turns now (inline mode) or on a worker.
  void Schedule(const std::shared_ptr<GameSession>& g) {
    if (workers_.empty()) {
      g->RunAgents();
      return;
    }
    {
      std::lock_guard<std::mutex> lock(queue_mu_);
      queue_.push_back(g);
    }
    queue_cv_.notify_one();
  }

  // Blocks until the agent queue is empty and no worker is busy.
  void Drain() {
    std::unique_lock<std::mutex> lock(queue_mu_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && busy_ == 0; });
  }

  const LobbyConfig& config() const { return config_; }

 private:
  static std::string FormatId(std::uint64_t n) {
    std::ostringstream out;
    out << "g" << std::setw(6) << std::setfill('0') << n;
    return out.str();
  }

  static std::uint64_t IdNumber(const std::string& id) {
    if (id.size() < 2 || id[0] != 'g') return 0;
    try {
      return std::stoull(id.substr(1));
    } catch (const std::exception&) {
      return 0;
    }
  }

  void WorkerLoop() {
    for (;;) {
      std::shared_ptr<GameSession> g;
      {
        std::unique_lock<std::mutex> lock(queue_mu_);
        queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        g = std::move(queue_.front());
        queue_.pop_front();
        ++busy_;
      }
      try {
        g->RunAgents();
      } catch (const std::exception&) {
        // The game stays where it was; clients see no further progress.
      }
      {
        std::lock_guard<std::mutex> lock(queue_mu_);
        --busy_;
      }
      idle_cv_.notify_all();
    }
  }

  LobbyConfig config_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<GameSession>> games_;
  std::uint64_t next_id_ = 1;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::shared_ptr<GameSession>> queue_;
  int busy_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace avalon::service
