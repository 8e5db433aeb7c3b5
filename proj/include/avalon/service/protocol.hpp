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

// Wire messages of the game service and the per-seat view builder. Field
// names are documented in docs/protocol.md.

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "avalon/belief.hpp"
#include "avalon/replay.hpp"
#include "avalon/roles.hpp"

namespace avalon::service {

inline constexpr int kProtocolVersion = 1;

// Protocol-level failure reported to the client as an "error" message.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& message, Json legal = nullptr)
      : std::runtime_error(message), code_(std::move(code)), legal_(std::move(legal)) {}
  const std::string& code() const { return code_; }
  const Json& legal() const { return legal_; }

 private:
  std::string code_;
  Json legal_;
};

inline Json ErrorMessage(const std::string& code, const std::string& message, const Json& legal = nullptr) {
  Json j = {{"kind", "error"}, {"code", code}, {"message", message}};
  if (!legal.is_null()) j["legal"] = legal;
  return j;
}

inline Json ErrorMessage(const ProtocolError& e) { return ErrorMessage(e.code(), e.what(), e.legal()); }

inline const char* PhaseWireName(Phase p) {
  switch (p) {
    case Phase::kPropose:
      return "propose";
    case Phase::kVote:
      return "vote";
    case Phase::kMission:
      return "mission";
    case Phase::kAssassinate:
      return "assassinate";
    case Phase::kTerminal:
      return "terminal";
  }
  return "?";
}

// Action index <-> wire action for `seat` at `h` under `rho`.
inline Json ActionToJson(const PublicState& h, const RoleAssignment& rho, int index) {
  switch (h.phase()) {
    case Phase::kPropose:
      return {{"type", "propose"}, {"team", SeatListJson(TeamsOfSize(h.team_size())[index])}};
    case Phase::kVote:
      return {{"type", "vote"}, {"approve", index == kApprove}};
    case Phase::kMission:
      return {{"type", "mission"}, {"fail", index == kFail}};
    case Phase::kAssassinate:
      return {{"type", "assassinate"},
              {"target", AssassinationCandidates(rho.assassin, rho.Partner(rho.assassin))[index]}};
    case Phase::kTerminal:
      break;
  }
  throw ContractViolation("no actions at a terminal state");
}

// Legal wire actions of `seat`. Empty when the seat has no real choice,
// except that every mission member submits a card.
inline Json LegalActions(const PublicState& h, const RoleAssignment& rho, Seat seat) {
  Json out = Json::array();
  const int n = h.ActionCount(seat, InfoSetIndex(seat, rho));
  if (n < 1 || (n == 1 && h.phase() != Phase::kMission)) return out;
  for (int a = 0; a < n; ++a) out.push_back(ActionToJson(h, rho, a));
  return out;
}

// Index of a wire action among the seat's legal actions.
inline int ActionFromJson(const PublicState& h, const RoleAssignment& rho, Seat seat, const Json& action) {
  const Json legal = LegalActions(h, rho, seat);
  if (legal.empty()) throw ProtocolError("not_your_turn", "seat " + std::to_string(seat) + " has no move now");
  Json normalized = action;
  if (action.is_object() && action.contains("team") && action["team"].is_array()) {
    try {
      normalized["team"] = SeatListJson(SeatListFromJson(action["team"]));
    } catch (const FormatError&) {
      // Left as sent; it will not match a legal action.
    }
  }
  for (size_t a = 0; a < legal.size(); ++a) {
    if (legal[a] == normalized) return static_cast<int>(a);
  }
  throw ProtocolError("illegal_action", "action is not legal here", legal);
}

// What a seat privately knows about roles.
inline Json PrivateKnowledge(Seat seat, const RoleAssignment& rho) {
  const std::string role = RoleName(seat, rho);
  Json j = {{"seat", seat}, {"role", role}};
  if (role == "merlin") {
    j["knownSpies"] = SeatListJson(rho.spies());
  } else if (role == "spy" || role == "assassin") {
    j["knownSpies"] = SeatListJson(rho.spies());
    j["knownAssassin"] = rho.assassin;
  }
  return j;
}

inline Json PublicStateJson(const PublicState& h, const std::vector<Observation>& log) {
  Json history = Json::array();
  for (const Observation& o : log) history.push_back(ObservationToJson(PublicPart(o)));
  Json j = {{"phase", PhaseWireName(h.phase())},
            {"round", h.round()},
            {"succeeds", h.succeeds()},
            {"fails", h.fails()},
            {"proposalNum", h.proposal_num()},
            {"proposer", h.proposer()},
            {"teamSize", h.team_size()},
            {"team", SeatListJson(h.team())},
            {"history", history}};
  return j;
}

struct ViewInput {
  std::string game_id;
  const PublicState* state = nullptr;
  const std::vector<Observation>* log = nullptr;  // public observations
  const RoleAssignment* rho = nullptr;
  std::optional<Seat> seat;             // empty for spectators
  bool submitted = false;               // this seat already acted here
  const JointBelief* belief = nullptr;  // public belief, when the panel is on
};

// The "state" message for one audience.
inline Json BuildStateMessage(const ViewInput& in) {
  Json j = {{"kind", "state"}, {"gameId", in.game_id}, {"public", PublicStateJson(*in.state, *in.log)}};
  if (in.seat) {
    j["you"] = PrivateKnowledge(*in.seat, *in.rho);
    j["legal"] = in.submitted ? Json::array() : LegalActions(*in.state, *in.rho, *in.seat);
    j["submitted"] = in.submitted;
  } else {
    j["you"] = nullptr;
    j["legal"] = Json::array();
  }
  if (in.belief != nullptr) {
    Json b = Json::array();
    for (double x : *in.belief) b.push_back(x);
    j["belief"] = b;
  }
  return j;
}

// The "reveal" message sent to everyone once the game ends.
inline Json BuildRevealMessage(const std::string& game_id, const PublicState& h, const RoleAssignment& rho) {
  Json roles = Json::array();
  for (Seat s = 0; s < kNumSeats; ++s) roles.push_back(RoleName(s, rho));
  return {{"kind", "reveal"},
          {"gameId", game_id},
          {"winner", WinningTeam(h, rho) == Team::kResistance ? "resistance" : "spies"},
          {"assignment", rho.index},
          {"roles", roles},
          {"spies", SeatListJson(rho.spies())},
          {"merlin", rho.merlin},
          {"assassin", rho.assassin}};
}

// Checks a transcript sent to `seat` (or to a spectator) for role
// information beyond what that audience may know before the game ends.
// Returns one description per violation.
inline std::vector<std::string> ScanForLeaks(const std::vector<Json>& transcript, std::optional<Seat> seat,
                                             int assignment) {
  std::vector<std::string> leaks;
  const auto forbidden_key = [](const std::string& k) {
    return k == "assignment" || k == "roles" || k == "spies" || k == "merlin" || k == "assassin" || k == "by" ||
           k == "role" || k == "knownSpies" || k == "knownAssassin";
  };
  // Keys anywhere except the seat's own "you" object.
  std::function<void(const Json&, const std::string&, size_t)> scan = [&](const Json& j, const std::string& path,
                                                                          size_t m) {
    if (j.is_object()) {
      for (const auto& [k, v] : j.items()) {
        if (path.empty() && k == "you") continue;
        if (forbidden_key(k)) leaks.push_back("message " + std::to_string(m) + ": key " + path + "/" + k);
        scan(v, path + "/" + k, m);
      }
    } else if (j.is_array()) {
      for (const Json& v : j) scan(v, path + "[]", m);
    }
  };
  for (size_t m = 0; m < transcript.size(); ++m) {
    const Json& msg = transcript[m];
    if (msg.value("kind", "") == "reveal") break;
    if (msg.contains("public") && msg["public"].value("phase", "") == "terminal") break;
    scan(msg, "", m);
    if (!msg.contains("you") || msg["you"].is_null()) continue;
    if (!seat) {
      leaks.push_back("message " + std::to_string(m) + ": spectator received private knowledge");
      continue;
    }
    // Every assignment the seat cannot tell apart from the truth must agree
    // with what the message says about roles.
    const Json& you = msg["you"];
    const int own = InfoSetOf(*seat, assignment);
    for (int r = 0; r < kNumAssignments; ++r) {
      if (InfoSetOf(*seat, r) != own) continue;
      const RoleAssignment rho = RoleAssignment::FromIndex(r);
      const std::string role = RoleName(*seat, rho);
      const std::string said = you.value("role", "");
      const bool sees_spies = role != "resistance";
      const bool sees_assassin = role == "spy" || role == "assassin";
      bool ok = you.value("seat", -1) == *seat && said == role;
      if (you.contains("knownSpies")) {
        ok = ok && sees_spies && SeatListFromJson(you["knownSpies"]) == rho.spies();
      }
      if (you.contains("knownAssassin")) ok = ok && sees_assassin && you["knownAssassin"] == rho.assassin;
      for (const auto& [k, v] : you.items()) {
        if (k != "seat" && k != "role" && k != "knownSpies" && k != "knownAssassin") ok = false;
      }
      if (!ok) {
        leaks.push_back("message " + std::to_string(m) + ": private view distinguishes assignment " +
                        std::to_string(r) + " from the truth");
        break;
      }
    }
  }
  return leaks;
}

}  // namespace avalon::service
