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

// Fuzzed service games: random mixes of humans and agents, where the human
// seats send a mix of legal, illegal, duplicate and out-of-turn actions.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "avalon/service/session.hpp"

namespace avalon::testing {

struct FuzzedGame {
  std::shared_ptr<service::GameSession> session;
  std::vector<std::string> tokens;  // by audience; empty for agent seats
  int rejected = 0;
  int accepted = 0;
};

inline Json RandomJunkAction(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 7);
  switch (pick(rng)) {
    case 0:
      return {{"type", "propose"}, {"team", {pick(rng) % 6, pick(rng) % 6}}};
    case 1:
      return {{"type", "vote"}, {"approve", pick(rng) % 2 == 0}};
    case 2:
      return {{"type", "mission"}, {"fail", true}};
    case 3:
      return {{"type", "assassinate"}, {"target", pick(rng) - 1}};
    case 4:
      return "approve";
    case 5:
      return {{"type", "propose"}, {"team", {0, 0}}};
    case 6:
      return Json::object();
    default:
      return {{"type", "mission"}, {"fail", false}};
  }
}

inline FuzzedGame PlayFuzzedGame(service::Lobby& lobby, std::mt19937_64& rng, bool allow_deeprole = false) {
  const std::vector<std::string> kinds =
      allow_deeprole ? std::vector<std::string>{"random", "logic", "deeprole:1"}
                     : std::vector<std::string>{"random", "logic", "ismcts:4"};
  Json seats = Json::array();
  for (int s = 0; s < kNumSeats; ++s) {
    const int k = std::uniform_int_distribution<int>(0, static_cast<int>(kinds.size()))(rng);
    seats.push_back(k == static_cast<int>(kinds.size()) ? "human" : kinds[k]);
  }
  FuzzedGame f;
  f.session = lobby.Create({{"kind", "create"}, {"seats", seats}, {"seed", rng()}});
  f.tokens.assign(kNumSeats + 1, "");
  for (Seat s = 0; s < kNumSeats; ++s) {
    if (seats[s] == "human") f.tokens[s] = f.session->Join(s);
  }
  f.tokens[service::kSpectator] = f.session->Join(std::nullopt);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int step = 0; step < 5000 && !f.session->terminal(); ++step) {
    const int audience = std::uniform_int_distribution<int>(0, kNumSeats)(rng);
    if (f.tokens[audience].empty()) continue;
    Json action;
    const auto msgs = f.session->Messages(audience, 0);
    const Json& legal = msgs.back()["legal"];
    if (u(rng) < 0.7 && !legal.empty()) {
      action = legal[std::uniform_int_distribution<size_t>(0, legal.size() - 1)(rng)];
    } else {
      action = RandomJunkAction(rng);
    }
    try {
      lobby.Submit(f.session->id(), f.tokens[audience], action);
      ++f.accepted;
    } catch (const service::ProtocolError&) {
      ++f.rejected;
    }
  }
  return f;
}

}  // namespace avalon::testing
