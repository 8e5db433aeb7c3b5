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

// Runs one game between five agents. The runner is the only party that
// knows the assignment; agents see their own information set and public
// observations.

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avalon/agents/agent.hpp"
#include "avalon/replay.hpp"

namespace avalon {

struct MatchDeal {
  int assignment = 0;
  Seat first_proposer = 0;
};

inline std::mt19937_64 MatchRng(std::uint64_t seed, std::uint64_t game, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(game), static_cast<std::uint32_t>(game >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// Uniform role deal and first proposer for game `game` of a run.
inline MatchDeal DealFor(std::uint64_t seed, std::uint64_t game) {
  std::mt19937_64 rng = MatchRng(seed, game, 99);
  MatchDeal d;
  d.assignment = std::uniform_int_distribution<int>(0, kNumAssignments - 1)(rng);
  d.first_proposer = std::uniform_int_distribution<int>(0, kNumSeats - 1)(rng);
  return d;
}

struct MatchRecord {
  std::vector<std::string> lineup;  // agent name by seat
  std::uint64_t seed = 0;
  std::uint64_t game = 0;
  MatchDeal deal;
  Team winner = Team::kSpies;
  std::array<bool, kNumSeats> won{};
  std::vector<Observation> log;  // public observations

  GameRecord Record() const { return GameRecord{seed, deal.assignment, deal.first_proposer, log}; }
};

// Plays a full game. Seat k is driven by agents[k] with its own random
// stream, so two runs with the same (seed, game) and agents replay exactly.
inline MatchRecord PlayMatch(const std::vector<Agent*>& agents, std::uint64_t seed, std::uint64_t game,
                             const MatchDeal& deal) {
  AVALON_CHECK(agents.size() == kNumSeats, "a match needs five agents");
  const RoleAssignment rho = RoleAssignment::FromIndex(deal.assignment);
  std::array<std::mt19937_64, kNumSeats> rngs;
  for (Seat s = 0; s < kNumSeats; ++s) {
    rngs[s] = MatchRng(seed, game, static_cast<std::uint64_t>(s));
    agents[s]->Reset(InfoSetId{s, InfoSetIndex(s, rho)}, deal.first_proposer);
  }
  MatchRecord rec;
  rec.seed = seed;
  rec.game = game;
  rec.deal = deal;
  for (Agent* a : agents) rec.lineup.push_back(a->name());
  PublicState h = PublicState::Initial(deal.first_proposer);
  while (!h.IsTerminal()) {
    JointAction actions{};
    const SeatMask movers = h.MovingSeats();
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (!HasSeat(movers, s)) continue;
      const int n = h.ActionCount(s, InfoSetIndex(s, rho));
      if (n <= 1) continue;
      actions[s] = agents[s]->ChooseAction(n, rngs[s]);
      AVALON_CHECK(actions[s] >= 0 && actions[s] < n, agents[s]->name() + " chose an illegal action");
    }
    const Observation split = ResolveActions(h, actions, rho);
    const Observation pub = PublicPart(split);
    for (Agent* a : agents) a->Observe(pub);
    rec.log.push_back(pub);
    h = h.Apply(pub, false);
  }
  rec.winner = WinningTeam(h, rho);
  for (Seat s = 0; s < kNumSeats; ++s) rec.won[s] = TerminalUtility(h, rho, s) > 0.0;
  return rec;
}

}  // namespace avalon
