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

#pragma once

#include <bit>
#include <string>
#include <vector>

#include "avalon/observation.hpp"
#include "avalon/roles.hpp"
#include "avalon/types.hpp"

namespace avalon {

enum class Phase { kPropose, kVote, kMission, kAssassinate, kTerminal };

enum class Outcome {
  kNone,
  kSpyMissions,      // three missions failed
  kSpyRejections,    // fifth proposal of a round rejected
  kAssassination,    // three successes; winner depends on the pick
};

enum class Team { kResistance, kSpies };

inline const char* PhaseName(Phase p) {
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

// A node of the public game tree. Value type; Apply() returns the successor.
class PublicState {
 public:
  static PublicState Initial(Seat first_proposer) {
    AVALON_CHECK(first_proposer >= 0 && first_proposer < kNumSeats,
                 "bad proposer seat");
    PublicState h;
    h.proposer_ = first_proposer;
    return h;
  }

  // A proposal node reached with the given score, without its history.
  // Used as the root of a solve window.
  static PublicState SituationRoot(int succeeds, int fails, int proposal_num,
                                   Seat proposer) {
    AVALON_CHECK(succeeds >= 0 && succeeds < kMissionsToWin && fails >= 0 &&
                     fails < kMissionsToWin,
                 "situation score out of range");
    AVALON_CHECK(proposal_num >= 1 && proposal_num <= kMaxProposals,
                 "proposal number out of range");
    PublicState h = Initial(proposer);
    h.succeeds_ = succeeds;
    h.fails_ = fails;
    h.proposal_num_ = proposal_num;
    return h;
  }

  // The assassination node that follows a third success.
  static PublicState AssassinationRoot(int fails, Seat proposer) {
    PublicState h = SituationRoot(2, fails, 1, proposer);
    h.succeeds_ = kMissionsToWin;
    h.phase_ = Phase::kAssassinate;
    return h;
  }

  int succeeds() const { return succeeds_; }
  int fails() const { return fails_; }
  int proposal_num() const { return proposal_num_; }
  Seat proposer() const { return proposer_; }
  Phase phase() const { return phase_; }
  SeatMask team() const { return team_; }
  Outcome outcome() const { return outcome_; }
  Seat assassination_target() const { return target_; }
  Seat assassination_actor() const { return actor_; }
  const std::vector<Observation>& log() const { return log_; }

  int round() const { return succeeds_ + fails_; }
  int team_size() const { return kTeamSizes[round() < kNumRounds ? round() : 4]; }
  bool IsTerminal() const { return phase_ == Phase::kTerminal; }
  bool IsLastProposal() const { return proposal_num_ == kMaxProposals; }

  // Seats that act at this node (P'(h)).
  SeatMask MovingSeats() const {
    switch (phase_) {
      case Phase::kPropose:
        return SeatBit(proposer_);
      case Phase::kVote:
      case Phase::kAssassinate:
        return 0x1f;
      case Phase::kMission:
        return team_;
      case Phase::kTerminal:
        return 0;
    }
    return 0;
  }

  // Number of actions seat `seat` has from `local_index` at this node.
  // Seats that move but have no real choice have a single pass action.
  int ActionCount(Seat seat, int local_index) const {
    if (!HasSeat(MovingSeats(), seat)) return 0;
    switch (phase_) {
      case Phase::kPropose:
        return kNumTeams;
      case Phase::kVote:
        return 2;
      case Phase::kMission:
        return IsSpyInfoSet(local_index) ? 2 : 1;
      case Phase::kAssassinate:
        return KindOfInfoSet(local_index) == InfoSetKind::kAssassin ? 3 : 1;
      case Phase::kTerminal:
        return 0;
    }
    return 0;
  }

  int MaxActionCount() const {
    switch (phase_) {
      case Phase::kPropose:
        return kNumTeams;
      case Phase::kVote:
      case Phase::kMission:
        return 2;
      case Phase::kAssassinate:
        return 3;
      case Phase::kTerminal:
        return 0;
    }
    return 0;
  }

  // Throws ContractViolation when `o` cannot follow this node.
  void CheckLegal(const Observation& o) const {
    AVALON_CHECK(!IsTerminal(), "no observation follows a terminal state");
    struct Checker {
      const PublicState& h;
      void operator()(const ProposalMade& p) const {
        AVALON_CHECK(h.phase_ == Phase::kPropose, "proposal outside propose phase");
        AVALON_CHECK(std::popcount(p.team) == h.team_size() && p.team < 32,
                     "proposed team has the wrong size");
      }
      void operator()(const VoteResult& v) const {
        AVALON_CHECK(h.phase_ == Phase::kVote, "votes outside vote phase");
        AVALON_CHECK(v.approvals < 32, "vote mask out of range");
      }
      void operator()(const MissionResult& m) const {
        AVALON_CHECK(h.phase_ == Phase::kMission, "mission outside mission phase");
        AVALON_CHECK(m.team == h.team_, "mission team differs from approved team");
        AVALON_CHECK(m.fails >= 0 && m.fails <= 2 &&
                         m.fails <= std::popcount(m.team),
                     "fail count out of range");
        if (m.Attributed()) {
          AVALON_CHECK(m.fails == 1 && HasSeat(m.team, m.attributed),
                       "attribution requires one fail by a team member");
        }
      }
      void operator()(const AssassinPick& a) const {
        AVALON_CHECK(h.phase_ == Phase::kAssassinate, "pick outside assassination");
        AVALON_CHECK(a.actor >= 0 && a.actor < kNumSeats && a.target >= 0 &&
                         a.target < kNumSeats && a.actor != a.target,
                     "bad assassination seats");
      }
    };
    std::visit(Checker{*this}, o);
  }

  // Successor node. With record_log=false the observation is not appended,
  // which keeps solver trees light.
  PublicState Apply(const Observation& o, bool record_log = true) const {
    CheckLegal(o);
    PublicState n = *this;
    if (record_log) n.log_.push_back(o);
    struct Advance {
      PublicState& n;
      void operator()(const ProposalMade& p) const {
        n.team_ = p.team;
        n.phase_ = Phase::kVote;
      }
      void operator()(const VoteResult& v) const {
        if (v.Approved()) {
          n.phase_ = Phase::kMission;
          return;
        }
        n.team_ = 0;
        if (n.proposal_num_ == kMaxProposals) {
          n.phase_ = Phase::kTerminal;
          n.outcome_ = Outcome::kSpyRejections;
          return;
        }
        ++n.proposal_num_;
        n.proposer_ = (n.proposer_ + 1) % kNumSeats;
        n.phase_ = Phase::kPropose;
      }
      void operator()(const MissionResult& m) const {
        n.team_ = 0;
        n.proposal_num_ = 1;
        n.proposer_ = (n.proposer_ + 1) % kNumSeats;
        if (m.fails > 0) {
          ++n.fails_;
        } else {
          ++n.succeeds_;
        }
        if (n.fails_ == kMissionsToWin) {
          n.phase_ = Phase::kTerminal;
          n.outcome_ = Outcome::kSpyMissions;
        } else if (n.succeeds_ == kMissionsToWin) {
          n.phase_ = Phase::kAssassinate;
        } else {
          n.phase_ = Phase::kPropose;
        }
      }
      void operator()(const AssassinPick& a) const {
        n.actor_ = a.actor;
        n.target_ = a.target;
        n.phase_ = Phase::kTerminal;
        n.outcome_ = Outcome::kAssassination;
      }
    };
    std::visit(Advance{n}, o);
    return n;
  }

  // Copy without the observation log.
  PublicState WithoutLog() const {
    PublicState n = *this;
    n.log_.clear();
    return n;
  }

  friend bool operator==(const PublicState&, const PublicState&) = default;

 private:
  int succeeds_ = 0;
  int fails_ = 0;
  int proposal_num_ = 1;
  Seat proposer_ = 0;
  Phase phase_ = Phase::kPropose;
  SeatMask team_ = 0;
  Outcome outcome_ = Outcome::kNone;
  Seat actor_ = kNoSeat;
  Seat target_ = kNoSeat;
  std::vector<Observation> log_;
};

// Every observation with nonzero probability under some strategy and
// assignment. A single fail is split into one branch per team member.
inline std::vector<Observation> Observations(const PublicState& h) {
  AVALON_CHECK(!h.IsTerminal(), "terminal state has no observations");
  std::vector<Observation> out;
  switch (h.phase()) {
    case Phase::kPropose:
      for (SeatMask team : TeamsOfSize(h.team_size())) {
        out.emplace_back(ProposalMade{team});
      }
      break;
    case Phase::kVote:
      for (int v = 0; v < 32; ++v) {
        out.emplace_back(VoteResult{static_cast<SeatMask>(v)});
      }
      break;
    case Phase::kMission:
      out.emplace_back(MissionResult{h.team(), 0, kNoSeat});
      for (Seat s = 0; s < kNumSeats; ++s) {
        if (HasSeat(h.team(), s)) out.emplace_back(MissionResult{h.team(), 1, s});
      }
      out.emplace_back(MissionResult{h.team(), 2, kNoSeat});
      break;
    case Phase::kAssassinate:
      for (Seat actor = 0; actor < kNumSeats; ++actor) {
        for (Seat target = 0; target < kNumSeats; ++target) {
          if (target != actor) out.emplace_back(AssassinPick{actor, target});
        }
      }
      break;
    case Phase::kTerminal:
      break;
  }
  return out;
}

inline Team WinningTeam(const PublicState& h, const RoleAssignment& rho) {
  AVALON_CHECK(h.IsTerminal(), "winner of a non-terminal state");
  if (h.outcome() == Outcome::kAssassination) {
    return h.assassination_target() == rho.merlin ? Team::kSpies
                                                  : Team::kResistance;
  }
  return Team::kSpies;
}

// +1 if the seat's team wins under the assignment, -1 otherwise.
inline double TerminalUtility(const PublicState& h, const RoleAssignment& rho,
                              Seat seat) {
  const Team winner = WinningTeam(h, rho);
  const bool spy = rho.IsSpy(seat);
  return (winner == Team::kSpies) == spy ? 1.0 : -1.0;
}

// Replays a log from the initial state.
inline PublicState Replay(Seat first_proposer,
                          const std::vector<Observation>& log) {
  PublicState h = PublicState::Initial(first_proposer);
  for (const Observation& o : log) h = h.Apply(o);
  return h;
}

}  // namespace avalon
