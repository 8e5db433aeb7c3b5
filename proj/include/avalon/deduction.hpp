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

#include <array>
#include <bit>
#include <cstdint>

#include "avalon/observation.hpp"
#include "avalon/public_state.hpp"
#include "avalon/roles.hpp"
#include "avalon/types.hpp"

namespace avalon {

inline constexpr int kInconsistent = -1;

// Private action indices.
inline constexpr int kReject = 0;
inline constexpr int kApprove = 1;
inline constexpr int kSucceed = 0;
inline constexpr int kFail = 1;
inline constexpr int kPass = 0;

// For each moving seat and each of its information sets, the action that
// seat must have taken to produce an observation, or kInconsistent.
struct Deduction {
  SeatMask movers = 0;
  PerInfoSet<std::int8_t> action{};

  int ActionOf(Seat seat, int local_index) const {
    return action[seat][local_index];
  }
  bool Consistent(Seat seat, int local_index) const {
    return action[seat][local_index] != kInconsistent;
  }
};

namespace detail {

inline void FillSeat(Deduction& d, Seat seat, int value) {
  d.action[seat].fill(static_cast<std::int8_t>(value));
}

inline void DeduceMission(const MissionResult& m, Deduction& d) {
  for (Seat s = 0; s < kNumSeats; ++s) {
    if (!HasSeat(m.team, s)) continue;
    for (int local = 0; local < kNumInfoSets; ++local) {
      int a = kSucceed;
      if (!IsSpyInfoSet(local)) {
        // Resistance cards are always successes.
        const bool must_fail =
            (m.fails == 1 && m.attributed == s) || (m.fails == 2);
        const bool may_resist = m.fails == 2 && std::popcount(m.team) == 3;
        a = must_fail && !may_resist ? kInconsistent : kSucceed;
      } else if (m.fails == 0) {
        a = kSucceed;
      } else if (m.fails == 1) {
        a = m.attributed == s ? kFail : kSucceed;
      } else {
        // Two fails need both spies on the team, and both failed.
        const SeatMask known = KnownSpies(s, local);
        a = (known & m.team) == known ? kFail : kInconsistent;
      }
      d.action[s][local] = static_cast<std::int8_t>(a);
    }
  }
}

inline void DeduceAssassination(const AssassinPick& p, Deduction& d) {
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      const bool assassin = KindOfInfoSet(local) == InfoSetKind::kAssassin;
      int a = kPass;
      if (s == p.actor) {
        if (!assassin) {
          a = kInconsistent;
        } else {
          const Seat partner = OtherSeatAt(s, local - 11);
          const auto candidates = AssassinationCandidates(s, partner);
          a = kInconsistent;
          for (int k = 0; k < 3; ++k) {
            if (candidates[k] == p.target) a = k;
          }
        }
      } else if (assassin) {
        a = kInconsistent;
      }
      d.action[s][local] = static_cast<std::int8_t>(a);
    }
  }
}

}  // namespace detail

// Per-seat deduction of private actions from a (possibly branch-split)
// observation. Non-moving seats are left at 0 and must be ignored.
inline Deduction DeduceActions(const PublicState& h, const Observation& o) {
  h.CheckLegal(o);
  Deduction d;
  d.movers = h.MovingSeats();
  if (const auto* p = std::get_if<ProposalMade>(&o)) {
    detail::FillSeat(d, h.proposer(), TeamIndex(p->team));
  } else if (const auto* v = std::get_if<VoteResult>(&o)) {
    for (Seat s = 0; s < kNumSeats; ++s) {
      detail::FillSeat(d, s, v->ApprovedBy(s) ? kApprove : kReject);
    }
  } else if (const auto* m = std::get_if<MissionResult>(&o)) {
    AVALON_CHECK(m->fails != 1 || m->Attributed(),
                 "a single fail must be branch-split before deduction");
    detail::DeduceMission(*m, d);
  } else {
    detail::DeduceAssassination(std::get<AssassinPick>(o), d);
  }
  return d;
}

// Whether `rho` can produce the observation at all. Public (unattributed)
// single fails are accepted when any spy is on the team.
inline bool ObservationConsistent(const Observation& o, int rho) {
  if (const auto* m = std::get_if<MissionResult>(&o)) {
    const int spies_on_team = std::popcount(
        static_cast<unsigned>(SpiesOf(rho) & m->team));
    if (spies_on_team < m->fails) return false;
    if (m->Attributed() && !IsSpyIn(m->attributed, rho)) return false;
    return true;
  }
  if (const auto* p = std::get_if<AssassinPick>(&o)) {
    return AssassinOf(rho) == p->actor;
  }
  return true;
}

inline AssignmentMask ObservationMask(const Observation& o) {
  AssignmentMask mask;
  for (int r = 0; r < kNumAssignments; ++r) {
    if (ObservationConsistent(o, r)) mask.set(r);
  }
  return mask;
}

// Joint private choices of all seats at one node, by seat.
using JointAction = std::array<int, kNumSeats>;

// The branch-split observation produced when seats play `actions` under
// `rho`. Entries for non-moving seats are ignored.
inline Observation ResolveActions(const PublicState& h, const JointAction& actions,
                                  const RoleAssignment& rho) {
  switch (h.phase()) {
    case Phase::kPropose:
      return ProposalMade{TeamsOfSize(h.team_size()).at(actions[h.proposer()])};
    case Phase::kVote: {
      SeatMask approvals = 0;
      for (Seat s = 0; s < kNumSeats; ++s) {
        AVALON_CHECK(actions[s] == kReject || actions[s] == kApprove,
                     "vote must be approve or reject");
        if (actions[s] == kApprove) approvals |= SeatBit(s);
      }
      return VoteResult{approvals};
    }
    case Phase::kMission: {
      MissionResult m{h.team(), 0, kNoSeat};
      for (Seat s = 0; s < kNumSeats; ++s) {
        if (!HasSeat(h.team(), s) || actions[s] != kFail) continue;
        AVALON_CHECK(rho.IsSpy(s), "resistance seats cannot fail missions");
        ++m.fails;
        m.attributed = s;
      }
      if (m.fails != 1) m.attributed = kNoSeat;
      return m;
    }
    case Phase::kAssassinate: {
      const int k = actions[rho.assassin];
      AVALON_CHECK(k >= 0 && k < 3, "assassination choice out of range");
      const auto candidates =
          AssassinationCandidates(rho.assassin, rho.Partner(rho.assassin));
      return AssassinPick{rho.assassin, candidates[k]};
    }
    case Phase::kTerminal:
      break;
  }
  throw ContractViolation("no actions at a terminal state");
}

}  // namespace avalon
