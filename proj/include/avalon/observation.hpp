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
#include <string>
#include <variant>

#include "avalon/types.hpp"

namespace avalon {

// Third-person observations: everything every seat sees.
struct ProposalMade {
  SeatMask team = 0;
  friend bool operator==(const ProposalMade&, const ProposalMade&) = default;
};

struct VoteResult {
  SeatMask approvals = 0;  // bit s set: seat s approved
  bool Approved() const { return std::popcount(approvals) >= 3; }
  bool ApprovedBy(Seat s) const { return HasSeat(approvals, s); }
  friend bool operator==(const VoteResult&, const VoteResult&) = default;
};

// `attributed` names the failing seat on the internal branch that splits an
// ambiguous single fail. It never exists in what players are shown.
struct MissionResult {
  SeatMask team = 0;
  int fails = 0;
  Seat attributed = kNoSeat;
  bool Attributed() const { return attributed != kNoSeat; }
  MissionResult Public() const { return {team, fails, kNoSeat}; }
  friend bool operator==(const MissionResult&, const MissionResult&) = default;
};

struct AssassinPick {
  Seat actor = kNoSeat;
  Seat target = kNoSeat;
  friend bool operator==(const AssassinPick&, const AssassinPick&) = default;
};

using Observation =
    std::variant<ProposalMade, VoteResult, MissionResult, AssassinPick>;

// Strips branch attribution so only publicly visible content remains.
inline Observation PublicPart(const Observation& o) {
  if (const auto* m = std::get_if<MissionResult>(&o)) return m->Public();
  return o;
}

// Teams of the given size in lexicographic order of their sorted members.
inline const std::array<SeatMask, kNumTeams>& TeamsOfSize(int size) {
  static const auto tables = [] {
    std::array<std::array<SeatMask, kNumTeams>, 2> t{};
    int n2 = 0;
    int n3 = 0;
    for (Seat a = 0; a < kNumSeats; ++a) {
      for (Seat b = a + 1; b < kNumSeats; ++b) {
        t[0][n2++] = static_cast<SeatMask>(SeatBit(a) | SeatBit(b));
        for (Seat c = b + 1; c < kNumSeats; ++c) {
          t[1][n3++] =
              static_cast<SeatMask>(SeatBit(a) | SeatBit(b) | SeatBit(c));
        }
      }
    }
    return t;
  }();
  AVALON_CHECK(size == 2 || size == 3, "team size must be 2 or 3");
  return tables[size - 2];
}

inline int TeamIndex(SeatMask team) {
  const auto& teams = TeamsOfSize(std::popcount(team));
  for (int i = 0; i < kNumTeams; ++i) {
    if (teams[i] == team) return i;
  }
  throw ContractViolation("team is not of a legal size");
}

inline std::string TeamString(SeatMask team) {
  std::string out = "{";
  for (Seat s = 0; s < kNumSeats; ++s) {
    if (!HasSeat(team, s)) continue;
    if (out.size() > 1) out += ",";
    out += std::to_string(s);
  }
  return out + "}";
}

inline std::string ToString(const Observation& o) {
  struct Printer {
    std::string operator()(const ProposalMade& p) const {
      return "propose " + TeamString(p.team);
    }
    std::string operator()(const VoteResult& v) const {
      std::string s = "votes ";
      for (Seat i = 0; i < kNumSeats; ++i) s += v.ApprovedBy(i) ? 'A' : 'R';
      return s;
    }
    std::string operator()(const MissionResult& m) const {
      std::string s =
          "mission " + TeamString(m.team) + " fails=" + std::to_string(m.fails);
      if (m.Attributed()) s += " by=" + std::to_string(m.attributed);
      return s;
    }
    std::string operator()(const AssassinPick& a) const {
      return "assassin " + std::to_string(a.actor) + " picks " +
             std::to_string(a.target);
    }
  };
  return std::visit(Printer{}, o);
}

}  // namespace avalon
