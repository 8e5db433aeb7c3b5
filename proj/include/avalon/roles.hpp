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
#include <string>
#include <utility>

#include "avalon/types.hpp"

namespace avalon {

// Rank of the unordered pair {a, b} (a < b) among the pairs of an n-element
// set in lexicographic order.
constexpr int PairRankOf(int a, int b, int n) {
  return a * (2 * n - a - 1) / 2 + (b - a - 1);
}

// Position of `other` among the four seats that are not `self`, ascending.
constexpr int RankAmongOthers(Seat self, Seat other) {
  return other < self ? other : other - 1;
}

// Inverse of RankAmongOthers.
constexpr Seat OtherSeatAt(Seat self, int rank) {
  return rank < self ? rank : rank + 1;
}

inline constexpr std::array<std::pair<Seat, Seat>, kNumTeams> kSeatPairs = {{
    {0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2},
    {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4},
}};

// One complete deal of roles: the spy pair, which spy is the Assassin and
// which resistance seat is Merlin. Canonical index is
// pairRank * 6 + assassinRank * 3 + merlinRank.
struct RoleAssignment {
  Seat spy_low = 0;
  Seat spy_high = 1;
  Seat assassin = 0;
  Seat merlin = 2;
  int index = 0;

  static constexpr RoleAssignment FromIndex(int index) {
    RoleAssignment r;
    r.index = index;
    const int pair_rank = index / 6;
    const int assassin_rank = (index % 6) / 3;
    const int merlin_rank = index % 3;
    r.spy_low = kSeatPairs[pair_rank].first;
    r.spy_high = kSeatPairs[pair_rank].second;
    r.assassin = assassin_rank == 0 ? r.spy_low : r.spy_high;
    int seen = 0;
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (s == r.spy_low || s == r.spy_high) continue;
      if (seen == merlin_rank) r.merlin = s;
      ++seen;
    }
    return r;
  }

  static constexpr RoleAssignment FromRoles(Seat spy_a, Seat spy_b,
                                            Seat assassin, Seat merlin) {
    const Seat lo = spy_a < spy_b ? spy_a : spy_b;
    const Seat hi = spy_a < spy_b ? spy_b : spy_a;
    int merlin_rank = 0;
    for (Seat s = 0; s < merlin; ++s) {
      if (s != lo && s != hi) ++merlin_rank;
    }
    const int idx = PairRankOf(lo, hi, kNumSeats) * 6 +
                    (assassin == lo ? 0 : 3) + merlin_rank;
    return FromIndex(idx);
  }

  constexpr SeatMask spies() const {
    return static_cast<SeatMask>(SeatBit(spy_low) | SeatBit(spy_high));
  }
  constexpr bool IsSpy(Seat s) const { return s == spy_low || s == spy_high; }
  constexpr Seat Partner(Seat spy) const {
    return spy == spy_low ? spy_high : spy_low;
  }
  constexpr bool Valid() const {
    return spy_low < spy_high && (assassin == spy_low || assassin == spy_high) &&
           !IsSpy(merlin) && index >= 0 && index < kNumAssignments;
  }

  friend constexpr bool operator==(const RoleAssignment&,
                                   const RoleAssignment&) = default;
};

// The four kinds of private knowledge a seat can have.
enum class InfoSetKind { kResistance, kMerlin, kSpy, kAssassin };

constexpr InfoSetKind KindOfInfoSet(int local_index) {
  if (local_index == 0) return InfoSetKind::kResistance;
  if (local_index <= 6) return InfoSetKind::kMerlin;
  if (local_index <= 10) return InfoSetKind::kSpy;
  return InfoSetKind::kAssassin;
}

constexpr bool IsSpyInfoSet(int local_index) { return local_index >= 7; }

// 0 plain Resistance; 1-6 Merlin seeing a spy pair (lexicographic over the
// other seats); 7-10 Spy seeing the Assassin at the k-th other seat;
// 11-14 Assassin seeing its partner at the k-th other seat.
constexpr int InfoSetIndex(Seat seat, const RoleAssignment& rho) {
  if (seat == rho.merlin) {
    const int a = RankAmongOthers(seat, rho.spy_low);
    const int b = RankAmongOthers(seat, rho.spy_high);
    return 1 + PairRankOf(a, b, 4);
  }
  if (rho.IsSpy(seat)) {
    const Seat partner = rho.Partner(seat);
    const int k = RankAmongOthers(seat, partner);
    return seat == rho.assassin ? 11 + k : 7 + k;
  }
  return 0;
}

struct InfoSetId {
  Seat seat = 0;
  int local_index = 0;
  friend constexpr bool operator==(const InfoSetId&, const InfoSetId&) = default;
};

namespace detail {

struct RoleTables {
  // info_set[seat][rho]
  std::array<std::array<std::int8_t, kNumAssignments>, kNumSeats> info_set{};
  // spies[rho]
  std::array<SeatMask, kNumAssignments> spies{};
  std::array<Seat, kNumAssignments> assassin{};
  std::array<Seat, kNumAssignments> merlin{};
};

constexpr RoleTables BuildRoleTables() {
  RoleTables t;
  for (int r = 0; r < kNumAssignments; ++r) {
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    t.spies[r] = rho.spies();
    t.assassin[r] = rho.assassin;
    t.merlin[r] = rho.merlin;
    for (Seat s = 0; s < kNumSeats; ++s) {
      t.info_set[s][r] = static_cast<std::int8_t>(InfoSetIndex(s, rho));
    }
  }
  return t;
}

inline constexpr RoleTables kRoleTables = BuildRoleTables();

}  // namespace detail

inline int InfoSetOf(Seat seat, int rho) {
  return detail::kRoleTables.info_set[seat][rho];
}
inline SeatMask SpiesOf(int rho) { return detail::kRoleTables.spies[rho]; }
inline bool IsSpyIn(Seat seat, int rho) { return HasSeat(SpiesOf(rho), seat); }
inline Seat AssassinOf(int rho) { return detail::kRoleTables.assassin[rho]; }
inline Seat MerlinOf(int rho) { return detail::kRoleTables.merlin[rho]; }

// Seats known to be spies from the information set, or 0 for a plain
// Resistance seat. Spies know both members of their team.
constexpr SeatMask KnownSpies(Seat seat, int local_index) {
  switch (KindOfInfoSet(local_index)) {
    case InfoSetKind::kResistance:
      return 0;
    case InfoSetKind::kMerlin: {
      const int rank = local_index - 1;
      for (int x = 0; x < 4; ++x) {
        for (int y = x + 1; y < 4; ++y) {
          if (PairRankOf(x, y, 4) == rank) {
            return static_cast<SeatMask>(SeatBit(OtherSeatAt(seat, x)) |
                                         SeatBit(OtherSeatAt(seat, y)));
          }
        }
      }
      return 0;
    }
    case InfoSetKind::kSpy:
      return static_cast<SeatMask>(SeatBit(seat) |
                                   SeatBit(OtherSeatAt(seat, local_index - 7)));
    case InfoSetKind::kAssassin:
      return static_cast<SeatMask>(
          SeatBit(seat) | SeatBit(OtherSeatAt(seat, local_index - 11)));
  }
  return 0;
}

// For spy information sets, the seat that holds the Assassin role.
constexpr Seat KnownAssassin(Seat seat, int local_index) {
  if (KindOfInfoSet(local_index) == InfoSetKind::kSpy) {
    return OtherSeatAt(seat, local_index - 7);
  }
  if (KindOfInfoSet(local_index) == InfoSetKind::kAssassin) return seat;
  return kNoSeat;
}

// The three seats an Assassin may name, ascending.
inline std::array<Seat, 3> AssassinationCandidates(Seat assassin,
                                                   Seat partner) {
  std::array<Seat, 3> out{};
  int n = 0;
  for (Seat s = 0; s < kNumSeats; ++s) {
    if (s != assassin && s != partner) out[n++] = s;
  }
  return out;
}

inline const char* InfoSetKindName(InfoSetKind kind) {
  switch (kind) {
    case InfoSetKind::kResistance:
      return "resistance";
    case InfoSetKind::kMerlin:
      return "merlin";
    case InfoSetKind::kSpy:
      return "spy";
    case InfoSetKind::kAssassin:
      return "assassin";
  }
  return "?";
}

// Role name of `seat` under the assignment.
inline std::string RoleName(Seat seat, const RoleAssignment& rho) {
  if (seat == rho.merlin) return "merlin";
  if (seat == rho.assassin) return "assassin";
  if (rho.IsSpy(seat)) return "spy";
  return "resistance";
}

}  // namespace avalon
