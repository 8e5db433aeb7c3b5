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
#include <bitset>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace avalon {

inline constexpr int kNumSeats = 5;
inline constexpr int kNumAssignments = 60;
inline constexpr int kNumInfoSets = 15;
inline constexpr int kNumRounds = 5;
inline constexpr int kMaxProposals = 5;
inline constexpr int kMissionsToWin = 3;
inline constexpr int kNumTeams = 10;  // C(5,2) == C(5,3)
inline constexpr int kMaxActions = kNumTeams;
inline constexpr std::array<int, kNumRounds> kTeamSizes = {2, 3, 2, 3, 3};

using Seat = int;
inline constexpr Seat kNoSeat = -1;

// Bit s set means seat s is a member.
using SeatMask = std::uint8_t;

inline constexpr SeatMask SeatBit(Seat s) { return static_cast<SeatMask>(1u << s); }
inline constexpr bool HasSeat(SeatMask mask, Seat s) { return (mask >> s) & 1u; }

// One flag per role assignment in canonical order.
using AssignmentMask = std::bitset<kNumAssignments>;

// Per seat, one entry per local information set. Used for reaches and values.
template <typename T>
using PerInfoSet = std::array<std::array<T, kNumInfoSets>, kNumSeats>;

using ReachVector = PerInfoSet<double>;
using InfoSetValues = PerInfoSet<double>;

inline ReachVector OnesReach() {
  ReachVector r;
  for (auto& row : r) row.fill(1.0);
  return r;
}

inline InfoSetValues ZeroValues() {
  InfoSetValues v;
  for (auto& row : v) row.fill(0.0);
  return v;
}

// A precondition of an operation was not met by the caller.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid or missing configuration (iterations, networks, presets).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated file or record.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Joint posterior lost all of its mass.
class BeliefCollapse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AVALON_CHECK(cond, msg)                                              \
  do {                                                                       \
    if (!(cond)) {                                                           \
      throw ::avalon::ContractViolation(std::string(__FILE__) + ":" +        \
                                        std::to_string(__LINE__) + ": " +    \
                                        (msg));                              \
    }                                                                        \
  } while (false)

}  // namespace avalon
