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

// Hand-rolled generators shared by the test binaries.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "avalon/belief.hpp"
#include "avalon/deduction.hpp"
#include "avalon/public_state.hpp"
#include "avalon/roles.hpp"

namespace avalon::testing {

inline int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Picks a uniformly random legal private action for every seat under rho.
inline JointAction RandomJointAction(const PublicState& h, const RoleAssignment& rho,
                                     std::mt19937_64& rng) {
  JointAction a{};
  for (Seat s = 0; s < kNumSeats; ++s) {
    const int n = h.ActionCount(s, InfoSetIndex(s, rho));
    a[s] = n > 0 ? UniformInt(rng, 0, n - 1) : 0;
  }
  return a;
}

struct RandomGame {
  RoleAssignment rho;
  PublicState state;                   // final state, branch-split log
  std::vector<PublicState> prefixes;   // states before each observation
  std::vector<Observation> split_log;  // attributed observations
};

// Plays uniformly random legal moves for up to `max_steps` observations.
inline RandomGame PlayRandomGame(std::mt19937_64& rng, int max_steps = 1000) {
  RandomGame g;
  g.rho = RoleAssignment::FromIndex(UniformInt(rng, 0, kNumAssignments - 1));
  g.state = PublicState::Initial(UniformInt(rng, 0, kNumSeats - 1));
  for (int step = 0; step < max_steps && !g.state.IsTerminal(); ++step) {
    const Observation o = ResolveActions(g.state, RandomJointAction(g.state, g.rho, rng), g.rho);
    g.prefixes.push_back(g.state);
    g.split_log.push_back(o);
    g.state = g.state.Apply(o);
  }
  return g;
}

inline JointBelief RandomBelief(std::mt19937_64& rng, double zero_fraction = 0.0) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  JointBelief b;
  double total = 0.0;
  for (double& x : b) {
    x = u(rng) < zero_fraction ? 0.0 : gamma(rng);
    total += x;
  }
  if (total == 0.0) return UniformBelief();
  for (double& x : b) x /= total;
  return b;
}

// Random full strategy profile at a node (proper distributions).
inline NodeStrategy RandomNodeStrategy(const PublicState& h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  NodeStrategy out{};
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      const int n = h.ActionCount(s, local);
      double total = 0.0;
      for (int a = 0; a < n; ++a) total += (out[s][local][a] = u(rng));
      for (int a = 0; a < n; ++a) out[s][local][a] /= total;
    }
  }
  return out;
}

inline std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// A fixed strategy that depends only on the node's public fields, the
// seat, its information set and `salt`. Entries are bounded away from 0.
inline void HashedStrategy(const PublicState& h, Seat seat, int local, int n,
                           double* out, std::uint64_t salt = 0) {
  std::uint64_t key = salt;
  for (int v : {h.succeeds(), h.fails(), h.proposal_num(), h.proposer(),
                static_cast<int>(h.phase()), static_cast<int>(h.team()),
                static_cast<int>(h.log().size()), seat, local}) {
    key = Mix64(key ^ static_cast<std::uint64_t>(v + 1));
  }
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    key = Mix64(key);
    out[a] = 0.1 + static_cast<double>(key >> 11) * 0x1.0p-53;
    total += out[a];
  }
  for (int a = 0; a < n; ++a) out[a] /= total;
}

inline NodeStrategy HashedNodeStrategy(const PublicState& h, std::uint64_t salt = 0) {
  NodeStrategy out{};
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      const int n = h.ActionCount(s, local);
      if (n > 0) HashedStrategy(h, s, local, n, out[s][local].data(), salt);
    }
  }
  return out;
}

// Probability that the seats, playing `strategy` under rho, produce
// exactly `o` (attributed or public) at h, by enumerating joint profiles.
inline double BruteForceLikelihood(const PublicState& h, const Observation& o,
                                   const RoleAssignment& rho,
                                   const NodeStrategy& strategy) {
  std::array<int, kNumSeats> counts{};
  int profiles = 1;
  for (Seat s = 0; s < kNumSeats; ++s) {
    counts[s] = std::max(1, h.ActionCount(s, InfoSetIndex(s, rho)));
    profiles *= counts[s];
  }
  const bool public_only = PublicPart(o) == o;
  double total = 0.0;
  for (int p = 0; p < profiles; ++p) {
    JointAction a{};
    int rest = p;
    double prob = 1.0;
    for (Seat s = 0; s < kNumSeats; ++s) {
      a[s] = rest % counts[s];
      rest /= counts[s];
      if (h.ActionCount(s, InfoSetIndex(s, rho)) > 0) {
        prob *= strategy[s][InfoSetIndex(s, rho)][a[s]];
      }
    }
    const Observation produced = ResolveActions(h, a, rho);
    const bool match = public_only ? PublicPart(produced) == o : produced == o;
    if (match) total += prob;
  }
  return total;
}

}  // namespace avalon::testing
