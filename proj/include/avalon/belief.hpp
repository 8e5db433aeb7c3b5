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

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "avalon/deduction.hpp"
#include "avalon/observation.hpp"
#include "avalon/public_state.hpp"
#include "avalon/roles.hpp"
#include "avalon/types.hpp"

namespace avalon {

// Probability (or unnormalized weight) per role assignment, canonical order.
using JointBelief = std::array<double, kNumAssignments>;

// A distribution over actions for every information set of every seat.
using NodeStrategy = PerInfoSet<std::array<double, kMaxActions>>;

inline JointBelief UniformBelief() {
  JointBelief b;
  b.fill(1.0 / kNumAssignments);
  return b;
}

inline double BeliefMass(const JointBelief& b) {
  return std::accumulate(b.begin(), b.end(), 0.0);
}

inline bool IsNormalized(const JointBelief& b, double tol = 1e-9) {
  for (double x : b) {
    if (!(x >= 0.0)) return false;
  }
  return std::abs(BeliefMass(b) - 1.0) <= tol;
}

// Throws BeliefCollapse when there is no mass to normalize.
inline JointBelief Normalized(const JointBelief& b) {
  const double mass = BeliefMass(b);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw BeliefCollapse("joint belief has no mass");
  }
  JointBelief out;
  for (int r = 0; r < kNumAssignments; ++r) out[r] = b[r] / mass;
  return out;
}

// Assignments not contradicted by the history (the deductive indicator).
inline AssignmentMask ConsistencyMask(const std::vector<Observation>& log) {
  AssignmentMask mask;
  mask.set();
  for (const Observation& o : log) mask &= ObservationMask(o);
  return mask;
}

inline AssignmentMask ConsistencyMask(const PublicState& h) {
  return ConsistencyMask(h.log());
}

inline JointBelief ApplyMask(const JointBelief& b, const AssignmentMask& mask) {
  JointBelief out;
  for (int r = 0; r < kNumAssignments; ++r) out[r] = mask[r] ? b[r] : 0.0;
  return out;
}

// b[rho] * mask[rho] * prod_i reach_i[I_i(rho)], not renormalized.
inline JointBelief TerminalBelief(const AssignmentMask& mask, const JointBelief& b,
                                  const ReachVector& reach) {
  JointBelief out;
  for (int r = 0; r < kNumAssignments; ++r) {
    double p = mask[r] ? b[r] : 0.0;
    for (Seat s = 0; s < kNumSeats && p != 0.0; ++s) p *= reach[s][InfoSetOf(s, r)];
    out[r] = p;
  }
  return out;
}

inline JointBelief TerminalBelief(const PublicState& h, const JointBelief& b,
                                  const ReachVector& reach) {
  return TerminalBelief(ConsistencyMask(h), b, reach);
}

// Bayes posterior from a prior, the seats' reach contributions along the
// history, and the deductive mask.
inline JointBelief Posterior(const JointBelief& prior, const ReachVector& reach,
                             const PublicState& h) {
  return Normalized(TerminalBelief(h, prior, reach));
}

inline JointBelief UniformOverConsistent(const AssignmentMask& mask) {
  JointBelief b;
  for (int r = 0; r < kNumAssignments; ++r) b[r] = mask[r] ? 1.0 : 0.0;
  return Normalized(b);
}

// Marginal probability that the spies are exactly `pair`.
inline double SpyPairMarginal(const JointBelief& b, SeatMask pair) {
  double p = 0.0;
  for (int r = 0; r < kNumAssignments; ++r) {
    if (SpiesOf(r) == pair) p += b[r];
  }
  return p;
}

inline std::array<double, kNumSeats> MerlinMarginals(const JointBelief& b) {
  std::array<double, kNumSeats> m{};
  for (int r = 0; r < kNumAssignments; ++r) m[MerlinOf(r)] += b[r];
  return m;
}

inline std::array<double, kNumSeats> SpyMarginals(const JointBelief& b) {
  std::array<double, kNumSeats> m{};
  for (int r = 0; r < kNumAssignments; ++r) {
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (IsSpyIn(s, r)) m[s] += b[r];
    }
  }
  return m;
}

// Total belief mass of each information set of `seat`.
inline std::array<double, kNumInfoSets> InfoSetMass(const JointBelief& b, Seat seat) {
  std::array<double, kNumInfoSets> m{};
  for (int r = 0; r < kNumAssignments; ++r) m[InfoSetOf(seat, r)] += b[r];
  return m;
}

// 60 decimal values in canonical order, space separated.
inline std::string FormatBelief(const JointBelief& b) {
  std::ostringstream out;
  out.precision(17);
  for (int r = 0; r < kNumAssignments; ++r) {
    if (r) out << ' ';
    out << b[r];
  }
  return out.str();
}

inline JointBelief ParseBelief(const std::string& text) {
  std::istringstream in(text);
  JointBelief b;
  for (int r = 0; r < kNumAssignments; ++r) {
    if (!(in >> b[r])) throw FormatError("belief needs 60 values");
  }
  std::string rest;
  if (in >> rest) throw FormatError("trailing data after belief");
  return b;
}

// Incremental public belief for online play. Each observation multiplies the
// belief by the likelihood of producing it under a strategy profile for the
// node, summing over the hidden attribution of an ambiguous single fail.
class BeliefTracker {
 public:
  explicit BeliefTracker(double likelihood_floor = 1e-4)
      : floor_(likelihood_floor) {
    Reset(UniformBelief());
  }

  void Reset(const JointBelief& prior) {
    belief_ = Normalized(prior);
    mask_.set();
    collapses_ = 0;
  }

  const JointBelief& belief() const { return belief_; }
  const AssignmentMask& mask() const { return mask_; }
  int collapses() const { return collapses_; }
  double likelihood_floor() const { return floor_; }

  // `public_obs` must carry no attribution. `strategy` gives every moving
  // seat's distribution at every information set at `h`.
  void Observe(const PublicState& h, const Observation& public_obs,
               const NodeStrategy& strategy) {
    h.CheckLegal(public_obs);
    mask_ &= ObservationMask(public_obs);
    const std::vector<Observation> branches = Branches(h, public_obs);
    JointBelief next{};
    for (const Observation& o : branches) {
      const Deduction d = DeduceActions(h, o);
      for (int r = 0; r < kNumAssignments; ++r) {
        if (belief_[r] == 0.0 || !ObservationConsistent(o, r)) continue;
        double p = belief_[r];
        for (Seat s = 0; s < kNumSeats && p != 0.0; ++s) {
          if (!HasSeat(d.movers, s)) continue;
          const int local = InfoSetOf(s, r);
          const int a = d.ActionOf(s, local);
          if (a == kInconsistent) {
            p = 0.0;
          } else if (h.ActionCount(s, local) > 1) {
            p *= std::max(strategy[s][local][a], floor_);
          }
        }
        next[r] += p;
      }
    }
    for (int r = 0; r < kNumAssignments; ++r) {
      if (!mask_[r]) next[r] = 0.0;
    }
    if (!(BeliefMass(next) > 0.0)) {
      ++collapses_;
      belief_ = UniformOverConsistent(mask_);
      return;
    }
    belief_ = Normalized(next);
  }

  // Deduction-only update for observers that do not model strategies.
  void ObserveLogical(const Observation& public_obs) {
    mask_ &= ObservationMask(public_obs);
    JointBelief next = ApplyMask(belief_, mask_);
    if (!(BeliefMass(next) > 0.0)) {
      ++collapses_;
      belief_ = UniformOverConsistent(mask_);
      return;
    }
    belief_ = Normalized(next);
  }

  // The branch-split observations that share the public content of `o`.
  static std::vector<Observation> Branches(const PublicState& h,
                                           const Observation& o) {
    const auto* m = std::get_if<MissionResult>(&o);
    if (m == nullptr || m->fails != 1 || m->Attributed()) return {o};
    std::vector<Observation> out;
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (HasSeat(h.team(), s)) out.emplace_back(MissionResult{m->team, 1, s});
    }
    return out;
  }

 private:
  double floor_;
  JointBelief belief_{};
  AssignmentMask mask_;
  int collapses_ = 0;
};

}  // namespace avalon
