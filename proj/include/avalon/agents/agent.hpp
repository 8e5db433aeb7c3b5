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

// The uniform agent interface and the two simple baselines.
//
// Action indices per phase: propose = index into TeamsOfSize(team size);
// vote 0 reject / 1 approve; mission 0 succeed / 1 fail (spies only);
// assassinate = index into AssassinationCandidates (the Assassin only).

#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "avalon/belief.hpp"
#include "avalon/deduction.hpp"
#include "avalon/observation.hpp"
#include "avalon/public_state.hpp"
#include "avalon/roles.hpp"

namespace avalon {

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string name() const = 0;

  // Starts a game as `self` with the first proposer known to everyone.
  virtual void Reset(const InfoSetId& self, Seat first_proposer) = 0;

  // A public observation: single fails arrive without attribution.
  virtual void Observe(const Observation& public_obs) = 0;

  // Called when this seat has `num_actions` >= 1 legal actions at the
  // current node. Returns an index in [0, num_actions).
  virtual int ChooseAction(int num_actions, std::mt19937_64& rng) = 0;
};

// Assignments compatible with a seat's private knowledge.
inline AssignmentMask PrivateMask(const InfoSetId& self) {
  AssignmentMask m;
  for (int r = 0; r < kNumAssignments; ++r) m[r] = InfoSetOf(self.seat, r) == self.local_index;
  return m;
}

// Tracks the public state; subclasses add their own reasoning.
class AgentBase : public Agent {
 public:
  void Reset(const InfoSetId& self, Seat first_proposer) override {
    self_ = self;
    state_ = PublicState::Initial(first_proposer);
    OnReset();
  }

  void Observe(const Observation& public_obs) override {
    AVALON_CHECK(PublicPart(public_obs) == public_obs, "agents only see public observations");
    state_.CheckLegal(public_obs);
    const PublicState before = state_;
    state_ = state_.Apply(public_obs, false);
    OnObserve(before, public_obs);
  }

  const InfoSetId& self() const { return self_; }
  const PublicState& state() const { return state_; }

 protected:
  virtual void OnReset() {}
  virtual void OnObserve(const PublicState& /*before*/, const Observation& /*o*/) {}

  InfoSetId self_;
  PublicState state_ = PublicState::Initial(0);
};

inline int UniformIndex(int n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

class RandomAgent : public AgentBase {
 public:
  std::string name() const override { return "random"; }
  int ChooseAction(int num_actions, std::mt19937_64& rng) override {
    AVALON_CHECK(num_actions >= 1, "no legal actions");
    return UniformIndex(num_actions, rng);
  }
};

// Keeps the assignments consistent with its private knowledge and the public
// history, and acts as if one of them, freshly sampled, were true.
class LogicBot : public AgentBase {
 public:
  std::string name() const override { return "logic"; }

  // Assignments consistent with the public history alone.
  const AssignmentMask& public_consistent() const { return public_; }
  // ... and with this seat's private knowledge.
  AssignmentMask consistent() const { return public_ & private_; }

  int ChooseAction(int num_actions, std::mt19937_64& rng) override {
    AVALON_CHECK(num_actions >= 1, "no legal actions");
    if (num_actions == 1) return 0;
    const bool spy = IsSpyInfoSet(self_.local_index);
    switch (state_.phase()) {
      case Phase::kPropose: {
        const auto& teams = TeamsOfSize(state_.team_size());
        if (spy) return UniformIndex(num_actions, rng);
        // Self plus resistance members of a sampled assignment.
        const int r = SampleConsistent(rng);
        std::vector<Seat> others;
        for (Seat s = 0; s < kNumSeats; ++s) {
          if (s != self_.seat && !IsSpyIn(s, r)) others.push_back(s);
        }
        std::shuffle(others.begin(), others.end(), rng);
        SeatMask team = SeatBit(self_.seat);
        for (int k = 0; k + 1 < state_.team_size(); ++k) team |= SeatBit(others[k]);
        return static_cast<int>(std::find(teams.begin(), teams.end(), team) - teams.begin());
      }
      case Phase::kVote: {
        const bool approve = ResistanceApproves(rng);
        return (approve != spy) ? kApprove : kReject;
      }
      case Phase::kMission:
        return kFail;
      case Phase::kAssassinate:
        return UniformIndex(num_actions, rng);
      case Phase::kTerminal:
        break;
    }
    throw ContractViolation("no action at a terminal state");
  }

 protected:
  void OnReset() override {
    private_ = PrivateMask(self_);
    public_.set();
  }

  void OnObserve(const PublicState& /*before*/, const Observation& o) override {
    public_ &= ObservationMask(o);
    AVALON_CHECK((public_ & private_).any(), "no consistent assignment left");
  }

 private:
  int SampleConsistent(std::mt19937_64& rng) const {
    const AssignmentMask live = consistent();
    const int k = UniformIndex(static_cast<int>(live.count()), rng);
    int seen = 0;
    for (int r = 0; r < kNumAssignments; ++r) {
      if (live[r] && seen++ == k) return r;
    }
    return -1;
  }

  // Approve on the last proposal, or when the team and its proposer are all
  // resistance in a freshly sampled consistent assignment.
  bool ResistanceApproves(std::mt19937_64& rng) const {
    if (state_.IsLastProposal()) return true;
    const int r = SampleConsistent(rng);
    const SeatMask involved = static_cast<SeatMask>(state_.team() | SeatBit(state_.proposer()));
    return (involved & SpiesOf(r)) == 0;
  }

  AssignmentMask private_;
  AssignmentMask public_;
};

}  // namespace avalon
