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

// Replays a recorded game through a DeepRole belief tracker seated at one
// seat and reports how much belief it puts on the truth after each step.

#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "avalon/agents/deeprole.hpp"
#include "avalon/replay.hpp"

namespace avalon {

inline constexpr int kDefaultBeliefReplayIterations = 30;

struct BeliefStep {
  int step = 0;             // observations seen so far
  std::string observation;  // the observation just applied; empty at step 0
  double spy_pair = 0.0;    // belief in the true spy pair
  double assignment = 0.0;  // belief in the true assignment
  JointBelief belief{};
};

inline std::vector<BeliefStep> ReplayBeliefs(const GameRecord& game, Seat observer,
                                             std::shared_ptr<const ValueOracle> nets,
                                             int iterations = kDefaultBeliefReplayIterations) {
  if (observer < 0 || observer >= kNumSeats) throw ConfigError("observer seat out of range");
  if (!nets) throw ConfigError("belief replay needs trained networks");
  DeepRoleAgent agent(iterations, std::move(nets));
  agent.Reset(InfoSetId{observer, InfoSetOf(observer, game.assignment)}, game.first_proposer);
  const SeatMask truth = SpiesOf(game.assignment);
  const auto snapshot = [&](int step, std::string obs) {
    return BeliefStep{step, std::move(obs), SpyPairMarginal(agent.belief(), truth), agent.belief()[game.assignment],
                      agent.belief()};
  };
  std::vector<BeliefStep> out{snapshot(0, "")};
  for (size_t k = 0; k < game.log.size(); ++k) {
    const Observation pub = PublicPart(game.log[k]);
    try {
      agent.Observe(pub);
    } catch (const ContractViolation& e) {
      throw FormatError("log does not replay at step " + std::to_string(k + 1) + ": " + e.what());
    }
    out.push_back(snapshot(static_cast<int>(k) + 1, ToString(pub)));
  }
  return out;
}

// CSV: game,step,observation,p_spy_pair,p_assignment
inline void WriteBeliefSteps(std::ostream& out, size_t game, const std::vector<BeliefStep>& steps, bool header) {
  if (header) out << "game,step,observation,p_spy_pair,p_assignment\n";
  out.precision(12);
  for (const BeliefStep& s : steps) {
    out << game << "," << s.step << ",\"" << s.observation << "\"," << s.spy_pair << "," << s.assignment << "\n";
  }
}

}  // namespace avalon
