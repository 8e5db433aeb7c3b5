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

// Continual re-solving agent. At every public node with a real choice it
// solves the depth-limited window rooted at that node from the public
// belief, plays from the average strategy at its own information set, and
// advances the belief with the solved profile as the likelihood.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "avalon/agents/agent.hpp"
#include "avalon/belief.hpp"
#include "avalon/solver.hpp"

namespace avalon {

// The root solve depends only on the public history, the belief (itself a
// function of that history) and the budget, so seats sharing those can
// share solves. Keyed by the public history and the iteration count.
class SolveCache {
 public:
  std::shared_ptr<const SolveResult> Find(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : it->second;
  }
  void Put(const std::string& key, std::shared_ptr<const SolveResult> r) {
    std::lock_guard<std::mutex> lock(mu_);
    entries_.emplace(key, std::move(r));
  }
  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const SolveResult>> entries_;
};

// Averaging delay used for an online budget of `iterations`.
inline SolveConfig OnlineSolveConfig(int iterations) { return SolveConfig{iterations, iterations / 6}; }

// True when some information set of some seat has more than one action.
inline bool HasChoice(const PublicState& h) {
  if (h.IsTerminal()) return false;
  for (Seat s = 0; s < kNumSeats; ++s) {
    if (!HasSeat(h.MovingSeats(), s)) continue;
    for (int local = 0; local < kNumInfoSets; ++local) {
      if (h.ActionCount(s, local) > 1) return true;
    }
  }
  return false;
}

class DeepRoleAgent : public AgentBase {
 public:
  DeepRoleAgent(int iterations, std::shared_ptr<const ValueOracle> nets,
                std::shared_ptr<SolveCache> cache = nullptr, double likelihood_floor = 1e-4)
      : config_(OnlineSolveConfig(iterations)),
        nets_(std::move(nets)),
        cache_(cache ? std::move(cache) : std::make_shared<SolveCache>()),
        tracker_(likelihood_floor) {
    if (iterations < 1) throw ConfigError("deeprole iterations must be positive");
  }

  std::string name() const override { return "deeprole:" + std::to_string(config_.iterations); }

  const JointBelief& belief() const { return tracker_.belief(); }
  const BeliefTracker& tracker() const { return tracker_; }
  double own_reach() const { return own_reach_; }
  int iterations() const { return config_.iterations; }
  const SolveCache& cache() const { return *cache_; }

  // Places the agent at an arbitrary public node with a given belief.
  void ResetAt(const InfoSetId& self, const PublicState& h, const JointBelief& belief) {
    Reset(self, h.proposer());
    state_ = h.WithoutLog();
    tracker_.Reset(belief);
    key_ = "@" + std::to_string(h.succeeds()) + "," + std::to_string(h.fails()) + "," +
           std::to_string(h.proposal_num()) + "," + std::to_string(h.proposer()) + "," +
           std::to_string(static_cast<int>(h.phase())) + "," + std::to_string(h.team()) + ":" +
           FormatBelief(belief) + "|";
  }

  // The solve at the current node, from the cache when available.
  std::shared_ptr<const SolveResult> SolveHere() {
    const std::string key = std::to_string(config_.iterations) + "|" + key_;
    if (auto hit = cache_->Find(key)) return hit;
    SolverOptions opts;
    opts.oracle = nets_.get();
    auto result = std::make_shared<const SolveResult>(SolveSituation(state_, tracker_.belief(), config_, opts));
    cache_->Put(key, result);
    return result;
  }

  // Average-strategy distribution at this seat's information set.
  std::vector<double> ActionDistribution(int num_actions) {
    const SolveResult& r = *SolveHere();
    const auto& row = r.root_strategy[self_.seat][self_.local_index];
    return std::vector<double>(row.begin(), row.begin() + num_actions);
  }

  int ChooseAction(int num_actions, std::mt19937_64& rng) override {
    AVALON_CHECK(num_actions == state_.ActionCount(self_.seat, self_.local_index),
                 "action count does not match the information set");
    if (num_actions == 1) return last_action_ = 0;
    const std::vector<double> p = ActionDistribution(num_actions);
    last_action_ = std::discrete_distribution<int>(p.begin(), p.end())(rng);
    last_action_prob_ = p[last_action_];
    acted_ = true;
    return last_action_;
  }

 protected:
  void OnReset() override {
    tracker_.Reset(UniformBelief());
    own_reach_ = 1.0;
    acted_ = false;
    key_ = "p" + std::to_string(state_.proposer()) + "|";
  }

  void OnObserve(const PublicState& before, const Observation& o) override {
    if (HasChoice(before)) {
      // SolveHere reads state_, so solve at `before` explicitly.
      const PublicState after = state_;
      state_ = before;
      const auto solved = SolveHere();
      state_ = after;
      tracker_.Observe(before, o, solved->root_strategy);
    } else {
      tracker_.ObserveLogical(o);
    }
    if (acted_) own_reach_ *= last_action_prob_;
    acted_ = false;
    key_ += ToString(o) + ";";
  }

 private:
  SolveConfig config_;
  std::shared_ptr<const ValueOracle> nets_;
  std::shared_ptr<SolveCache> cache_;
  BeliefTracker tracker_;
  std::string key_;
  double own_reach_ = 1.0;
  bool acted_ = false;
  int last_action_ = 0;
  double last_action_prob_ = 1.0;
};

}  // namespace avalon
