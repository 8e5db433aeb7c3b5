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

// Information-set MCTS. Each iteration samples an assignment consistent with
// what the searching seat knows and plays it out, selecting simultaneous
// moves per seat with UCB1 (availability-count form) and finishing with
// uniform random rollouts.
//
// Single observer: one tree, seen through the searching seat's eyes, holds
// statistics for every seat. Multiple observer: one tree per seat, each
// branching on what that seat observes; a seat selects from its own tree.

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "avalon/agents/agent.hpp"

namespace avalon {

inline constexpr double kUctExploration = 1.4;

// Compact key of a public observation plus the viewer's own hidden choice.
inline std::uint32_t ViewKey(const Observation& pub, int own_action) {
  std::uint32_t k = static_cast<std::uint32_t>(pub.index()) << 16;
  if (const auto* p = std::get_if<ProposalMade>(&pub)) k |= p->team;
  if (const auto* v = std::get_if<VoteResult>(&pub)) k |= v->approvals;
  if (const auto* m = std::get_if<MissionResult>(&pub)) k |= static_cast<std::uint32_t>(m->fails);
  if (const auto* a = std::get_if<AssassinPick>(&pub)) k |= static_cast<std::uint32_t>(a->target);
  return k | (static_cast<std::uint32_t>(own_action + 1) << 24);
}

class IsmctsSearch {
 public:
  struct Stats {
    std::array<double, kMaxActions> reward{};
    std::array<std::uint32_t, kMaxActions> visits{};
    std::array<std::uint32_t, kMaxActions> avail{};
  };
  struct Node {
    std::vector<std::pair<std::uint32_t, int>> children;
    std::array<Stats, kNumSeats> stats;
  };

  IsmctsSearch(bool multi_observer, int iterations) : multi_(multi_observer), iterations_(iterations) {
    if (iterations < 1) throw ConfigError("ISMCTS iterations must be positive");
  }

  // Visit counts of the observer's root actions after the search.
  std::vector<std::uint32_t> Search(const InfoSetId& observer, const PublicState& root,
                                    const AssignmentMask& consistent, std::mt19937_64& rng) {
    AVALON_CHECK(consistent.any(), "no consistent determinization");
    const int num_trees = multi_ ? kNumSeats : 1;
    trees_.assign(num_trees, {});
    for (auto& t : trees_) t.emplace_back();
    std::vector<int> pool;
    for (int r = 0; r < kNumAssignments; ++r) {
      if (consistent[r]) pool.push_back(r);
    }
    for (int it = 0; it < iterations_; ++it) {
      const int r = pool[UniformIndex(static_cast<int>(pool.size()), rng)];
      RunIteration(observer.seat, root.WithoutLog(), r, rng);
    }
    const Stats& s = trees_[TreeOf(observer.seat)][0].stats[observer.seat];
    const int n = root.ActionCount(observer.seat, observer.local_index);
    return std::vector<std::uint32_t>(s.visits.begin(), s.visits.begin() + n);
  }

  size_t tree_size(int tree = 0) const { return trees_.at(tree).size(); }

 private:
  int TreeOf(Seat s) const { return multi_ ? s : 0; }

  struct Step {
    int tree;
    int node;
    Seat seat;
    int action;
  };

  int SelectUcb(Stats& st, int n, std::mt19937_64& rng) const {
    for (int a = 0; a < n; ++a) ++st.avail[a];
    int untried = 0;
    for (int a = 0; a < n; ++a) untried += st.visits[a] == 0;
    if (untried > 0) {
      int k = UniformIndex(untried, rng);
      for (int a = 0; a < n; ++a) {
        if (st.visits[a] == 0 && k-- == 0) return a;
      }
    }
    int best = 0;
    double best_score = -1e300;
    for (int a = 0; a < n; ++a) {
      const double score = st.reward[a] / st.visits[a] +
                           kUctExploration * std::sqrt(std::log(static_cast<double>(st.avail[a])) / st.visits[a]);
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }

  void RunIteration(Seat observer, PublicState h, int r, std::mt19937_64& rng) {
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    const int num_trees = static_cast<int>(trees_.size());
    std::vector<int> cursor(num_trees, 0);  // -1 once a tree has been left
    path_.clear();
    while (!h.IsTerminal()) {
      JointAction actions{};
      for (Seat s = 0; s < kNumSeats; ++s) {
        if (!HasSeat(h.MovingSeats(), s)) continue;
        const int n = h.ActionCount(s, InfoSetIndex(s, rho));
        if (n <= 1) continue;
        const int t = TreeOf(s);
        if (cursor[t] >= 0) {
          actions[s] = SelectUcb(trees_[t][cursor[t]].stats[s], n, rng);
          path_.push_back(Step{t, cursor[t], s, actions[s]});
        } else {
          actions[s] = UniformIndex(n, rng);
        }
      }
      const Observation pub = PublicPart(ResolveActions(h, actions, rho));
      for (int t = 0; t < num_trees; ++t) {
        if (cursor[t] < 0) continue;
        const Seat viewer = multi_ ? t : observer;
        const bool own_hidden = HasSeat(h.MovingSeats(), viewer) && h.phase() == Phase::kMission;
        const std::uint32_t key = ViewKey(pub, own_hidden ? actions[viewer] : -1);
        int next = -1;
        for (const auto& [k, idx] : trees_[t][cursor[t]].children) {
          if (k == key) next = idx;
        }
        if (next >= 0) {
          cursor[t] = next;
        } else {
          // Expand one node, then roll out below it.
          trees_[t][cursor[t]].children.emplace_back(key, static_cast<int>(trees_[t].size()));
          trees_[t].emplace_back();
          cursor[t] = -1;
        }
      }
      h = h.Apply(pub, false);
    }
    for (const Step& st : path_) {
      Stats& s = trees_[st.tree][st.node].stats[st.seat];
      ++s.visits[st.action];
      s.reward[st.action] += TerminalUtility(h, rho, st.seat) > 0.0 ? 1.0 : 0.0;
    }
  }

  bool multi_;
  int iterations_;
  std::vector<std::vector<Node>> trees_;
  std::vector<Step> path_;
};

class IsmctsAgent : public AgentBase {
 public:
  IsmctsAgent(bool multi_observer, int iterations)
      : multi_(multi_observer), iterations_(iterations), search_(multi_observer, iterations) {}

  std::string name() const override {
    return (multi_ ? "moismcts:" : "ismcts:") + std::to_string(iterations_);
  }

  const AssignmentMask& consistent() const { return consistent_; }

  int ChooseAction(int num_actions, std::mt19937_64& rng) override {
    AVALON_CHECK(num_actions >= 1, "no legal actions");
    if (num_actions == 1) return 0;
    const std::vector<std::uint32_t> visits = search_.Search(self_, state_, consistent_, rng);
    return static_cast<int>(std::max_element(visits.begin(), visits.end()) - visits.begin());
  }

 protected:
  void OnReset() override { consistent_ = PrivateMask(self_); }
  void OnObserve(const PublicState& /*before*/, const Observation& o) override {
    consistent_ &= ObservationMask(o);
    AVALON_CHECK(consistent_.any(), "no consistent assignment left");
  }

 private:
  bool multi_;
  int iterations_;
  IsmctsSearch search_;
  AssignmentMask consistent_;
};

}  // namespace avalon
