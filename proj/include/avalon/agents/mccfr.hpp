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

// External-sampling MCCFR over an imperfect-recall abstraction. A bucket
// keeps the seat's private information set, the round, the phase (action
// sets differ by phase) and per-seat counts of failed missions joined and of
// failed proposals made. Nothing else about the history is kept.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "avalon/agents/agent.hpp"

namespace avalon {

// Public features the abstraction reads, updated from public observations.
struct AbstractHistory {
  std::array<std::uint8_t, kNumSeats> failed_missions{};
  std::array<std::uint8_t, kNumSeats> failed_proposals{};

  void Observe(const PublicState& before, const Observation& o) {
    if (const auto* v = std::get_if<VoteResult>(&o)) {
      if (!v->Approved()) ++failed_proposals[before.proposer()];
    } else if (const auto* m = std::get_if<MissionResult>(&o)) {
      if (m->fails > 0) {
        for (Seat s = 0; s < kNumSeats; ++s) {
          if (HasSeat(m->team, s)) ++failed_missions[s];
        }
      }
    }
  }
};

inline std::uint64_t BucketKey(const InfoSetId& self, const PublicState& h, const AbstractHistory& a) {
  std::uint64_t k = static_cast<std::uint64_t>(self.seat);
  k = k * kNumInfoSets + static_cast<std::uint64_t>(self.local_index);
  k = k * 5 + static_cast<std::uint64_t>(h.round());
  k = k * 5 + static_cast<std::uint64_t>(h.phase());
  for (Seat s = 0; s < kNumSeats; ++s) {
    k = k * 3 + std::min<std::uint64_t>(a.failed_missions[s], 2);
    k = k * 4 + std::min<std::uint64_t>(a.failed_proposals[s], 3);
  }
  return k;
}

class MccfrPolicy {
 public:
  explicit MccfrPolicy(std::uint64_t seed = 1) : rng_(seed) {}

  std::int64_t iterations() const { return iterations_; }
  size_t num_buckets() const { return index_.size(); }

  // One iteration is one traversal per seat of a freshly dealt game.
  void Train(std::int64_t iterations) {
    for (std::int64_t t = 0; t < iterations; ++t) {
      const int r = std::uniform_int_distribution<int>(0, kNumAssignments - 1)(rng_);
      const Seat first = std::uniform_int_distribution<int>(0, kNumSeats - 1)(rng_);
      for (Seat traverser = 0; traverser < kNumSeats; ++traverser) {
        Traverse(PublicState::Initial(first), AbstractHistory{}, r, traverser);
      }
      ++iterations_;
    }
  }

  // Average strategy at a bucket; uniform where it was never visited.
  std::vector<double> Strategy(std::uint64_t key, int n) const {
    if (iterations_ == 0) throw ContractViolation("MCCFR policy queried before training");
    std::vector<double> p(n, 1.0 / n);
    const auto it = index_.find(key);
    if (it == index_.end()) return p;
    AVALON_CHECK(it->second.n == n, "action count differs from the bucket's");
    const float* sum = &data_[it->second.offset + n];
    double total = 0.0;
    for (int a = 0; a < n; ++a) total += sum[a];
    if (total > 0.0) {
      for (int a = 0; a < n; ++a) p[a] = sum[a] / total;
    }
    return p;
  }

  // Calls fn(key, n, regrets, strategy sums) for every bucket.
  template <typename Fn>
  void ForEachBucket(Fn&& fn) const {
    for (const auto& [key, slot] : index_) {
      fn(key, static_cast<int>(slot.n), &data_[slot.offset], &data_[slot.offset + slot.n]);
    }
  }

 private:
  struct Slot {
    std::uint32_t offset = 0;
    std::uint8_t n = 0;
  };

  // Regrets then strategy sums, `n` floats each.
  std::uint32_t Offset(std::uint64_t key, int n) {
    const auto [it, inserted] = index_.try_emplace(key);
    if (inserted) {
      it->second = Slot{static_cast<std::uint32_t>(data_.size()), static_cast<std::uint8_t>(n)};
      data_.resize(data_.size() + 2 * n, 0.0f);
    }
    return it->second.offset;
  }

  void Current(std::uint32_t offset, int n, double* out) const {
    double total = 0.0;
    for (int a = 0; a < n; ++a) total += std::max(data_[offset + a], 0.0f);
    for (int a = 0; a < n; ++a) {
      out[a] = total > 0.0 ? std::max(data_[offset + a], 0.0f) / total : 1.0 / n;
    }
  }

  int Sample(const double* p, int n) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    for (int a = 0; a + 1 < n; ++a) {
      if ((u -= p[a]) < 0.0) return a;
    }
    return n - 1;
  }

  double Traverse(const PublicState& h, const AbstractHistory& hist, int r, Seat traverser) {
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    if (h.IsTerminal()) return TerminalUtility(h, rho, traverser);
    JointAction actions{};
    int own_n = 1;
    std::uint32_t own = 0;
    double sigma[kMaxActions];
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (!HasSeat(h.MovingSeats(), s)) continue;
      const int local = InfoSetIndex(s, rho);
      const int n = h.ActionCount(s, local);
      if (n <= 1) continue;
      const std::uint32_t off = Offset(BucketKey(InfoSetId{s, local}, h, hist), n);
      if (s == traverser) {
        own_n = n;
        own = off;
        continue;
      }
      Current(off, n, sigma);
      for (int a = 0; a < n; ++a) data_[off + n + a] += static_cast<float>(sigma[a]);
      actions[s] = Sample(sigma, n);
    }
    const auto child_value = [&](int a) {
      JointAction joint = actions;
      joint[traverser] = a;
      const Observation o = PublicPart(ResolveActions(h, joint, rho));
      AbstractHistory next = hist;
      next.Observe(h, o);
      return Traverse(h.Apply(o, false), next, r, traverser);
    };
    if (own_n == 1) return child_value(0);
    Current(own, own_n, sigma);
    double values[kMaxActions];
    if (h.phase() == Phase::kVote) {
      // The abstraction ignores who voted how, so a non-pivotal vote leads
      // to the same abstract subgame either way.
      JointAction approve = actions;
      approve[traverser] = kApprove;
      JointAction reject = actions;
      reject[traverser] = kReject;
      const bool pivotal = std::get<VoteResult>(ResolveActions(h, approve, rho)).Approved() !=
                           std::get<VoteResult>(ResolveActions(h, reject, rho)).Approved();
      values[kReject] = child_value(kReject);
      values[kApprove] = pivotal ? child_value(kApprove) : values[kReject];
    } else {
      for (int a = 0; a < own_n; ++a) values[a] = child_value(a);
    }
    double node_value = 0.0;
    for (int a = 0; a < own_n; ++a) node_value += sigma[a] * values[a];
    for (int a = 0; a < own_n; ++a) data_[own + a] += static_cast<float>(values[a] - node_value);
    return node_value;
  }

  std::mt19937_64 rng_;
  std::int64_t iterations_ = 0;
  std::unordered_map<std::uint64_t, Slot> index_;
  std::vector<float> data_;
};

// Trained policies shared by all agents in a process, keyed by
// (iterations, seed).
inline std::shared_ptr<const MccfrPolicy> TrainedMccfrPolicy(std::int64_t iterations, std::uint64_t seed = 1) {
  static std::mutex mu;
  static std::map<std::pair<std::int64_t, std::uint64_t>, std::shared_ptr<const MccfrPolicy>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{iterations, seed}];
  if (!slot) {
    auto policy = std::make_shared<MccfrPolicy>(seed);
    policy->Train(iterations);
    slot = std::move(policy);
  }
  return slot;
}

class MccfrAgent : public AgentBase {
 public:
  explicit MccfrAgent(std::shared_ptr<const MccfrPolicy> policy) : policy_(std::move(policy)) {}

  std::string name() const override { return "mccfr:" + std::to_string(policy_->iterations()); }

  std::uint64_t CurrentBucket() const { return BucketKey(self_, state_, history_); }

  int ChooseAction(int num_actions, std::mt19937_64& rng) override {
    AVALON_CHECK(num_actions >= 1, "no legal actions");
    const std::vector<double> p = policy_->Strategy(CurrentBucket(), num_actions);
    if (num_actions == 1) return 0;
    return std::discrete_distribution<int>(p.begin(), p.end())(rng);
  }

 protected:
  void OnReset() override { history_ = AbstractHistory{}; }
  void OnObserve(const PublicState& before, const Observation& o) override { history_.Observe(before, o); }

 private:
  std::shared_ptr<const MccfrPolicy> policy_;
  AbstractHistory history_;
};

}  // namespace avalon
