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

#include <gtest/gtest.h>

#include <cmath>

#include "avalon/agents/lineup.hpp"
#include "avalon/eval/match.hpp"
#include "avalon/value_net.hpp"
#include "nets_util.hpp"
#include "test_util.hpp"

namespace avalon {
namespace {

using testing::RandomNets;
using testing::SharedNets;

// Independent consistency oracle: an assignment explains a log when every
// mission had at least as many spies on it as fails and every assassination
// was made by the Assassin.
bool ExplainsLog(int r, const std::vector<Observation>& log) {
  const RoleAssignment rho = RoleAssignment::FromIndex(r);
  for (const Observation& o : log) {
    if (const auto* m = std::get_if<MissionResult>(&o)) {
      if (std::popcount(static_cast<unsigned>(m->team & rho.spies())) < m->fails) return false;
    }
    if (const auto* a = std::get_if<AssassinPick>(&o)) {
      if (a->actor != rho.assassin) return false;
    }
  }
  return true;
}

std::vector<Observation> PublicLog(const std::vector<Observation>& log) {
  std::vector<Observation> out;
  for (const Observation& o : log) out.push_back(PublicPart(o));
  return out;
}

TEST(RandomAgentTest, SingletonAndFrequencies) {
  RandomAgent agent;
  agent.Reset({0, 0}, 0);
  std::mt19937_64 rng(1);
  EXPECT_EQ(agent.ChooseAction(1, rng), 0);
  std::vector<int> counts(10, 0);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) ++counts[agent.ChooseAction(10, rng)];
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(draws), 0.1, 0.02);
  int approvals = 0;
  for (int k = 0; k < draws; ++k) approvals += agent.ChooseAction(2, rng);
  EXPECT_NEAR(approvals / static_cast<double>(draws), 0.5, 0.02);
}

TEST(LogicBotTest, ConsistentSets) {
  LogicBot bot;
  bot.Reset({2, 0}, 0);
  EXPECT_EQ(bot.public_consistent().count(), 60u);
  bot.Observe(ProposalMade{SeatBit(0) | SeatBit(1)});
  bot.Observe(VoteResult{0b11111});
  bot.Observe(MissionResult{static_cast<SeatMask>(SeatBit(0) | SeatBit(1)), 2, kNoSeat});
  EXPECT_EQ(bot.public_consistent().count(), 6u);
  for (int r = 0; r < kNumAssignments; ++r) {
    EXPECT_EQ(bot.public_consistent()[r], SpiesOf(r) == (SeatBit(0) | SeatBit(1)));
  }
}

TEST(LogicBotTest, ResistanceApprovesTheLastProposal) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    LogicBot bot;
    bot.Reset({1, 0}, 0);
    // Four rejected proposals, each containing a seat other than seat 1.
    for (int p = 0; p < 4; ++p) {
      bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(p == 1 ? 0 : p) | SeatBit(4))});
      bot.Observe(VoteResult{0});
    }
    bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(3) | SeatBit(4))});
    ASSERT_TRUE(bot.state().IsLastProposal());
    EXPECT_EQ(bot.ChooseAction(2, rng), kApprove);
  }
}

TEST(LogicBotTest, ResistanceProposesItselfWithUnsuspectedSeats) {
  std::mt19937_64 rng(4);
  LogicBot bot;
  bot.Reset({0, 0}, 0);
  // A two-fail mission exposes seats 3 and 4.
  bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(3) | SeatBit(4))});
  bot.Observe(VoteResult{0b11111});
  bot.Observe(MissionResult{static_cast<SeatMask>(SeatBit(3) | SeatBit(4)), 2, kNoSeat});
  ASSERT_EQ(bot.state().proposer(), 1);
  bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(0) | SeatBit(1) | SeatBit(2))});
  bot.Observe(VoteResult{0});
  bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(0) | SeatBit(1) | SeatBit(3))});
  bot.Observe(VoteResult{0});
  bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(0) | SeatBit(1) | SeatBit(4))});
  bot.Observe(VoteResult{0});
  bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(0) | SeatBit(2) | SeatBit(4))});
  bot.Observe(VoteResult{0});
  ASSERT_EQ(bot.state().proposer(), 0);
  const auto& teams = TeamsOfSize(3);
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(teams[bot.ChooseAction(10, rng)], SeatBit(0) | SeatBit(1) | SeatBit(2));
  }
}

TEST(LogicBotTest, SpiesFailAndVoteAgainstCleanTeams) {
  std::mt19937_64 rng(5);
  const RoleAssignment rho = RoleAssignment::FromRoles(0, 1, 0, 2);
  LogicBot bot;
  bot.Reset({1, InfoSetIndex(1, rho)}, 2);
  bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(2) | SeatBit(3))});
  EXPECT_EQ(bot.ChooseAction(2, rng), kReject);
  bot.Observe(VoteResult{0});
  bot.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(1) | SeatBit(3))});
  EXPECT_EQ(bot.ChooseAction(2, rng), kApprove);
  bot.Observe(VoteResult{0b11111});
  EXPECT_EQ(bot.ChooseAction(2, rng), kFail);
}

TEST(MccfrTest, QueryBeforeTrainingFails) {
  const MccfrPolicy policy;
  EXPECT_THROW(policy.Strategy(0, 2), ContractViolation);
}

TEST(MccfrTest, StrategiesAreDistributionsAndRegretsFinite) {
  MccfrPolicy policy(9);
  policy.Train(3);
  EXPECT_EQ(policy.iterations(), 3);
  EXPECT_GT(policy.num_buckets(), 100u);
  std::vector<std::pair<std::uint64_t, int>> buckets;
  policy.ForEachBucket([&](std::uint64_t key, int n, const float* regret, const float* sum) {
    for (int a = 0; a < n; ++a) {
      ASSERT_TRUE(std::isfinite(regret[a]));
      ASSERT_TRUE(std::isfinite(sum[a]));
      ASSERT_GE(sum[a], 0.0f);
    }
    buckets.emplace_back(key, n);
  });
  for (const auto& [key, n] : buckets) {
    const std::vector<double> p = policy.Strategy(key, n);
    double total = 0.0;
    for (double x : p) {
      ASSERT_GE(x, 0.0);
      total += x;
    }
    ASSERT_NEAR(total, 1.0, 1e-6);
  }
  const auto [key, n] = buckets.front();
  EXPECT_THROW(policy.Strategy(key, n == 10 ? 2 : 10), ContractViolation);
}

TEST(MccfrTest, HistoriesEqualUnderTheAbstractionShareABucket) {
  const auto policy = TrainedMccfrPolicy(3, 11);
  MccfrAgent a(policy);
  MccfrAgent b(policy);
  a.Reset({3, 0}, 0);
  b.Reset({3, 0}, 0);
  // Same proposals and outcomes, different individual votes.
  a.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(0) | SeatBit(1))});
  b.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(0) | SeatBit(2))});
  a.Observe(VoteResult{0b00011});
  b.Observe(VoteResult{0b11000});
  a.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(1) | SeatBit(3))});
  b.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(1) | SeatBit(3))});
  EXPECT_EQ(a.CurrentBucket(), b.CurrentBucket());
  std::mt19937_64 ra(1);
  std::mt19937_64 rb(1);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(a.ChooseAction(2, ra), b.ChooseAction(2, rb));
  b.Observe(VoteResult{0b11111});
  a.Observe(VoteResult{0b00000});
  EXPECT_NE(a.CurrentBucket(), b.CurrentBucket());
}

TEST(IsmctsTest, DegenerateBanditPicksMerlin) {
  const RoleAssignment rho = RoleAssignment::FromRoles(1, 3, 3, 4);
  const InfoSetId self{3, InfoSetIndex(3, rho)};
  AssignmentMask only;
  only.set(rho.index);
  const PublicState h = PublicState::AssassinationRoot(1, 0);
  const auto candidates = AssassinationCandidates(3, 1);
  const int merlin = static_cast<int>(std::find(candidates.begin(), candidates.end(), 4) - candidates.begin());
  for (bool multi : {false, true}) {
    IsmctsSearch search(multi, 300);
    std::mt19937_64 rng(8);
    const auto visits = search.Search(self, h, only, rng);
    ASSERT_EQ(visits.size(), 3u);
    EXPECT_EQ(std::max_element(visits.begin(), visits.end()) - visits.begin(), merlin);
  }
}

TEST(IsmctsTest, DeterminizationsRespectPrivateKnowledge) {
  std::mt19937_64 rng(12);
  for (int game = 0; game < 200; ++game) {
    const testing::RandomGame g = testing::PlayRandomGame(rng);
    const std::vector<Observation> log = PublicLog(g.split_log);
    const Seat seat = testing::UniformInt(rng, 0, 4);
    const InfoSetId self{seat, InfoSetIndex(seat, g.rho)};
    for (bool multi : {false, true}) {
      IsmctsAgent agent(multi, 10);
      agent.Reset(self, g.prefixes.front().proposer());
      for (size_t k = 0; k + 1 < log.size(); ++k) agent.Observe(log[k]);
      for (int r = 0; r < kNumAssignments; ++r) {
        const bool expected = InfoSetOf(seat, r) == self.local_index &&
                              ExplainsLog(r, std::vector<Observation>(log.begin(), log.end() - 1));
        ASSERT_EQ(agent.consistent()[r], expected) << "game " << game << " r " << r;
      }
    }
  }
}

TEST(DeepRoleTest, PriorIsUniformAndDeductionZeroes) {
  DeepRoleAgent agent(3, SharedNets());
  agent.Reset({2, 0}, 0);
  for (int r = 0; r < kNumAssignments; ++r) EXPECT_NEAR(agent.belief()[r], 1.0 / kNumAssignments, 1e-15);
  agent.Observe(ProposalMade{static_cast<SeatMask>(SeatBit(0) | SeatBit(1))});
  agent.Observe(VoteResult{0b11111});
  agent.Observe(MissionResult{static_cast<SeatMask>(SeatBit(0) | SeatBit(1)), 2, kNoSeat});
  double total = 0.0;
  for (int r = 0; r < kNumAssignments; ++r) {
    if (SpiesOf(r) != (SeatBit(0) | SeatBit(1))) {
      EXPECT_EQ(agent.belief()[r], 0.0);
    } else {
      EXPECT_GT(agent.belief()[r], 0.0);
    }
    total += agent.belief()[r];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW(agent.Observe(VoteResult{0}), ContractViolation);
}

TEST(DeepRoleTest, AssassinFollowsMerlinBelief) {
  const Seat assassin = 0;
  const Seat partner = 1;
  const auto candidates = AssassinationCandidates(assassin, partner);
  const std::array<double, 3> merlin_p{0.7, 0.2, 0.1};
  JointBelief b{};
  for (int k = 0; k < 3; ++k) b[RoleAssignment::FromRoles(assassin, partner, assassin, candidates[k]).index] = merlin_p[k];
  const RoleAssignment truth = RoleAssignment::FromRoles(assassin, partner, assassin, candidates[0]);
  const InfoSetId self{assassin, InfoSetIndex(assassin, truth)};
  const PublicState h = PublicState::AssassinationRoot(0, 2);

  // Oracle: the exact subgame value of each pick is the Merlin marginal.
  const int best = static_cast<int>(std::max_element(merlin_p.begin(), merlin_p.end()) - merlin_p.begin());
  DeepRoleAgent agent(30, SharedNets());
  agent.ResetAt(self, h, b);
  std::mt19937_64 rng(21);
  int hits = 0;
  const int n = 1000;
  for (int k = 0; k < n; ++k) hits += agent.ChooseAction(3, rng) == best;
  EXPECT_GE(hits, 0.9 * n);
  EXPECT_EQ(agent.cache().size(), 1u);
}

TEST(DeepRoleTest, DeterministicUnderFixedSeeds) {
  const std::vector<AgentSpec> lineup = ParseLineup("deeprole:3,deeprole:3,random,logic,deeprole:3");
  AgentContext ctx{SharedNets()};
  std::vector<MatchRecord> runs;
  for (int rep = 0; rep < 2; ++rep) {
    auto agents = MakeAgents(lineup, ctx);
    runs.push_back(PlayMatch(Pointers(agents), 5, 0, DealFor(5, 0)));
  }
  EXPECT_EQ(runs[0].log, runs[1].log);
  EXPECT_EQ(runs[0].won, runs[1].won);
}

TEST(DeepRoleTest, BeliefStaysNormalizedAndReachBounded) {
  // Seat 0 is DeepRole; probe its state after every observation.
  const std::vector<AgentSpec> lineup = ParseLineup("deeprole:2,random,random,random,random");
  AgentContext ctx{SharedNets()};
  for (std::uint64_t game = 0; game < 3; ++game) {
    auto agents = MakeAgents(lineup, ctx);
    const MatchRecord rec = PlayMatch(Pointers(agents), 9, game, DealFor(9, game));
    DeepRoleAgent probe(2, SharedNets());
    const RoleAssignment rho = RoleAssignment::FromIndex(rec.deal.assignment);
    probe.Reset({0, InfoSetIndex(0, rho)}, rec.deal.first_proposer);
    for (const Observation& o : rec.log) {
      probe.Observe(o);
      EXPECT_TRUE(IsNormalized(probe.belief(), 1e-9));
      for (int r = 0; r < kNumAssignments; ++r) {
        if (!ExplainsLog(r, {o})) {
          EXPECT_EQ(probe.belief()[r], 0.0);
        }
      }
    }
    const auto* played = dynamic_cast<const DeepRoleAgent*>(agents[0].get());
    ASSERT_NE(played, nullptr);
    EXPECT_GT(played->own_reach(), 0.0);
    EXPECT_LE(played->own_reach(), 1.0);
    EXPECT_EQ(probe.belief(), played->belief());
  }
}

TEST(DeepRoleTest, MissingNetworksAreAConfigError) {
  EXPECT_THROW(MakeAgents(ParseLineup("deeprole:3,random,random,random,random"), AgentContext{}), ConfigError);
  DeepRoleAgent agent(3, std::make_shared<NetworkOracle>());
  agent.Reset({0, 0}, 0);
  std::mt19937_64 rng(1);
  EXPECT_THROW(agent.ChooseAction(10, rng), ConfigError);
}

TEST(LineupTest, ParsesSpecs) {
  const auto lineup = ParseLineup("deeprole:30,random,logic,ismcts:10000,deeprole");
  EXPECT_EQ(lineup[0], (AgentSpec{"deeprole", 30}));
  EXPECT_EQ(lineup[1], (AgentSpec{"random", 0}));
  EXPECT_EQ(lineup[3], (AgentSpec{"ismcts", 10000}));
  EXPECT_EQ(lineup[4], (AgentSpec{"deeprole", 30}));
  EXPECT_EQ(LineupString(lineup), "deeprole:30,random,logic,ismcts:10000,deeprole:30");
  EXPECT_EQ(ParseAgentSpec("mccfr").param, kDefaultMccfrIterations);
  EXPECT_EQ(ParseAgentSpec("moismcts:5").kind, "moismcts");
  for (const char* bad : {"deeprole:-1", "deeprole:0", "deeprole:x", "random:3", "gpt", "", "ismcts:1e3"}) {
    EXPECT_THROW(ParseAgentSpec(bad), ConfigError) << bad;
  }
  EXPECT_THROW(ParseLineup("random,random"), ConfigError);
  EXPECT_THROW(ParseLineup("random,random,random,random,random,"), ConfigError);
}

// Two deals that look the same to a seat must draw the same decisions from
// that seat's agent when its random stream is the same.
TEST(HygieneTest, SameInformationSetSameDecisions) {
  std::mt19937_64 rng(31);
  AgentContext ctx{SharedNets()};
  const std::vector<std::string> kinds{"random", "logic", "mccfr:3", "ismcts:30", "moismcts:30", "deeprole:2"};
  int compared = 0;
  for (int game = 0; game < 12; ++game) {
    const testing::RandomGame g = testing::PlayRandomGame(rng);
    const std::vector<Observation> log = PublicLog(g.split_log);
    const Seat seat = testing::UniformInt(rng, 0, 4);
    const int local = InfoSetIndex(seat, g.rho);
    int other = -1;
    for (int r = 0; r < kNumAssignments; ++r) {
      if (r != g.rho.index && InfoSetOf(seat, r) == local && ExplainsLog(r, log)) other = r;
    }
    if (other < 0) continue;
    for (const std::string& kind : kinds) {
      std::vector<std::vector<int>> decisions(2);
      for (int side = 0; side < 2; ++side) {
        const int r = side == 0 ? g.rho.index : other;
        auto agents = MakeAgents({ParseAgentSpec(kind)}, ctx);
        Agent& agent = *agents[0];
        agent.Reset({seat, InfoSetOf(seat, r)}, g.prefixes.front().proposer());
        std::mt19937_64 seat_rng(100 + game);
        for (size_t k = 0; k < log.size(); ++k) {
          const PublicState& h = g.prefixes[k];
          const int n = h.ActionCount(seat, InfoSetOf(seat, r));
          if (HasSeat(h.MovingSeats(), seat) && n > 1) decisions[side].push_back(agent.ChooseAction(n, seat_rng));
          agent.Observe(log[k]);
        }
      }
      EXPECT_EQ(decisions[0], decisions[1]) << kind;
      ++compared;
    }
  }
  EXPECT_GT(compared, 0);
}

void CheckRecord(const MatchRecord& rec) {
  const RoleAssignment rho = RoleAssignment::FromIndex(rec.deal.assignment);
  const PublicState end = Replay(rec.deal.first_proposer, rec.log);
  ASSERT_TRUE(end.IsTerminal());
  ASSERT_EQ(WinningTeam(end, rho), rec.winner);
  for (Seat s = 0; s < kNumSeats; ++s) ASSERT_EQ(rec.won[s], TerminalUtility(end, rho, s) > 0.0);
}

TEST(CompletionTest, TenThousandMixedMatches) {
  const std::vector<std::string> kinds{"random", "logic", "mccfr:3", "ismcts:8", "moismcts:8"};
  std::mt19937_64 rng(41);
  AgentContext ctx;
  for (std::uint64_t game = 0; game < 10000; ++game) {
    std::vector<AgentSpec> lineup;
    for (int s = 0; s < kNumSeats; ++s) lineup.push_back(ParseAgentSpec(kinds[testing::UniformInt(rng, 0, 4)]));
    auto agents = MakeAgents(lineup, ctx);
    CheckRecord(PlayMatch(Pointers(agents), 41, game, DealFor(41, game)));
  }
}

TEST(CompletionTest, MatchesWithDeepRoleSeats) {
  const std::vector<std::string> kinds{"deeprole:2", "random", "logic", "mccfr:3", "ismcts:8", "moismcts:8"};
  std::mt19937_64 rng(43);
  AgentContext ctx{SharedNets()};
  for (std::uint64_t game = 0; game < 40; ++game) {
    std::vector<AgentSpec> lineup{ParseAgentSpec("deeprole:2")};
    for (int s = 1; s < kNumSeats; ++s) lineup.push_back(ParseAgentSpec(kinds[testing::UniformInt(rng, 0, 5)]));
    std::shuffle(lineup.begin(), lineup.end(), rng);
    auto agents = MakeAgents(lineup, ctx);
    CheckRecord(PlayMatch(Pointers(agents), 43, game, DealFor(43, game)));
  }
}

}  // namespace
}  // namespace avalon
