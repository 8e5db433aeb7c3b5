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

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "avalon/bound.hpp"
#include "avalon/deduction.hpp"
#include "avalon/public_state.hpp"
#include "avalon/replay.hpp"
#include "avalon/roles.hpp"
#include "test_util.hpp"

namespace avalon {
namespace {

TEST(RoleAssignmentTest, SixtyDistinctAssignmentsRoundTrip) {
  std::set<std::tuple<int, int, int, int>> seen;
  for (int r = 0; r < kNumAssignments; ++r) {
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    EXPECT_TRUE(rho.Valid());
    EXPECT_EQ(RoleAssignment::FromRoles(rho.spy_high, rho.spy_low, rho.assassin,
                                        rho.merlin).index,
              r);
    seen.insert({rho.spy_low, rho.spy_high, rho.assassin, rho.merlin});
  }
  EXPECT_EQ(seen.size(), 60u);
}

TEST(RoleAssignmentTest, CanonicalIndexLayout) {
  // Pair {0,1}, assassin 0, Merlin is the lowest resistance seat 2.
  EXPECT_EQ(RoleAssignment::FromRoles(0, 1, 0, 2).index, 0);
  EXPECT_EQ(RoleAssignment::FromRoles(0, 1, 1, 2).index, 3);
  EXPECT_EQ(RoleAssignment::FromRoles(0, 1, 0, 4).index, 2);
  // Pair {3,4} has rank 9.
  EXPECT_EQ(RoleAssignment::FromRoles(3, 4, 4, 2).index, 9 * 6 + 3 + 2);
}

TEST(InfoSetTest, CountsPerCell) {
  for (Seat s = 0; s < kNumSeats; ++s) {
    std::array<int, kNumInfoSets> count{};
    for (int r = 0; r < kNumAssignments; ++r) ++count[InfoSetOf(s, r)];
    EXPECT_EQ(count[0], 24);
    for (int k = 1; k <= 6; ++k) EXPECT_EQ(count[k], 2) << k;
    for (int k = 7; k <= 14; ++k) EXPECT_EQ(count[k], 3) << k;
  }
}

TEST(InfoSetTest, MerlinSeatFourSeeingTwoThree) {
  EXPECT_EQ(InfoSetIndex(4, RoleAssignment::FromRoles(2, 3, 2, 4)), 6);
  EXPECT_EQ(InfoSetIndex(0, RoleAssignment::FromRoles(1, 2, 1, 0)), 1);
}

TEST(InfoSetTest, PlainResistanceIsZero) {
  const RoleAssignment rho = RoleAssignment::FromRoles(0, 1, 0, 2);
  EXPECT_EQ(InfoSetIndex(3, rho), 0);
  EXPECT_EQ(InfoSetIndex(4, rho), 0);
}

TEST(InfoSetTest, KnowledgeMatchesAssignment) {
  for (int r = 0; r < kNumAssignments; ++r) {
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    for (Seat s = 0; s < kNumSeats; ++s) {
      const int local = InfoSetOf(s, r);
      const SeatMask known = KnownSpies(s, local);
      if (local == 0) {
        EXPECT_EQ(known, 0);
      } else {
        EXPECT_EQ(known, rho.spies());
      }
      if (IsSpyInfoSet(local)) {
        EXPECT_EQ(KnownAssassin(s, local), rho.assassin);
      }
    }
  }
}

TEST(PublicStateTest, ObservationCounts) {
  PublicState h = PublicState::Initial(0);
  EXPECT_EQ(Observations(h).size(), 10u);
  h = h.Apply(ProposalMade{0b00011});
  EXPECT_EQ(Observations(h).size(), 32u);
  h = h.Apply(VoteResult{0b00111});
  ASSERT_EQ(h.phase(), Phase::kMission);
  const auto mission = Observations(h);
  ASSERT_EQ(mission.size(), 4u);
  EXPECT_EQ(std::get<MissionResult>(mission[0]), (MissionResult{0b00011, 0, kNoSeat}));
  EXPECT_EQ(std::get<MissionResult>(mission[1]), (MissionResult{0b00011, 1, 0}));
  EXPECT_EQ(std::get<MissionResult>(mission[2]), (MissionResult{0b00011, 1, 1}));
  EXPECT_EQ(std::get<MissionResult>(mission[3]), (MissionResult{0b00011, 2, kNoSeat}));
  EXPECT_EQ(Observations(PublicState::AssassinationRoot(0, 0)).size(), 20u);
}

TEST(PublicStateTest, TerminalHasNoObservations) {
  PublicState h = PublicState::SituationRoot(0, 2, 1, 0);
  h = h.Apply(ProposalMade{0b00011}).Apply(VoteResult{0b11111});
  h = h.Apply(MissionResult{0b00011, 1, kNoSeat});
  ASSERT_TRUE(h.IsTerminal());
  EXPECT_THROW(Observations(h), ContractViolation);
}

TEST(PublicStateTest, TeamSizesFollowSchedule) {
  for (int s = 0; s <= 2; ++s) {
    for (int f = 0; f <= 2; ++f) {
      EXPECT_EQ(PublicState::SituationRoot(s, f, 1, 0).team_size(), kTeamSizes[s + f]);
    }
  }
}

TEST(PublicStateTest, RejectsIllegalObservations) {
  const PublicState h = PublicState::Initial(0);
  EXPECT_THROW(h.Apply(ProposalMade{0b00111}), ContractViolation);
  EXPECT_THROW(h.Apply(VoteResult{0}), ContractViolation);
  const PublicState v = h.Apply(ProposalMade{0b00011});
  EXPECT_THROW(v.Apply(ProposalMade{0b00011}), ContractViolation);
  const PublicState m = v.Apply(VoteResult{0b11100});
  EXPECT_THROW(m.Apply(MissionResult{0b00101, 0, kNoSeat}), ContractViolation);
  EXPECT_THROW(m.Apply(MissionResult{0b00011, 1, 3}), ContractViolation);
}

TEST(PublicStateTest, ProposerRotatesAfterEveryProposal) {
  PublicState h = PublicState::Initial(3);
  h = h.Apply(ProposalMade{0b00011}).Apply(VoteResult{0});
  EXPECT_EQ(h.proposer(), 4);
  EXPECT_EQ(h.proposal_num(), 2);
  h = h.Apply(ProposalMade{0b00011}).Apply(VoteResult{0b11111});
  h = h.Apply(MissionResult{0b00011, 0, kNoSeat});
  EXPECT_EQ(h.proposer(), 0);
  EXPECT_EQ(h.proposal_num(), 1);
  EXPECT_EQ(h.succeeds(), 1);
}

TEST(TerminalUtilityTest, ThreeFailsSpiesWin) {
  PublicState h = PublicState::SituationRoot(0, 2, 1, 0);
  h = h.Apply(ProposalMade{0b00110}).Apply(VoteResult{0b11111});
  h = h.Apply(MissionResult{0b00110, 1, kNoSeat});
  const RoleAssignment rho = RoleAssignment::FromRoles(1, 3, 1, 0);
  EXPECT_EQ(TerminalUtility(h, rho, 1), 1.0);
  EXPECT_EQ(TerminalUtility(h, rho, 3), 1.0);
  EXPECT_EQ(TerminalUtility(h, rho, 0), -1.0);
}

TEST(TerminalUtilityTest, AssassinHitsMerlin) {
  const RoleAssignment rho = RoleAssignment::FromRoles(1, 3, 1, 0);
  const PublicState hit = PublicState::AssassinationRoot(1, 0).Apply(AssassinPick{1, 0});
  EXPECT_EQ(TerminalUtility(hit, rho, 2), -1.0);
  EXPECT_EQ(TerminalUtility(hit, rho, 3), 1.0);
  const PublicState miss = PublicState::AssassinationRoot(1, 0).Apply(AssassinPick{1, 2});
  EXPECT_EQ(TerminalUtility(miss, rho, 2), 1.0);
  EXPECT_EQ(TerminalUtility(miss, rho, 0), 1.0);
  EXPECT_EQ(TerminalUtility(miss, rho, 1), -1.0);
}

TEST(TerminalUtilityTest, FifthRejectionSpiesWin) {
  PublicState h = PublicState::SituationRoot(1, 1, 5, 2);
  h = h.Apply(ProposalMade{0b00011}).Apply(VoteResult{0b00011});
  ASSERT_TRUE(h.IsTerminal());
  EXPECT_EQ(h.outcome(), Outcome::kSpyRejections);
  const RoleAssignment rho = RoleAssignment::FromIndex(17);
  for (Seat s = 0; s < kNumSeats; ++s) {
    EXPECT_EQ(TerminalUtility(h, rho, s), rho.IsSpy(s) ? 1.0 : -1.0);
  }
  EXPECT_THROW(TerminalUtility(PublicState::Initial(0), rho, 0), ContractViolation);
}

TEST(DeductionTest, VotesArePublic) {
  const PublicState h = PublicState::Initial(0).Apply(ProposalMade{0b00011});
  const Deduction d = DeduceActions(h, VoteResult{0b00011});
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      EXPECT_EQ(d.ActionOf(s, local), s < 2 ? kApprove : kReject);
    }
  }
}

TEST(DeductionTest, CleanMissionEveryoneSucceeded) {
  const PublicState h =
      PublicState::Initial(0).Apply(ProposalMade{0b00011}).Apply(VoteResult{0b11111});
  const Deduction d = DeduceActions(h, MissionResult{0b00011, 0, kNoSeat});
  for (Seat s : {0, 1}) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      EXPECT_EQ(d.ActionOf(s, local), kSucceed);
    }
  }
}

TEST(DeductionTest, AttributedSingleFail) {
  const PublicState h =
      PublicState::Initial(0).Apply(ProposalMade{0b00011}).Apply(VoteResult{0b11111});
  const Deduction d = DeduceActions(h, MissionResult{0b00011, 1, 0});
  for (int local = 0; local < kNumInfoSets; ++local) {
    if (IsSpyInfoSet(local)) {
      EXPECT_EQ(d.ActionOf(0, local), kFail);
      EXPECT_EQ(d.ActionOf(1, local), kSucceed);
    } else {
      EXPECT_EQ(d.ActionOf(0, local), kInconsistent);
      EXPECT_EQ(d.ActionOf(1, local), kSucceed);
    }
  }
}

TEST(DeductionTest, UnsplitSingleFailIsRejected) {
  const PublicState h =
      PublicState::Initial(0).Apply(ProposalMade{0b00011}).Apply(VoteResult{0b11111});
  EXPECT_THROW(DeduceActions(h, MissionResult{0b00011, 1, kNoSeat}), ContractViolation);
}

// Every joint private action profile under every assignment is explained by
// exactly one observation branch, and that branch is ResolveActions' output.
void CheckPartition(const PublicState& h) {
  const std::vector<Observation> obs = Observations(h);
  std::vector<Deduction> deductions;
  for (const Observation& o : obs) deductions.push_back(DeduceActions(h, o));
  const SeatMask movers = h.MovingSeats();
  for (int r = 0; r < kNumAssignments; ++r) {
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    std::array<int, kNumSeats> counts{};
    int profiles = 1;
    for (Seat s = 0; s < kNumSeats; ++s) {
      counts[s] = HasSeat(movers, s) ? h.ActionCount(s, InfoSetOf(s, r)) : 1;
      profiles *= counts[s];
    }
    for (int p = 0; p < profiles; ++p) {
      JointAction a{};
      int rest = p;
      for (Seat s = 0; s < kNumSeats; ++s) {
        a[s] = rest % counts[s];
        rest /= counts[s];
      }
      int matches = 0;
      int matched = -1;
      for (size_t k = 0; k < obs.size(); ++k) {
        if (!ObservationConsistent(obs[k], r)) continue;
        bool ok = true;
        for (Seat s = 0; s < kNumSeats && ok; ++s) {
          if (!HasSeat(movers, s)) continue;
          ok = deductions[k].ActionOf(s, InfoSetOf(s, r)) == a[s];
        }
        if (ok) {
          ++matches;
          matched = static_cast<int>(k);
        }
      }
      ASSERT_EQ(matches, 1) << "rho " << r << " profile " << p;
      EXPECT_EQ(obs[matched], ResolveActions(h, a, rho));
    }
  }
}

TEST(DeductionTest, BranchesPartitionProfilesProposal) {
  CheckPartition(PublicState::Initial(2));
  CheckPartition(PublicState::SituationRoot(1, 0, 3, 4));
}

TEST(DeductionTest, BranchesPartitionProfilesVote) {
  CheckPartition(PublicState::Initial(0).Apply(ProposalMade{0b10001}));
}

TEST(DeductionTest, BranchesPartitionProfilesMission) {
  for (int size : {2, 3}) {
    for (SeatMask team : TeamsOfSize(size)) {
      PublicState h = PublicState::SituationRoot(size == 2 ? 0 : 1, 0, 1, 0);
      h = h.Apply(ProposalMade{team}).Apply(VoteResult{0b11111});
      CheckPartition(h);
    }
  }
}

TEST(DeductionTest, BranchesPartitionProfilesAssassination) {
  CheckPartition(PublicState::AssassinationRoot(2, 1));
}

TEST(DeductionTest, RandomGamesDeduceTheirOwnActions) {
  std::mt19937_64 rng(11);
  for (int g = 0; g < 300; ++g) {
    PublicState h = PublicState::Initial(testing::UniformInt(rng, 0, 4));
    const RoleAssignment rho =
        RoleAssignment::FromIndex(testing::UniformInt(rng, 0, kNumAssignments - 1));
    while (!h.IsTerminal()) {
      const JointAction a = testing::RandomJointAction(h, rho, rng);
      const Observation o = ResolveActions(h, a, rho);
      ASSERT_TRUE(ObservationConsistent(o, rho.index));
      const Deduction d = DeduceActions(h, o);
      for (Seat s = 0; s < kNumSeats; ++s) {
        if (HasSeat(d.movers, s)) {
          EXPECT_EQ(d.ActionOf(s, InfoSetIndex(s, rho)), a[s]);
        }
      }
      h = h.Apply(o);
    }
  }
}

TEST(ReplayTest, ReplayReproducesState) {
  std::mt19937_64 rng(5);
  for (int g = 0; g < 200; ++g) {
    const testing::RandomGame game = testing::PlayRandomGame(rng);
    const PublicState replayed = Replay(game.state.log().empty()
                                            ? game.state.proposer()
                                            : game.prefixes.front().proposer(),
                                        game.state.log());
    EXPECT_EQ(replayed, game.state);
  }
}

TEST(ReplayTest, GamesNeverExceedTwentyFiveProposals) {
  std::mt19937_64 rng(9);
  for (int g = 0; g < 2000; ++g) {
    const testing::RandomGame game = testing::PlayRandomGame(rng);
    ASSERT_TRUE(game.state.IsTerminal());
    int proposals = 0;
    for (const Observation& o : game.state.log()) {
      proposals += std::holds_alternative<ProposalMade>(o);
    }
    EXPECT_LE(proposals, 25);
  }
}

TEST(ReplayTest, RecordRoundTripIsExact) {
  std::mt19937_64 rng(21);
  std::vector<GameRecord> records;
  for (int g = 0; g < 100; ++g) {
    const testing::RandomGame game = testing::PlayRandomGame(rng);
    GameRecord rec;
    rec.seed = rng();
    rec.assignment = game.rho.index;
    rec.first_proposer = game.prefixes.front().proposer();
    for (const Observation& o : game.state.log()) rec.log.push_back(PublicPart(o));
    records.push_back(rec);
  }
  std::stringstream io;
  WriteRecords(io, records);
  const std::string text = io.str();
  const std::vector<GameRecord> back = ReadRecords(io);
  EXPECT_EQ(back, records);
  std::stringstream again;
  WriteRecords(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(ReplayTest, CorruptRecordsAreFormatErrors) {
  EXPECT_THROW(ParseRecord("{not json"), FormatError);
  EXPECT_THROW(ParseRecord(R"({"seed":1,"assignment":60,"firstProposer":0,"log":[]})"),
               FormatError);
  EXPECT_THROW(
      ParseRecord(
          R"({"seed":1,"assignment":0,"firstProposer":0,"log":[{"kind":"vote","approve":[1,1,1,1,1]}]})"),
      FormatError);
}

TEST(BoundTest, ExactValue) {
  const BigInt b = StateSpaceLowerBound();
  EXPECT_EQ(b.str(), "12676506002282294014967032053760000000000000000000000000");
  EXPECT_EQ(b.str().size(), 56u);
  EXPECT_EQ(StateSpaceLowerBound(1), BigInt(160));
  EXPECT_EQ(StateSpaceLowerBound(2), BigInt(25600));
}

}  // namespace
}  // namespace avalon
