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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "avalon/value_net.hpp"
#include "gradient_check.hpp"
#include "test_util.hpp"

namespace avalon {
namespace {

using NetD = ValueNetwork<double>;

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("avalon_" + name)).string();
}

NetD Saturated(double bias) {
  NetD net(StageId{0, 0, 1}, OutputLayer::kWinProbability);
  net.params().b3.setConstant(bias);
  return net;
}

double MassOf(const JointBelief& b, Seat s, int local) {
  double m = 0.0;
  for (int r = 0; r < kNumAssignments; ++r) {
    if (InfoSetOf(s, r) == local) m += b[r];
  }
  return m;
}

TEST(ValueNetTest, CertainResistanceWinOnPointMass) {
  const NetD net = Saturated(40.0);
  const int r0 = 23;
  JointBelief b{};
  b[r0] = 1.0;
  const InfoSetValues v = net.Forward(2, b);
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      const double expected = local == InfoSetOf(s, r0) ? (IsSpyIn(s, r0) ? -1.0 : 1.0) : 0.0;
      EXPECT_EQ(v[s][local], expected);
    }
  }
}

TEST(ValueNetTest, CertainResistanceWinOnUniformBelief) {
  const InfoSetValues v = Saturated(40.0).Forward(0, UniformBelief());
  for (Seat s = 0; s < kNumSeats; ++s) {
    EXPECT_NEAR(v[s][0], 24.0 / 60, 1e-15);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(v[s][k], 2.0 / 60, 1e-15);
    for (int k = 7; k < 15; ++k) EXPECT_NEAR(v[s][k], -3.0 / 60, 1e-15);
  }
}

TEST(ValueNetTest, CoinFlipGivesZero) {
  std::mt19937_64 rng(1);
  const InfoSetValues v = Saturated(0.0).Forward(4, testing::RandomBelief(rng));
  for (const auto& row : v) {
    for (double x : row) EXPECT_EQ(x, 0.0);
  }
}

TEST(ValueNetTest, UnnormalizedBeliefIsRejected) {
  JointBelief b = UniformBelief();
  b[0] += 0.01;
  EXPECT_THROW(Saturated(0.0).Forward(0, b), ContractViolation);
}

TEST(ValueNetTest, OutputsStayWithinBeliefMass) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    NetD net = NetD::Initialized(StageId{1, 1, 2}, OutputLayer::kWinProbability, rng);
    std::normal_distribution<double> n(0.0, 3.0);
    for (Eigen::Index k = 0; k < net.params().b3.size(); ++k) net.params().b3(k) = n(rng);
    const JointBelief b = testing::RandomBelief(rng, 0.3);
    const InfoSetValues v = net.Forward(t % kNumSeats, b);
    for (Seat s = 0; s < kNumSeats; ++s) {
      for (int local = 0; local < kNumInfoSets; ++local) {
        ASSERT_LE(std::abs(v[s][local]), MassOf(b, s, local) + 1e-15);
      }
    }
  }
}

TEST(ValueNetTest, ForwardIsDeterministicAndContinuous) {
  std::mt19937_64 rng(3);
  const NetD net = NetD::Initialized(StageId{0, 1, 3}, OutputLayer::kWinProbability, rng);
  const JointBelief b = testing::RandomBelief(rng);
  const InfoSetValues a = net.Forward(1, b);
  EXPECT_EQ(a, net.Forward(1, b));
  JointBelief c = b;
  c[0] += 1e-9;
  c[1] -= 1e-9;
  const InfoSetValues d = net.Forward(1, c);
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) EXPECT_NEAR(a[s][local], d[s][local], 1e-7);
  }
}

TEST(LesionedNetTest, ZeroFinalLayerGivesZero) {
  std::mt19937_64 rng(4);
  NetD net = NetD::Initialized(StageId{0, 0, 1}, OutputLayer::kZeroSum, rng);
  net.params().w3.setZero();
  const InfoSetValues v = net.Forward(3, testing::RandomBelief(rng));
  for (const auto& row : v) {
    for (double x : row) EXPECT_EQ(x, 0.0);
  }
}

double TotalValue(const InfoSetValues& v) {
  double total = 0.0;
  for (const auto& row : v) {
    for (double x : row) total += x;
  }
  return total;
}

TEST(LesionedNetTest, OutputsSumToZero) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const Network net = Network::Initialized(StageId{2, 0, 4}, OutputLayer::kZeroSum, rng);
    ASSERT_NEAR(TotalValue(net.Forward(t % kNumSeats, testing::RandomBelief(rng, 0.5))), 0.0, 1e-6);
  }
}

TEST(LesionedNetTest, OutputsSumToZeroWithLargeRawOutputs) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 200; ++t) {
    NetD net = NetD::Initialized(StageId{2, 0, 4}, OutputLayer::kZeroSum, rng);
    std::normal_distribution<double> n(0.0, 2.0);
    for (Eigen::Index k = 0; k < net.params().b3.size(); ++k) net.params().b3(k) = n(rng);
    ASSERT_NEAR(TotalValue(net.Forward(t % kNumSeats, testing::RandomBelief(rng, 0.5))), 0.0, 1e-12);
  }
}

TEST(GradientCheckTest, WinLayer) {
  EXPECT_LT(testing::GradientCheckError(OutputLayer::kWinProbability, 11), 1e-4);
}

TEST(GradientCheckTest, ZeroSumLayer) { EXPECT_LT(testing::GradientCheckError(OutputLayer::kZeroSum, 12), 1e-4); }

std::vector<TrainingExample> TeacherData(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetD teacher = NetD::Initialized(StageId{0, 0, 1}, OutputLayer::kWinProbability, rng);
  teacher.params().w3 *= 4.0;
  std::vector<TrainingExample> data(count);
  for (auto& e : data) {
    e.proposer = testing::UniformInt(rng, 0, 4);
    e.belief = testing::RandomBelief(rng, 0.3);
    e.target = teacher.Forward(e.proposer, e.belief);
  }
  return data;
}

TEST(TrainingTest, MemorizesOneExample) {
  std::vector<TrainingExample> data = TeacherData(1, 20);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.batch_size = 1;
  const TrainResult r = TrainNetwork(data, StageId{0, 0, 1}, OutputLayer::kWinProbability, cfg);
  EXPECT_LT(r.curve.back().train, 1e-4);
  EXPECT_LT(r.best_validation, 1e-4);
}

TEST(TrainingTest, LossTrendsDownOverFiftyEpochs) {
  const std::vector<TrainingExample> data = TeacherData(1000, 21);
  for (OutputLayer layer : {OutputLayer::kWinProbability, OutputLayer::kZeroSum}) {
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch_size = 512;
    const TrainResult r = TrainNetwork(data, StageId{0, 0, 1}, layer, cfg);
    ASSERT_EQ(r.curve.size(), 50u);
    int increases = 0;
    for (size_t k = 1; k < r.curve.size(); ++k) {
      if (r.curve[k].train > r.curve[k - 1].train) {
        ++increases;
        // Noise is tolerated for one epoch, not two in a row.
        if (k >= 2) {
          EXPECT_LE(r.curve[k].train, r.curve[k - 2].train) << OutputLayerName(layer) << " epoch " << k;
        }
      }
    }
    EXPECT_LT(r.curve.back().train, 0.5 * r.curve.front().train) << OutputLayerName(layer);
    EXPECT_LE(increases, 10);
  }
}

TEST(TrainingTest, ReturnsBestValidationWeights) {
  const std::vector<TrainingExample> data = TeacherData(300, 22);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 32;
  const TrainResult r = TrainNetwork(data, StageId{1, 2, 3}, OutputLayer::kWinProbability, cfg);
  double best = 1e9;
  int best_epoch = 0;
  for (const EpochLoss& e : r.curve) {
    if (e.validation < best) {
      best = e.validation;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_EQ(r.best_validation, best);
  EXPECT_EQ(r.network.stage(), (StageId{1, 2, 3}));
  EXPECT_THROW(TrainNetwork({}, StageId{}, OutputLayer::kWinProbability, cfg), ConfigError);
}

TEST(TrainingTest, NonFiniteLossAborts) {
  std::vector<TrainingExample> data = TeacherData(20, 23);
  data[3].target[0][0] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 2;
  EXPECT_THROW(TrainNetwork(data, StageId{}, OutputLayer::kWinProbability, cfg), TrainingError);
}

TEST(WeightFileTest, RoundTripIsBitExact) {
  std::mt19937_64 rng(30);
  for (OutputLayer layer : {OutputLayer::kWinProbability, OutputLayer::kZeroSum}) {
    const Network net = Network::Initialized(StageId{2, 1, 5}, layer, rng);
    const std::string path = TempPath("roundtrip.bin");
    net.Save(path);
    const Network back = Network::Load(path, StageId{2, 1, 5});
    EXPECT_EQ(back.layer(), layer);
    EXPECT_EQ(back.params().w1, net.params().w1);
    EXPECT_EQ(back.params().w3, net.params().w3);
    EXPECT_EQ(back.params().b2, net.params().b2);
    const JointBelief b = testing::RandomBelief(rng);
    EXPECT_EQ(back.Forward(2, b), net.Forward(2, b));
    std::filesystem::remove(path);
  }
}

TEST(WeightFileTest, CorruptFilesAreRejected) {
  std::mt19937_64 rng(31);
  const Network net = Network::Initialized(StageId{0, 2, 2}, OutputLayer::kWinProbability, rng);
  const std::string path = TempPath("corrupt.bin");
  net.Save(path);
  EXPECT_THROW(Network::Load(path, StageId{0, 2, 3}), ConfigError);
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 7);
  EXPECT_THROW(Network::Load(path), FormatError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "XXXX0000";
  }
  EXPECT_THROW(Network::Load(path), FormatError);
  net.Save(path);
  {
    std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
    io.seekp(4);
    io.put(9);
  }
  EXPECT_THROW(Network::Load(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(Network::Load(TempPath("missing.bin")), ConfigError);
}

TEST(NetworkOracleTest, BatchMatchesSingleForward) {
  std::mt19937_64 rng(40);
  NetworkOracle oracle;
  oracle.Add(Network::Initialized(StageId{0, 0, 2}, OutputLayer::kWinProbability, rng));
  EXPECT_TRUE(oracle.Has(StageId{0, 0, 2}));
  EXPECT_FALSE(oracle.Has(StageId{0, 0, 3}));
  std::vector<LeafQuery> queries(7);
  for (auto& q : queries) {
    q.proposer = testing::UniformInt(rng, 0, 4);
    q.belief = testing::RandomBelief(rng);
  }
  std::vector<InfoSetValues> out(queries.size());
  oracle.EvaluateBatch(StageId{0, 0, 2}, queries, out);
  for (size_t k = 0; k < queries.size(); ++k) {
    const InfoSetValues single = oracle.at(StageId{0, 0, 2}).Forward(queries[k].proposer, queries[k].belief);
    for (Seat s = 0; s < kNumSeats; ++s) {
      for (int local = 0; local < kNumInfoSets; ++local) EXPECT_NEAR(out[k][s][local], single[s][local], 1e-6);
    }
  }
  EXPECT_THROW(oracle.at(StageId{1, 1, 1}), ConfigError);
}

}  // namespace
}  // namespace avalon
