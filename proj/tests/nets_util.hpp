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

// Randomly initialized networks for agents that need a value oracle.

#pragma once

#include <memory>
#include <random>

#include "avalon/value_net.hpp"

namespace avalon::testing {

inline std::shared_ptr<const ValueOracle> RandomNets(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto oracle = std::make_shared<NetworkOracle>();
  for (int i = 0; i < StageId::kCount; ++i) {
    oracle->Add(Network::Initialized(StageId::FromIndex(i), OutputLayer::kWinProbability, rng));
  }
  return oracle;
}

inline const std::shared_ptr<const ValueOracle>& SharedNets() {
  static const auto nets = RandomNets(77);
  return nets;
}

}  // namespace avalon::testing
