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

// Agent specification strings ("deeprole:30", "random", "logic",
// "mccfr:200", "ismcts:10000", "moismcts:10000") and the factory that
// turns them into agents.

#pragma once

#include <charconv>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "avalon/agents/agent.hpp"
#include "avalon/agents/deeprole.hpp"
#include "avalon/agents/ismcts.hpp"
#include "avalon/agents/mccfr.hpp"

namespace avalon {

struct AgentSpec {
  std::string kind;
  std::int64_t param = 0;

  std::string ToString() const { return param == 0 ? kind : kind + ":" + std::to_string(param); }
  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

inline constexpr int kDefaultDeepRoleIterations = 30;
inline constexpr int kDefaultSearchIterations = 10000;
inline constexpr std::int64_t kDefaultMccfrIterations = 200;

inline AgentSpec ParseAgentSpec(const std::string& text) {
  const size_t colon = text.find(':');
  AgentSpec spec;
  spec.kind = text.substr(0, colon);
  const bool has_param = colon != std::string::npos;
  if (has_param) {
    const std::string p = text.substr(colon + 1);
    const auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), spec.param);
    if (ec != std::errc() || end != p.data() + p.size() || p.empty() || spec.param <= 0) {
      throw ConfigError("bad agent parameter in '" + text + "'");
    }
  }
  if (spec.kind == "random" || spec.kind == "logic") {
    if (has_param) throw ConfigError("agent '" + spec.kind + "' takes no parameter");
    return spec;
  }
  if (spec.kind == "deeprole") {
    if (!has_param) spec.param = kDefaultDeepRoleIterations;
    if (spec.param > 100000) throw ConfigError("deeprole budget too large in '" + text + "'");
    return spec;
  }
  if (spec.kind == "ismcts" || spec.kind == "moismcts") {
    if (!has_param) spec.param = kDefaultSearchIterations;
    if (spec.param > 10000000) throw ConfigError("search budget too large in '" + text + "'");
    return spec;
  }
  if (spec.kind == "mccfr") {
    if (!has_param) spec.param = kDefaultMccfrIterations;
    if (spec.param > 5000) throw ConfigError("mccfr budget too large in '" + text + "'");
    return spec;
  }
  throw ConfigError("unknown agent '" + text + "' (deeprole, random, logic, mccfr, ismcts, moismcts)");
}

inline std::vector<AgentSpec> ParseAgentList(const std::string& text) {
  std::vector<AgentSpec> out;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(ParseAgentSpec(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<AgentSpec> ParseLineup(const std::string& text) {
  std::vector<AgentSpec> out = ParseAgentList(text);
  if (out.size() != kNumSeats) {
    throw ConfigError("a lineup needs exactly 5 agents, got " + std::to_string(out.size()));
  }
  return out;
}

inline std::string LineupString(const std::vector<AgentSpec>& lineup) {
  std::string out;
  for (const AgentSpec& s : lineup) out += (out.empty() ? "" : ",") + s.ToString();
  return out;
}

// Shared resources for building agents.
struct AgentContext {
  std::shared_ptr<const ValueOracle> nets;
  std::uint64_t mccfr_seed = 1;
};

// Builds the agents of one game. DeepRole seats with the same budget share
// one solve cache for the game.
inline std::vector<std::unique_ptr<Agent>> MakeAgents(const std::vector<AgentSpec>& specs,
                                                      const AgentContext& ctx) {
  std::vector<std::unique_ptr<Agent>> out;
  std::map<std::int64_t, std::shared_ptr<SolveCache>> caches;
  for (const AgentSpec& spec : specs) {
    if (spec.kind == "random") {
      out.push_back(std::make_unique<RandomAgent>());
    } else if (spec.kind == "logic") {
      out.push_back(std::make_unique<LogicBot>());
    } else if (spec.kind == "deeprole") {
      if (!ctx.nets) throw ConfigError("deeprole agents need trained networks");
      auto& cache = caches[spec.param];
      if (!cache) cache = std::make_shared<SolveCache>();
      out.push_back(std::make_unique<DeepRoleAgent>(static_cast<int>(spec.param), ctx.nets, cache));
    } else if (spec.kind == "ismcts" || spec.kind == "moismcts") {
      out.push_back(std::make_unique<IsmctsAgent>(spec.kind == "moismcts", static_cast<int>(spec.param)));
    } else if (spec.kind == "mccfr") {
      out.push_back(std::make_unique<MccfrAgent>(TrainedMccfrPolicy(spec.param, ctx.mccfr_seed)));
    } else {
      throw ConfigError("unknown agent kind " + spec.kind);
    }
  }
  return out;
}

inline std::vector<Agent*> Pointers(const std::vector<std::unique_ptr<Agent>>& agents) {
  std::vector<Agent*> out;
  for (const auto& a : agents) out.push_back(a.get());
  return out;
}

}  // namespace avalon
