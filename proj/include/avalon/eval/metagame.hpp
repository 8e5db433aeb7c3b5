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

// Symmetric empirical meta-games over agent types and their replicator
// dynamics. A profile is the number of seats taken by each strategy; its
// payoff for strategy i is the probability that one seat of type i wins.
//
// Payoff file (JSON):
//   {"strategies": ["deeprole:30", "logic", ...],
//    "profiles": [{"counts": [2, 3, ...], "games": 1000, "payoffs": [0.41, 0.63, ...]}, ...]}
// Payoffs of strategies absent from a profile are written as null.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "avalon/eval/tournament.hpp"
#include "json.hpp"

namespace avalon {

using Profile = std::vector<int>;

// All count vectors of `m` strategies summing to `total`, in lexicographic
// order.
inline std::vector<Profile> Compositions(int m, int total) {
  AVALON_CHECK(m >= 1 && total >= 0, "bad composition shape");
  std::vector<Profile> out;
  Profile c(m, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == m - 1) {
      c[i] = left;
      out.push_back(c);
      return;
    }
    for (int k = left; k >= 0; --k) {
      c[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, total);
  return out;
}

inline double Multinomial(const Profile& counts) {
  int n = 0;
  double out = 1.0;
  for (int c : counts) {
    for (int k = 1; k <= c; ++k) out *= static_cast<double>(++n) / k;
  }
  return out;
}

class MetaGame {
 public:
  struct Entry {
    std::int64_t games = 0;
    std::vector<std::optional<double>> payoffs;
  };

  MetaGame() = default;
  explicit MetaGame(std::vector<AgentSpec> strategies) : strategies_(std::move(strategies)) {
    if (strategies_.empty()) throw ConfigError("a meta-game needs at least one strategy");
  }

  int size() const { return static_cast<int>(strategies_.size()); }
  const std::vector<AgentSpec>& strategies() const { return strategies_; }
  const std::map<Profile, Entry>& profiles() const { return profiles_; }

  void Set(const Profile& counts, std::int64_t games, std::vector<std::optional<double>> payoffs) {
    CheckProfile(counts);
    if (static_cast<int>(payoffs.size()) != size()) throw FormatError("payoff vector has the wrong length");
    for (int i = 0; i < size(); ++i) {
      if ((counts[i] > 0) != payoffs[i].has_value()) {
        throw FormatError("payoffs must be given exactly for strategies present in the profile");
      }
      if (payoffs[i] && !(*payoffs[i] >= 0.0 && *payoffs[i] <= 1.0)) throw FormatError("payoff outside [0, 1]");
    }
    profiles_[counts] = Entry{games, std::move(payoffs)};
  }

  // Payoff of one seat of strategy i in the profile.
  double Payoff(const Profile& counts, int i) const {
    const auto it = profiles_.find(counts);
    if (it == profiles_.end()) throw ContractViolation("meta-game profile missing");
    AVALON_CHECK(it->second.payoffs[i].has_value(), "strategy absent from profile");
    return *it->second.payoffs[i];
  }

  bool Complete() const { return profiles_.size() == Compositions(size(), kNumSeats).size(); }

  // Expected payoff of each strategy against 4 opponents drawn iid from x.
  std::vector<double> Fitness(const std::vector<double>& x) const {
    CheckMixture(x);
    std::vector<double> f(size(), 0.0);
    for (const Profile& opp : Compositions(size(), kNumSeats - 1)) {
      double w = Multinomial(opp);
      for (int j = 0; j < size(); ++j) w *= std::pow(x[j], opp[j]);
      if (w == 0.0) continue;
      for (int i = 0; i < size(); ++i) {
        Profile full = opp;
        ++full[i];
        f[i] += w * Payoff(full, i);
      }
    }
    return f;
  }

  // x_i (f_i(x) - sum_j x_j f_j(x)).
  std::vector<double> ReplicatorGradient(const std::vector<double>& x) const {
    const std::vector<double> f = Fitness(x);
    double mean = 0.0;
    for (int j = 0; j < size(); ++j) mean += x[j] * f[j];
    std::vector<double> g(size());
    for (int i = 0; i < size(); ++i) g[i] = x[i] * (f[i] - mean);
    return g;
  }

  void CheckMixture(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != size()) throw ContractViolation("mixture has the wrong length");
    double total = 0.0;
    for (double v : x) {
      if (!(v >= -1e-9)) throw ContractViolation("mixture off the simplex");
      total += v;
    }
    if (!(std::abs(total - 1.0) <= 1e-9)) throw ContractViolation("mixture off the simplex");
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["strategies"] = nlohmann::json::array();
    for (const AgentSpec& s : strategies_) j["strategies"].push_back(s.ToString());
    j["profiles"] = nlohmann::json::array();
    for (const auto& [counts, e] : profiles_) {
      nlohmann::json p = {{"counts", counts}, {"games", e.games}, {"payoffs", nlohmann::json::array()}};
      for (const auto& v : e.payoffs) p["payoffs"].push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
      j["profiles"].push_back(p);
    }
    return j;
  }

  static MetaGame FromJson(const nlohmann::json& j) {
    try {
      std::vector<AgentSpec> strategies;
      for (const auto& s : j.at("strategies")) strategies.push_back(ParseAgentSpec(s.get<std::string>()));
      MetaGame g(std::move(strategies));
      for (const auto& p : j.at("profiles")) {
        const Profile counts = p.at("counts").get<Profile>();
        std::vector<std::optional<double>> payoffs;
        for (const auto& v : p.at("payoffs")) {
          payoffs.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
        }
        g.Set(counts, p.at("games").get<std::int64_t>(), std::move(payoffs));
      }
      if (!g.Complete()) throw FormatError("payoff file does not cover every profile");
      return g;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad payoff file: ") + e.what());
    }
  }

 private:
  void CheckProfile(const Profile& counts) const {
    if (static_cast<int>(counts.size()) != size()) throw FormatError("profile has the wrong length");
    int total = 0;
    for (int c : counts) {
      if (c < 0) throw FormatError("negative count in profile");
      total += c;
    }
    if (total != kNumSeats) throw FormatError("profile counts must sum to 5");
  }

  std::vector<AgentSpec> strategies_;
  std::map<Profile, Entry> profiles_;
};

// Lineup for a profile: strategy 0 `counts[0]` times, then strategy 1, ...
inline std::vector<AgentSpec> ProfileLineup(const std::vector<AgentSpec>& strategies, const Profile& counts) {
  std::vector<AgentSpec> lineup;
  for (size_t i = 0; i < counts.size(); ++i) {
    for (int k = 0; k < counts[i]; ++k) lineup.push_back(strategies[i]);
  }
  return lineup;
}

// Estimates every profile from `games_per_profile` rotated games. Profile p
// uses seed `seed + p`.
inline MetaGame EstimateMetaGame(const std::vector<AgentSpec>& strategies, std::uint64_t games_per_profile,
                                 std::uint64_t seed, const AgentContext& ctx, int workers = 1,
                                 const std::function<void(const Profile&)>& progress = nullptr) {
  MetaGame game(strategies);
  const std::vector<Profile> profiles = Compositions(game.size(), kNumSeats);
  for (size_t p = 0; p < profiles.size(); ++p) {
    const Profile& counts = profiles[p];
    const TournamentResult t =
        RunTournament(ProfileLineup(strategies, counts), games_per_profile, seed + p, ctx, workers);
    std::vector<std::optional<double>> payoffs(strategies.size());
    int k = 0;
    for (size_t i = 0; i < strategies.size(); ++i) {
      if (counts[i] == 0) continue;
      WinCount c;
      for (int n = 0; n < counts[i]; ++n) c += t.entry[k++].overall;
      payoffs[i] = c.Rate();
    }
    game.Set(counts, static_cast<std::int64_t>(games_per_profile), std::move(payoffs));
    if (progress) progress(counts);
  }
  return game;
}

// Mixtures whose coordinates are multiples of `step`.
inline std::vector<std::vector<double>> SimplexGrid(int m, double step) {
  const double steps = 1.0 / step;
  const int n = static_cast<int>(std::lround(steps));
  if (!(step > 0.0) || n < 1 || std::abs(steps - n) > 1e-9) {
    throw ConfigError("grid step must divide 1 evenly");
  }
  std::vector<std::vector<double>> out;
  for (const Profile& c : Compositions(m, n)) {
    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = static_cast<double>(c[i]) / n;
    out.push_back(std::move(x));
  }
  return out;
}

// CSV rows "x_1..x_m, dx_1..dx_m" over the grid.
inline void WriteReplicatorField(std::ostream& out, const MetaGame& game, double step) {
  out.precision(17);
  for (int i = 0; i < game.size(); ++i) out << (i ? "," : "") << "x" << i;
  for (int i = 0; i < game.size(); ++i) out << ",dx" << i;
  out << "\n";
  for (const auto& x : SimplexGrid(game.size(), step)) {
    const std::vector<double> g = game.ReplicatorGradient(x);
    for (int i = 0; i < game.size(); ++i) out << (i ? "," : "") << x[i];
    for (int i = 0; i < game.size(); ++i) out << "," << g[i] + 0.0;  // no "-0"
    out << "\n";
  }
}

}  // namespace avalon
