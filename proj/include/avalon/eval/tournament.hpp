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

// Tournaments and fifth-seat comparisons. Game g of a run seats lineup entry
// k at seat (k + g) mod 5, deals roles with DealFor(seed, g) and gives seat s
// the stream MatchRng(seed, g, s), so runs are reproducible and candidates
// compared on the same seed see the same deals.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "avalon/agents/lineup.hpp"
#include "avalon/eval/match.hpp"

namespace avalon {

struct WinCount {
  std::int64_t wins = 0;
  std::int64_t games = 0;

  double Rate() const { return games == 0 ? 0.0 : static_cast<double>(wins) / games; }
  // Binomial standard error of Rate().
  double StdErr() const {
    if (games == 0) return 0.0;
    const double p = Rate();
    return std::sqrt(p * (1.0 - p) / games);
  }
  void Add(bool won) {
    wins += won ? 1 : 0;
    ++games;
  }
  WinCount& operator+=(const WinCount& o) {
    wins += o.wins;
    games += o.games;
    return *this;
  }
};

// Win counts for one agent (or one group of agents).
struct AgentStats {
  WinCount overall;
  WinCount resistance;
  WinCount spy;

  void Add(bool spy_role, bool won) {
    overall.Add(won);
    (spy_role ? spy : resistance).Add(won);
  }
  AgentStats& operator+=(const AgentStats& o) {
    overall += o.overall;
    resistance += o.resistance;
    spy += o.spy;
    return *this;
  }
};

// Seat of lineup entry k in game g.
inline Seat RotatedSeat(int k, std::uint64_t game) { return static_cast<Seat>((k + game) % kNumSeats); }

struct TournamentResult {
  std::vector<AgentSpec> lineup;
  std::uint64_t seed = 0;
  std::vector<MatchRecord> records;         // by game
  std::array<AgentStats, kNumSeats> entry;  // by lineup entry
  std::array<WinCount, kNumSeats> seat;     // by physical seat
  WinCount resistance_team;                 // games the resistance won

  // Entries grouped by spec string, in order of first appearance.
  std::vector<std::pair<std::string, AgentStats>> ByAgent() const {
    std::vector<std::pair<std::string, AgentStats>> out;
    for (int k = 0; k < kNumSeats; ++k) {
      const std::string name = lineup[k].ToString();
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == name; });
      if (it == out.end()) {
        out.emplace_back(name, entry[k]);
      } else {
        it->second += entry[k];
      }
    }
    return out;
  }
};

// Plays games [0, games) in parallel and calls on_record(record) from one
// thread at a time, in completion order.
inline void PlayGames(std::uint64_t games, int workers,
                      const std::function<MatchRecord(std::uint64_t)>& play,
                      const std::function<void(const MatchRecord&)>& on_record) {
  std::atomic<std::uint64_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  const auto work = [&] {
    for (std::uint64_t g = next++; g < games; g = next++) {
      try {
        MatchRecord rec = play(g);
        std::lock_guard<std::mutex> lock(mu);
        on_record(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = games;
      }
    }
  };
  const int n = static_cast<int>(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::max(workers, 1)), 1,
                                                           std::max<std::uint64_t>(games, 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline MatchRecord PlayRotated(const std::vector<AgentSpec>& lineup, const AgentContext& ctx, std::uint64_t seed,
                               std::uint64_t game) {
  std::vector<AgentSpec> seated(kNumSeats);
  for (int k = 0; k < kNumSeats; ++k) seated[RotatedSeat(k, game)] = lineup[k];
  auto agents = MakeAgents(seated, ctx);
  return PlayMatch(Pointers(agents), seed, game, DealFor(seed, game));
}

inline TournamentResult RunTournament(const std::vector<AgentSpec>& lineup, std::uint64_t games, std::uint64_t seed,
                                      const AgentContext& ctx, int workers = 1,
                                      const std::function<void(std::uint64_t)>& progress = nullptr) {
  if (lineup.size() != kNumSeats) throw ConfigError("a lineup needs exactly 5 agents");
  if (games < 1) throw ConfigError("a tournament needs at least one game");
  TournamentResult res;
  res.lineup = lineup;
  res.seed = seed;
  res.records.resize(games);
  std::uint64_t done = 0;
  PlayGames(
      games, workers, [&](std::uint64_t g) { return PlayRotated(lineup, ctx, seed, g); },
      [&](const MatchRecord& rec) {
        res.records[rec.game] = rec;
        if (progress) progress(++done);
      });
  for (const MatchRecord& rec : res.records) {
    const RoleAssignment rho = RoleAssignment::FromIndex(rec.deal.assignment);
    for (int k = 0; k < kNumSeats; ++k) {
      const Seat s = RotatedSeat(k, rec.game);
      res.entry[k].Add(rho.IsSpy(s), rec.won[s]);
    }
    for (Seat s = 0; s < kNumSeats; ++s) res.seat[s].Add(rec.won[s]);
    res.resistance_team.Add(rec.winner == Team::kResistance);
  }
  return res;
}

// p-value of the chi-squared test of homogeneity of win rates across seats
// (5 x 2 table of wins and losses).
inline double SeatExchangeabilityPValue(const std::array<WinCount, kNumSeats>& seats) {
  double wins = 0.0;
  double total = 0.0;
  for (const WinCount& c : seats) {
    wins += static_cast<double>(c.wins);
    total += static_cast<double>(c.games);
  }
  AVALON_CHECK(total > 0.0, "no games");
  const double p = wins / total;
  if (p <= 0.0 || p >= 1.0) return 1.0;
  double stat = 0.0;
  for (const WinCount& c : seats) {
    const double n = static_cast<double>(c.games);
    const double ew = n * p;
    const double el = n * (1.0 - p);
    stat += std::pow(c.wins - ew, 2) / ew + std::pow((n - c.wins) - el, 2) / el;
  }
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(kNumSeats - 1), stat));
}

inline std::string FormatRate(const WinCount& c) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << c.Rate() << " +- " << c.StdErr();
  return out.str();
}

// Plain-text win table.
inline std::string FormatTournament(const TournamentResult& r) {
  std::ostringstream out;
  out << "lineup " << LineupString(r.lineup) << "  games " << r.records.size() << "  seed " << r.seed << "\n";
  out << std::left << std::setw(20) << "agent" << std::setw(10) << "games" << std::setw(22) << "win"
      << std::setw(22) << "resistance win" << "spy win\n";
  for (const auto& [name, s] : r.ByAgent()) {
    out << std::left << std::setw(20) << name << std::setw(10) << s.overall.games << std::setw(22)
        << FormatRate(s.overall) << std::setw(22) << FormatRate(s.resistance) << FormatRate(s.spy) << "\n";
  }
  out << "resistance team win " << FormatRate(r.resistance_team) << "\n";
  out << "seat exchangeability p " << std::setprecision(4) << SeatExchangeabilityPValue(r.seat) << "\n";
  return out.str();
}

// Fifth-seat comparison: the preset agents fill four seats and each candidate
// takes the fifth, on the same deals and seat streams.
struct FifthSeatResult {
  std::vector<AgentSpec> preset;
  std::vector<AgentSpec> candidates;
  std::uint64_t seed = 0;
  std::uint64_t games = 0;
  std::vector<AgentStats> stats;             // by candidate
  std::vector<std::vector<std::uint8_t>> won;  // [candidate][game]
};

// The candidate occupies lineup entry 4, so its seat rotates with the game.
inline FifthSeatResult RunFifthSeat(const std::vector<AgentSpec>& preset, const std::vector<AgentSpec>& candidates,
                                    std::uint64_t games, std::uint64_t seed, const AgentContext& ctx,
                                    int workers = 1,
                                    const std::function<void(size_t, std::uint64_t)>& progress = nullptr) {
  if (preset.size() != kNumSeats - 1) throw ConfigError("a fifth-seat preset needs exactly 4 agents");
  if (candidates.empty()) throw ConfigError("no fifth-seat candidates");
  if (games < 1) throw ConfigError("a comparison needs at least one game");
  FifthSeatResult res;
  res.preset = preset;
  res.candidates = candidates;
  res.seed = seed;
  res.games = games;
  for (size_t c = 0; c < candidates.size(); ++c) {
    std::vector<AgentSpec> lineup = preset;
    lineup.push_back(candidates[c]);
    std::vector<std::uint8_t> won(games);
    std::vector<std::uint8_t> spy(games);
    std::uint64_t done = 0;
    PlayGames(
        games, workers, [&](std::uint64_t g) { return PlayRotated(lineup, ctx, seed, g); },
        [&](const MatchRecord& rec) {
          const Seat s = RotatedSeat(kNumSeats - 1, rec.game);
          won[rec.game] = rec.won[s] ? 1 : 0;
          spy[rec.game] = RoleAssignment::FromIndex(rec.deal.assignment).IsSpy(s) ? 1 : 0;
          if (progress) progress(c, ++done);
        });
    AgentStats stats;
    for (std::uint64_t g = 0; g < games; ++g) stats.Add(spy[g] != 0, won[g] != 0);
    res.stats.push_back(stats);
    res.won.push_back(std::move(won));
  }
  return res;
}

struct PairedComparison {
  double mean_difference = 0.0;  // win rate of a minus win rate of b
  double std_error = 0.0;
  double z = 0.0;
  double p_one_sided = 1.0;  // H1: a wins more often than b
};

// Paired z-test on per-game win indicators of two candidates.
inline PairedComparison ComparePaired(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  AVALON_CHECK(a.size() == b.size() && a.size() >= 2, "paired samples must match and have at least 2 games");
  const double n = static_cast<double>(a.size());
  double sum = 0.0;
  double sq = 0.0;
  for (size_t g = 0; g < a.size(); ++g) {
    const double d = static_cast<double>(a[g]) - static_cast<double>(b[g]);
    sum += d;
    sq += d * d;
  }
  PairedComparison out;
  out.mean_difference = sum / n;
  const double var = (sq - n * out.mean_difference * out.mean_difference) / (n - 1.0);
  out.std_error = std::sqrt(std::max(var, 0.0) / n);
  if (out.std_error == 0.0) {
    out.z = out.mean_difference > 0 ? INFINITY : (out.mean_difference < 0 ? -INFINITY : 0.0);
    out.p_one_sided = out.mean_difference > 0 ? 0.0 : 1.0;
    return out;
  }
  out.z = out.mean_difference / out.std_error;
  out.p_one_sided = boost::math::cdf(boost::math::complement(boost::math::normal(), out.z));
  return out;
}

inline std::string FormatFifthSeat(const FifthSeatResult& r) {
  std::ostringstream out;
  out << "preset " << LineupString(r.preset) << "  games " << r.games << "  seed " << r.seed << "\n";
  out << std::left << std::setw(20) << "fifth agent" << std::setw(22) << "win" << std::setw(22)
      << "resistance win" << "spy win\n";
  for (size_t c = 0; c < r.candidates.size(); ++c) {
    const AgentStats& s = r.stats[c];
    out << std::left << std::setw(20) << r.candidates[c].ToString() << std::setw(22) << FormatRate(s.overall)
        << std::setw(22) << FormatRate(s.resistance) << FormatRate(s.spy) << "\n";
  }
  for (size_t c = 1; c < r.candidates.size(); ++c) {
    const PairedComparison cmp = ComparePaired(r.won[0], r.won[c]);
    out << r.candidates[0].ToString() << " vs " << r.candidates[c].ToString() << ": difference " << std::fixed
        << std::setprecision(4) << cmp.mean_difference << " +- " << cmp.std_error << "  z " << std::setprecision(3)
        << cmp.z << "  one-sided p " << std::setprecision(6) << cmp.p_one_sided << "\n";
  }
  return out.str();
}

}  // namespace avalon
