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

// Line-delimited JSON game records:
//   {"seed":..,"assignment":..,"firstProposer":..,"log":[obs, ...]}
// Observations:
//   {"kind":"propose","team":[0,1]}
//   {"kind":"vote","approve":[1,1,0,0,0]}
//   {"kind":"mission","team":[0,1],"fails":1}      ("by" on split branches)
//   {"kind":"assassinate","actor":3,"target":2}

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "avalon/observation.hpp"
#include "avalon/public_state.hpp"
#include "avalon/roles.hpp"
#include "avalon/types.hpp"
#include "json.hpp"

namespace avalon {

using Json = nlohmann::json;

inline Json SeatListJson(SeatMask team) {
  Json out = Json::array();
  for (Seat s = 0; s < kNumSeats; ++s) {
    if (HasSeat(team, s)) out.push_back(s);
  }
  return out;
}

inline SeatMask SeatListFromJson(const Json& j) {
  if (!j.is_array()) throw FormatError("seat list must be an array");
  SeatMask mask = 0;
  for (const Json& s : j) {
    if (!s.is_number_integer()) throw FormatError("seat must be an integer");
    const int seat = s.get<int>();
    if (seat < 0 || seat >= kNumSeats) throw FormatError("seat out of range");
    if (HasSeat(mask, seat)) throw FormatError("duplicate seat");
    mask |= SeatBit(seat);
  }
  return mask;
}

inline Json ObservationToJson(const Observation& o) {
  struct Writer {
    Json operator()(const ProposalMade& p) const {
      return {{"kind", "propose"}, {"team", SeatListJson(p.team)}};
    }
    Json operator()(const VoteResult& v) const {
      Json votes = Json::array();
      for (Seat s = 0; s < kNumSeats; ++s) votes.push_back(v.ApprovedBy(s) ? 1 : 0);
      return {{"kind", "vote"}, {"approve", votes}};
    }
    Json operator()(const MissionResult& m) const {
      Json j = {{"kind", "mission"}, {"team", SeatListJson(m.team)}, {"fails", m.fails}};
      if (m.Attributed()) j["by"] = m.attributed;
      return j;
    }
    Json operator()(const AssassinPick& a) const {
      return {{"kind", "assassinate"}, {"actor", a.actor}, {"target", a.target}};
    }
  };
  return std::visit(Writer{}, o);
}

inline Observation ObservationFromJson(const Json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "propose") return ProposalMade{SeatListFromJson(j.at("team"))};
    if (kind == "vote") {
      const Json& votes = j.at("approve");
      if (!votes.is_array() || votes.size() != kNumSeats) {
        throw FormatError("vote needs five entries");
      }
      SeatMask approvals = 0;
      for (Seat s = 0; s < kNumSeats; ++s) {
        const int v = votes[s].get<int>();
        if (v != 0 && v != 1) throw FormatError("vote entries must be 0 or 1");
        if (v == 1) approvals |= SeatBit(s);
      }
      return VoteResult{approvals};
    }
    if (kind == "mission") {
      MissionResult m{SeatListFromJson(j.at("team")), j.at("fails").get<int>(),
                      kNoSeat};
      if (j.contains("by")) m.attributed = j.at("by").get<int>();
      return m;
    }
    if (kind == "assassinate") {
      return AssassinPick{j.at("actor").get<int>(), j.at("target").get<int>()};
    }
    throw FormatError("unknown observation kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad observation: ") + e.what());
  }
}

struct GameRecord {
  std::uint64_t seed = 0;
  int assignment = 0;
  Seat first_proposer = 0;
  std::vector<Observation> log;

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

inline Json GameRecordToJson(const GameRecord& g) {
  Json log = Json::array();
  for (const Observation& o : g.log) log.push_back(ObservationToJson(o));
  return {{"seed", g.seed},
          {"assignment", g.assignment},
          {"firstProposer", g.first_proposer},
          {"log", log}};
}

// Validates ranges and replays the log, so a record that loads is playable.
inline GameRecord GameRecordFromJson(const Json& j) {
  GameRecord g;
  try {
    g.seed = j.at("seed").get<std::uint64_t>();
    g.assignment = j.at("assignment").get<int>();
    g.first_proposer = j.at("firstProposer").get<int>();
    for (const Json& o : j.at("log")) g.log.push_back(ObservationFromJson(o));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad game record: ") + e.what());
  }
  if (g.assignment < 0 || g.assignment >= kNumAssignments) {
    throw FormatError("assignment index out of range");
  }
  if (g.first_proposer < 0 || g.first_proposer >= kNumSeats) {
    throw FormatError("first proposer out of range");
  }
  try {
    Replay(g.first_proposer, g.log);
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("log does not replay: ") + e.what());
  }
  return g;
}

inline std::string SerializeRecord(const GameRecord& g) {
  return GameRecordToJson(g).dump();
}

inline GameRecord ParseRecord(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unparseable record: ") + e.what());
  }
  return GameRecordFromJson(j);
}

inline void WriteRecords(std::ostream& out, const std::vector<GameRecord>& games) {
  for (const GameRecord& g : games) out << SerializeRecord(g) << '\n';
}

inline std::vector<GameRecord> ReadRecords(std::istream& in) {
  std::vector<GameRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(ParseRecord(line));
  }
  return out;
}

}  // namespace avalon
