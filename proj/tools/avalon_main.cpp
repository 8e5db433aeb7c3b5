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

// Command-line entry point. Exit codes: 0 success, 1 usage, 2 runtime.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "avalon/bound.hpp"
#include "avalon/eval/belief_replay.hpp"
#include "avalon/eval/metagame.hpp"
#include "avalon/eval/tournament.hpp"
#include "avalon/service/server.hpp"
#include "avalon/training.hpp"

namespace {

using namespace avalon;

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Log(const std::string& msg) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  std::cerr << std::put_time(&tm, "%F %T") << " " << msg << std::endl;
}

int DefaultWorkers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string StageTag(const StageId& s) {
  return std::to_string(s.succeeds) + "_" + std::to_string(s.fails) + "_" + std::to_string(s.proposal);
}

const auto kStageCheck = CLI::Validator(
    [](std::string& text) {
      try {
        ParseStageId(text);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "s,f,p");

struct GenDataArgs {
  std::string stage;
  int samples = 0;
  int iters = 1500;
  int skip = 500;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string nets;
  int workers = DefaultWorkers();
};

void RunGenData(const GenDataArgs& a) {
  const StageId stage = ParseStageId(a.stage);
  GenerateConfig cfg;
  cfg.samples = a.samples;
  cfg.solve = {a.iters, a.skip};
  cfg.seed = *a.seed;
  cfg.workers = a.workers;
  NetworkOracle oracle;
  if (!a.nets.empty()) oracle = LoadNetworks(a.nets);
  const std::string out = a.out.empty() ? "data_" + StageTag(stage) + ".bin" : a.out;
  const Dataset d = GenerateDatapoints(stage, &oracle, cfg, [&](int done) {
    if (done % 100 == 0) Log(std::to_string(done) + "/" + std::to_string(a.samples) + " samples");
  });
  SaveDataset(d, out);
  std::cout << "wrote " << d.rows.size() << " samples for stage " << stage.ToString() << " to " << out
            << "\n";
}

struct TrainArgs {
  std::string stage;
  std::string data;
  int epochs = 500;
  int batch = 512;
  std::string out;
  std::uint64_t seed = 1;
  std::string layer = "win";
};

void RunTrain(const TrainArgs& a) {
  const StageId stage = ParseStageId(a.stage);
  const Dataset d = LoadDataset(a.data);
  if (!(d.stage == stage)) {
    throw ConfigError(a.data + " holds stage " + d.stage.ToString() + ", not " + stage.ToString());
  }
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.seed = a.seed;
  const OutputLayer layer = a.layer == "win" ? OutputLayer::kWinProbability : OutputLayer::kZeroSum;
  const TrainResult r = TrainNetwork(d.rows, stage, layer, cfg);
  r.network.Save(a.out);
  std::cout << "epoch,trainLoss,valLoss\n";
  for (const EpochLoss& e : r.curve) std::cout << e.epoch << "," << e.train << "," << e.validation << "\n";
  Log("best validation loss " + std::to_string(r.best_validation) + " at epoch " +
      std::to_string(r.best_epoch) + "; weights in " + a.out);
}

struct TrainAllArgs {
  std::string preset;
  std::string dir;
  std::optional<std::uint64_t> seed;
  int workers = DefaultWorkers();
};

void RunTrainAll(const TrainAllArgs& a) {
  EndToEndOptions opt;
  opt.preset = PresetByName(a.preset);
  opt.dir = a.dir.empty() ? "artifacts/" + a.preset : a.dir;
  opt.seed = *a.seed;
  opt.workers = a.workers;
  opt.log = Log;
  Log("training all stages with preset " + a.preset + " into " + opt.dir);
  EndToEndTrain(opt);
  Log("done");
}

// Loads networks only when some agent needs them.
AgentContext MakeContext(const std::vector<AgentSpec>& specs, const std::string& nets_dir) {
  AgentContext ctx;
  for (const AgentSpec& s : specs) {
    if (s.kind == "deeprole") {
      ctx.nets = LoadAllNetworks(nets_dir);
      break;
    }
  }
  return ctx;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

struct TournamentArgs {
  std::string lineup;
  std::uint64_t games = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string nets = "artifacts/desk";
  int workers = DefaultWorkers();
};

void RunTournamentCmd(const TournamentArgs& a) {
  if (!a.out.empty() && !a.seed) throw UsageError("--seed is required with --out");
  const std::vector<AgentSpec> lineup = ParseLineup(a.lineup);
  const AgentContext ctx = MakeContext(lineup, a.nets);
  const std::uint64_t every = std::max<std::uint64_t>(1, a.games / 10);
  const TournamentResult r = RunTournament(lineup, a.games, a.seed.value_or(0), ctx, a.workers, [&](std::uint64_t d) {
    if (d % every == 0) Log(std::to_string(d) + "/" + std::to_string(a.games) + " games");
  });
  std::cout << FormatTournament(r);
  if (!a.out.empty()) {
    std::ofstream out = OpenOut(a.out);
    for (const MatchRecord& rec : r.records) {
      Json j = GameRecordToJson(rec.Record());
      j["game"] = rec.game;
      j["lineup"] = rec.lineup;
      out << j.dump() << "\n";
    }
    Log("wrote " + std::to_string(r.records.size()) + " game records to " + a.out);
  }
}

struct FifthSeatArgs {
  std::string preset;
  std::string candidates;
  std::uint64_t games = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string nets = "artifacts/desk";
  int workers = DefaultWorkers();
};

void RunFifthSeatCmd(const FifthSeatArgs& a) {
  if (!a.out.empty() && !a.seed) throw UsageError("--seed is required with --out");
  const std::vector<AgentSpec> preset = ParseAgentList(a.preset);
  const std::vector<AgentSpec> candidates = ParseAgentList(a.candidates);
  std::vector<AgentSpec> all = preset;
  all.insert(all.end(), candidates.begin(), candidates.end());
  const AgentContext ctx = MakeContext(all, a.nets);
  const std::uint64_t every = std::max<std::uint64_t>(1, a.games / 10);
  const FifthSeatResult r =
      RunFifthSeat(preset, candidates, a.games, a.seed.value_or(0), ctx, a.workers, [&](size_t c, std::uint64_t d) {
        if (d % every == 0) Log(candidates[c].ToString() + ": " + std::to_string(d) + "/" + std::to_string(a.games));
      });
  const std::string table = FormatFifthSeat(r);
  std::cout << table;
  if (!a.out.empty()) OpenOut(a.out) << table;
}

struct MetaGameArgs {
  std::string strategies;
  std::uint64_t games = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string nets = "artifacts/desk";
  int workers = DefaultWorkers();
};

void RunMetaGameCmd(const MetaGameArgs& a) {
  const std::vector<AgentSpec> strategies = ParseAgentList(a.strategies);
  const AgentContext ctx = MakeContext(strategies, a.nets);
  const MetaGame g = EstimateMetaGame(strategies, a.games, *a.seed, ctx, a.workers, [](const Profile& c) {
    std::string text;
    for (int x : c) text += (text.empty() ? "" : ",") + std::to_string(x);
    Log("profile " + text + " done");
  });
  OpenOut(a.out) << g.ToJson().dump(2) << "\n";
  std::cout << "wrote " << g.profiles().size() << " profiles to " << a.out << "\n";
}

struct EgtArgs {
  std::string payoffs;
  double grid = 0.05;
  std::string out;
};

void RunEgt(const EgtArgs& a) {
  std::ifstream in(a.payoffs);
  if (!in) throw ConfigError("cannot read " + a.payoffs);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(a.payoffs + ": " + e.what());
  }
  const MetaGame g = MetaGame::FromJson(j);
  std::ofstream out = OpenOut(a.out);
  WriteReplicatorField(out, g, a.grid);
  std::cout << "wrote replicator field over " << SimplexGrid(g.size(), a.grid).size() << " mixtures to " << a.out
            << "\n";
}

struct BeliefReplayArgs {
  std::string log;
  int seat = 0;
  std::string out;
  std::string nets = "artifacts/desk";
  int iters = kDefaultBeliefReplayIterations;
};

void RunBeliefReplay(const BeliefReplayArgs& a) {
  std::ifstream in(a.log);
  if (!in) throw ConfigError("cannot read " + a.log);
  const std::vector<GameRecord> games = ReadRecords(in);
  const auto nets = LoadAllNetworks(a.nets);
  std::ofstream out = OpenOut(a.out);
  for (size_t g = 0; g < games.size(); ++g) {
    WriteBeliefSteps(out, g, ReplayBeliefs(games[g], a.seat, nets, a.iters), g == 0);
  }
  std::cout << "replayed " << games.size() << " games from seat " << a.seat << " into " << a.out << "\n";
}

// Terminal play: "human" entries are played from stdin.
struct PlayArgs {
  std::string agents;
  std::optional<std::uint64_t> seed;
  std::string nets = "artifacts/desk";
  bool belief = false;
};

std::string DescribeObservation(const Json& o) {
  const std::string kind = o["kind"];
  if (kind == "propose") return "proposed team " + o["team"].dump();
  if (kind == "vote") return "votes " + o["approve"].dump();
  if (kind == "mission") return "mission " + o["team"].dump() + " with " + o["fails"].dump() + " fail(s)";
  return "assassin " + o["actor"].dump() + " named " + o["target"].dump();
}

Json ParseTypedAction(const std::string& phase, const std::string& line) {
  std::istringstream in(line);
  if (phase == "propose") {
    std::vector<int> team;
    for (int s; in >> s;) team.push_back(s);
    return {{"type", "propose"}, {"team", team}};
  }
  std::string word;
  in >> word;
  if (phase == "vote") return {{"type", "vote"}, {"approve", word == "y" || word == "yes" || word == "approve"}};
  if (phase == "mission") return {{"type", "mission"}, {"fail", word == "f" || word == "fail"}};
  try {
    return {{"type", "assassinate"}, {"target", std::stoi(word)}};
  } catch (const std::exception&) {
    return {{"type", "assassinate"}, {"target", -1}};
  }
}

void RunPlay(const PlayArgs& a) {
  Json seats = Json::array();
  std::vector<AgentSpec> agents;
  size_t start = 0;
  while (start <= a.agents.size()) {
    const size_t comma = a.agents.find(',', start);
    const std::string item = a.agents.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item != "human") agents.push_back(ParseAgentSpec(item));
    seats.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seats.size() != kNumSeats) throw UsageError("--agents needs 5 entries, e.g. human,deeprole,deeprole,deeprole,deeprole");
  service::LobbyConfig cfg;
  cfg.agents = MakeContext(agents, a.nets);
  cfg.agent_workers = 0;
  service::Lobby lobby(cfg);
  Json create = {{"kind", "create"}, {"seats", seats}, {"beliefPanel", a.belief}};
  if (a.seed) create["seed"] = *a.seed;
  const auto g = lobby.Create(create);
  std::map<Seat, std::string> tokens;
  for (Seat s = 0; s < kNumSeats; ++s) {
    if (seats[s] == "human") tokens[s] = g->Join(s);
  }
  std::map<int, std::uint64_t> shown;
  const auto show = [&](int s) {
    for (const Json& m : g->Messages(s, shown[s])) {
      shown[s] = m["seq"];
      if (m["kind"] == "reveal") {
        std::cout << "game over: " << m["winner"].get<std::string>() << " win; roles " << m["roles"].dump() << "\n";
        continue;
      }
      const Json& pub = m["public"];
      if (!pub["history"].empty()) std::cout << "  " << DescribeObservation(pub["history"].back()) << "\n";
      if (m.contains("belief")) {
        std::cout << "  spy marginals:";
        JointBelief b{};
        for (int r = 0; r < kNumAssignments; ++r) b[r] = m["belief"][r];
        for (double x : SpyMarginals(b)) std::cout << " " << std::fixed << std::setprecision(3) << x;
        std::cout << "\n";
      }
    }
  };
  for (const auto& [s, t] : tokens) {
    const Json you = g->Messages(s, 0)[0]["you"];
    std::cout << "seat " << s << ": you are " << you["role"].get<std::string>();
    if (you.contains("knownSpies")) std::cout << "; spies " << you["knownSpies"].dump();
    if (you.contains("knownAssassin")) std::cout << "; assassin " << you["knownAssassin"].dump();
    std::cout << "\n";
  }
  while (!g->terminal()) {
    const auto waiting = g->AwaitedHumans();
    if (waiting.empty()) break;
    const Seat s = waiting.front();
    show(s);
    const Json state = g->Messages(s, 0).back();
    const Json& pub = state["public"];
    const std::string phase = pub["phase"];
    std::cout << "round " << pub["round"].get<int>() + 1 << ", " << pub["succeeds"] << " success / " << pub["fails"]
              << " fail, proposal " << pub["proposalNum"] << "; seat " << s << " to act (" << phase << ")";
    if (phase == "propose") std::cout << " - list " << pub["teamSize"] << " seats";
    if (phase == "vote") std::cout << " on " << pub["team"].dump() << " - y/n";
    if (phase == "mission") std::cout << " - s/f";
    if (phase == "assassinate") std::cout << " - name a seat";
    std::cout << "\n> " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) throw UsageError("input ended before the game was over");
    try {
      lobby.Submit(g->id(), tokens[s], ParseTypedAction(phase, line));
    } catch (const service::ProtocolError& e) {
      std::cout << "rejected: " << e.what();
      if (!e.legal().is_null()) std::cout << "; legal: " << e.legal().dump();
      std::cout << "\n";
    }
  }
  show(tokens.empty() ? service::kSpectator : tokens.begin()->first);
}

struct ServeArgs {
  int port = 8080;
  std::string config;
};

void RunServe(const ServeArgs& a) {
  Json cfg = Json::object();
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw ConfigError("cannot read " + a.config);
    try {
      cfg = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(a.config + ": " + e.what());
    }
  }
  service::LobbyConfig lc;
  try {
    lc.dir = cfg.value("dir", "games");
    lc.belief_panel_default = cfg.value("beliefPanel", false);
    lc.agent_workers = cfg.value("agentWorkers", 1);
    const std::string nets = cfg.value("nets", "");
    if (!nets.empty()) lc.agents.nets = LoadAllNetworks(nets);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(a.config + ": " + e.what());
  }
  if (lc.agent_workers < 1) throw ConfigError("agentWorkers must be at least 1");
  const std::string host = cfg.value("host", "127.0.0.1");
  service::Lobby lobby(lc);
  const int recovered = lobby.Recover();
  service::Server server(lobby);
  Log("recovered " + std::to_string(recovered) + " games from " + lc.dir + "; listening on " + host + ":" +
      std::to_string(a.port));
  server.Run(host, a.port);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Avalon solver: training, evaluation and play"};
  app.require_subcommand(1);

  app.add_subcommand("bound", "Print the public-tree size bound")->callback([] {
    std::cout << BoundReport();
  });

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate training data for one stage");
  gen_cmd->add_option("--stage", gen.stage, "Stage s,f,p")->required()->check(kStageCheck);
  gen_cmd->add_option("--samples", gen.samples, "Number of sampled situations")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--iters", gen.iters, "CFR iterations per solve")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--skip", gen.skip, "Iterations before strategy averaging")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->required();
  gen_cmd->add_option("--out", gen.out, "Dataset path (default data_s_f_p.bin)");
  gen_cmd->add_option("--nets", gen.nets, "Directory with trained later-stage networks");
  gen_cmd->add_option("--workers", gen.workers, "Parallel sample workers")->check(CLI::PositiveNumber);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train one stage network from a dataset");
  train_cmd->add_option("--stage", train.stage, "Stage s,f,p")->required()->check(kStageCheck);
  train_cmd->add_option("--data", train.data, "Dataset path")->required();
  train_cmd->add_option("--epochs", train.epochs, "Epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", train.batch, "Batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", train.out, "Weights path")->required();
  train_cmd->add_option("--seed", train.seed, "Shuffle and initialization seed");
  train_cmd->add_option("--layer", train.layer, "Output layer")->check(CLI::IsMember({"win", "zerosum"}));

  TrainAllArgs all;
  auto* all_cmd = app.add_subcommand("train-all", "Generate data and train every stage, resumable");
  all_cmd->add_option("--preset", all.preset, "paper, desk or smoke")
      ->required()
      ->check(CLI::IsMember({"paper", "desk", "smoke"}));
  all_cmd->add_option("--dir", all.dir, "Artifact directory (default artifacts/PRESET)");
  all_cmd->add_option("--seed", all.seed, "Random seed")->required();
  all_cmd->add_option("--workers", all.workers, "Parallel sample workers")->check(CLI::PositiveNumber);

  TournamentArgs tour;
  auto* tour_cmd = app.add_subcommand("tournament", "Play a lineup with seat rotation and print win rates");
  tour_cmd->add_option("--lineup", tour.lineup, "Five agent specs, comma separated")->required();
  tour_cmd->add_option("--games", tour.games, "Number of games")->required()->check(CLI::PositiveNumber);
  tour_cmd->add_option("--seed", tour.seed, "Random seed (required with --out)");
  tour_cmd->add_option("--out", tour.out, "Write game records (JSON lines)");
  tour_cmd->add_option("--nets", tour.nets, "Trained network directory for deeprole agents");
  tour_cmd->add_option("--workers", tour.workers, "Parallel games")->check(CLI::PositiveNumber);

  FifthSeatArgs fifth;
  auto* fifth_cmd = app.add_subcommand("fifth-seat", "Compare fifth agents joining four preset agents");
  fifth_cmd->add_option("--preset", fifth.preset, "Four agent specs, comma separated")->required();
  fifth_cmd->add_option("--candidates", fifth.candidates, "Candidate specs, comma separated")->required();
  fifth_cmd->add_option("--games", fifth.games, "Games per candidate")->required()->check(CLI::PositiveNumber);
  fifth_cmd->add_option("--seed", fifth.seed, "Random seed (required with --out)");
  fifth_cmd->add_option("--out", fifth.out, "Write the result table");
  fifth_cmd->add_option("--nets", fifth.nets, "Trained network directory for deeprole agents");
  fifth_cmd->add_option("--workers", fifth.workers, "Parallel games")->check(CLI::PositiveNumber);

  MetaGameArgs meta;
  auto* meta_cmd = app.add_subcommand("metagame", "Estimate meta-game payoffs for a set of agent types");
  meta_cmd->add_option("--strategies", meta.strategies, "Agent specs, comma separated")->required();
  meta_cmd->add_option("--games", meta.games, "Games per profile")->required()->check(CLI::PositiveNumber);
  meta_cmd->add_option("--seed", meta.seed, "Random seed")->required();
  meta_cmd->add_option("--out", meta.out, "Payoff file (JSON)")->required();
  meta_cmd->add_option("--nets", meta.nets, "Trained network directory for deeprole agents");
  meta_cmd->add_option("--workers", meta.workers, "Parallel games")->check(CLI::PositiveNumber);

  EgtArgs egt;
  auto* egt_cmd = app.add_subcommand("egt", "Replicator field of a meta-game over a simplex grid");
  egt_cmd->add_option("--payoffs", egt.payoffs, "Payoff file from metagame")->required();
  egt_cmd->add_option("--grid", egt.grid, "Grid step")->check(CLI::Range(1e-6, 1.0));
  egt_cmd->add_option("--out", egt.out, "Output CSV")->required();

  BeliefReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("belief-replay", "Belief in the truth along recorded games");
  replay_cmd->add_option("--log", replay.log, "Game records (JSON lines)")->required();
  replay_cmd->add_option("--seat", replay.seat, "Observer seat")->required()->check(CLI::Range(0, 4));
  replay_cmd->add_option("--out", replay.out, "Output CSV")->required();
  replay_cmd->add_option("--nets", replay.nets, "Trained network directory");
  replay_cmd->add_option("--iters", replay.iters, "Solver iterations per step")->check(CLI::PositiveNumber);

  PlayArgs play;
  auto* play_cmd = app.add_subcommand("play", "Play in the terminal; \"human\" seats read from stdin");
  play_cmd->add_option("--agents", play.agents, "Five entries: human or agent specs")->required();
  play_cmd->add_option("--seed", play.seed, "Random seed");
  play_cmd->add_option("--nets", play.nets, "Trained network directory for deeprole agents");
  play_cmd->add_flag("--belief", play.belief, "Show the engine's belief after each step");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the game service");
  serve_cmd->add_option("--port", serve.port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--config", serve.config, "JSON config: dir, nets, beliefPanel, agentWorkers, host");

  gen_cmd->callback([&] { RunGenData(gen); });
  train_cmd->callback([&] { RunTrain(train); });
  all_cmd->callback([&] { RunTrainAll(all); });
  tour_cmd->callback([&] { RunTournamentCmd(tour); });
  fifth_cmd->callback([&] { RunFifthSeatCmd(fifth); });
  meta_cmd->callback([&] { RunMetaGameCmd(meta); });
  egt_cmd->callback([&] { RunEgt(egt); });
  replay_cmd->callback([&] { RunBeliefReplay(replay); });
  play_cmd->callback([&] { RunPlay(play); });
  serve_cmd->callback([&] { RunServe(serve); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
