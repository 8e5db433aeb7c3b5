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

// Backwards training over the 45 proposal stages: situation sampling,
// dataset generation with the depth-limited solver, dataset files, and the
// resumable end-to-end driver with its manifest.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "avalon/belief.hpp"
#include "avalon/binary_io.hpp"
#include "avalon/observation.hpp"
#include "avalon/public_state.hpp"
#include "avalon/roles.hpp"
#include "avalon/solver.hpp"
#include "avalon/value_net.hpp"

namespace avalon {

// Stages in training order: every stage comes after the stages its solve
// windows reach (the next proposal in the round and both next rounds).
inline std::vector<StageId> StageOrder() {
  std::vector<StageId> order;
  for (int total = 4; total >= 0; --total) {
    for (int s = std::min(total, 2); s >= 0 && total - s <= 2; --s) {
      for (int p = kMaxProposals; p >= 1; --p) order.push_back(StageId{s, total - s, p});
    }
  }
  return order;
}

// Stages whose networks a solve rooted at `stage` queries.
inline std::vector<StageId> StageDependencies(const StageId& stage) {
  std::vector<StageId> deps;
  if (stage.proposal < kMaxProposals) deps.push_back({stage.succeeds, stage.fails, stage.proposal + 1});
  if (stage.succeeds + 1 < kMissionsToWin) deps.push_back({stage.succeeds + 1, stage.fails, 1});
  if (stage.fails + 1 < kMissionsToWin) deps.push_back({stage.succeeds, stage.fails + 1, 1});
  return deps;
}

struct FailedMission {
  int round = 0;  // 0-based
  SeatMask team = 0;
  int fails = 1;
};

struct GameSituation {
  Seat proposer = 0;
  JointBelief belief{};
  std::vector<FailedMission> failed;  // the sampled history behind the belief
};

// Spy pairs (as seat masks) consistent with every failed mission: at least
// one spy on a 1-fail team, both spies on a 2-fail team.
inline std::vector<SeatMask> ConsistentSpyPairs(const std::vector<FailedMission>& failed) {
  std::vector<SeatMask> pairs;
  for (Seat a = 0; a < kNumSeats; ++a) {
    for (Seat b = a + 1; b < kNumSeats; ++b) {
      const SeatMask pair = SeatBit(a) | SeatBit(b);
      bool ok = true;
      for (const FailedMission& m : failed) {
        const int on_team = std::popcount(static_cast<unsigned>(pair & m.team));
        ok = ok && on_team >= m.fails;
      }
      if (ok) pairs.push_back(pair);
    }
  }
  return pairs;
}

inline std::vector<double> SampleDirichlet(int n, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> x(n);
  double total = 0.0;
  for (double& v : x) total += (v = gamma(rng));
  for (double& v : x) v /= total;
  return x;
}

// Random situation for the stage with `succeeds` successes and `fails`
// failures. Which rounds failed is uniform; each failed round draws its team
// and fail count jointly uniform over legal pairs. Histories that no spy
// pair can explain are redrawn.
inline GameSituation SampleSituation(int succeeds, int fails, std::mt19937_64& rng) {
  AVALON_CHECK(succeeds >= 0 && succeeds <= 2 && fails >= 0 && fails <= 2, "bad stage score");
  GameSituation out;
  std::vector<SeatMask> pairs;
  for (;;) {
    std::vector<int> rounds(succeeds + fails);
    std::iota(rounds.begin(), rounds.end(), 0);
    std::shuffle(rounds.begin(), rounds.end(), rng);
    rounds.resize(fails);
    std::sort(rounds.begin(), rounds.end());
    out.failed.clear();
    for (int round : rounds) {
      const auto& teams = TeamsOfSize(kTeamSizes[round]);
      // Every team of 2 or 3 admits 1 or 2 fails: 2 choices per team.
      const int pick = std::uniform_int_distribution<int>(0, 2 * static_cast<int>(teams.size()) - 1)(rng);
      out.failed.push_back(FailedMission{round, teams[pick / 2], 1 + pick % 2});
    }
    pairs = ConsistentSpyPairs(out.failed);
    if (!pairs.empty()) break;
  }
  const std::vector<double> p_pair = SampleDirichlet(static_cast<int>(pairs.size()), rng);
  const std::vector<double> p_merlin = SampleDirichlet(kNumSeats, rng);
  double total = 0.0;
  for (int r = 0; r < kNumAssignments; ++r) {
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    const auto it = std::find(pairs.begin(), pairs.end(), rho.spies());
    const double w = it == pairs.end() ? 0.0 : p_pair[it - pairs.begin()] * 0.5 * p_merlin[rho.merlin];
    out.belief[r] = w;
    total += w;
  }
  for (double& x : out.belief) x /= total;
  out.proposer = std::uniform_int_distribution<int>(0, kNumSeats - 1)(rng);
  return out;
}

// Independent generator per (seed, stage, sample) so rows can be produced in
// any order.
inline std::mt19937_64 SampleRng(std::uint64_t seed, const StageId& stage, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage.Index()), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

struct Dataset {
  StageId stage;
  int iterations = 0;
  int averaging_delay = 0;
  std::uint64_t seed = 0;
  std::vector<TrainingExample> rows;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

// Header (magic, version, stage, solve settings, seed, row count), then per
// row 65 input and 75 target float32 values.
inline void SaveDataset(const Dataset& d, const std::string& path) {
  ByteWriter w;
  w.Raw("AVDS", 4);
  w.U32(kDatasetVersion);
  w.U8(static_cast<std::uint8_t>(d.stage.succeeds));
  w.U8(static_cast<std::uint8_t>(d.stage.fails));
  w.U8(static_cast<std::uint8_t>(d.stage.proposal));
  w.U8(0);
  w.U32(static_cast<std::uint32_t>(d.iterations));
  w.U32(static_cast<std::uint32_t>(d.averaging_delay));
  w.U64(d.seed);
  w.U64(d.rows.size());
  for (const TrainingExample& e : d.rows) {
    for (Seat s = 0; s < kNumSeats; ++s) w.F32(s == e.proposer ? 1.0f : 0.0f);
    for (double x : e.belief) w.F32(static_cast<float>(x));
    for (const auto& row : e.target) {
      for (double x : row) w.F32(static_cast<float>(x));
    }
  }
  w.WriteFile(path);
}

inline Dataset LoadDataset(const std::string& path) {
  ByteReader r = ByteReader::FromFile(path);
  if (r.Raw(4) != "AVDS") throw FormatError(path + ": not a dataset file");
  const std::uint32_t version = r.U32();
  if (version != kDatasetVersion) {
    throw FormatError(path + ": unsupported dataset version " + std::to_string(version));
  }
  Dataset d;
  d.stage.succeeds = r.U8();
  d.stage.fails = r.U8();
  d.stage.proposal = r.U8();
  r.U8();
  if (!d.stage.Valid()) throw FormatError(path + ": bad stage");
  d.iterations = static_cast<int>(r.U32());
  d.averaging_delay = static_cast<int>(r.U32());
  d.seed = r.U64();
  const std::uint64_t count = r.U64();
  const std::uint64_t row_bytes = 4ull * (kNetInputs + kNetOutputs);
  if (r.remaining() != count * row_bytes) throw FormatError(path + ": truncated or oversized dataset");
  d.rows.resize(count);
  for (TrainingExample& e : d.rows) {
    int hot = -1;
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (r.F32() == 1.0f) hot = s;
    }
    if (hot < 0) throw FormatError(path + ": row without a proposer");
    e.proposer = hot;
    for (double& x : e.belief) x = r.F32();
    for (auto& row : e.target) {
      for (double& x : row) x = r.F32();
    }
  }
  return d;
}

struct GenerateConfig {
  int samples = 5000;
  SolveConfig solve{300, 100};
  std::uint64_t seed = 1;
  int workers = 1;
  double conservation_tolerance = 1e-6;
};

// Solves `cfg.samples` sampled situations at the stage's proposal node and
// records (proposer, belief, root values). `oracle` must hold every
// dependency of the stage.
inline Dataset GenerateDatapoints(const StageId& stage, const ValueOracle* oracle,
                                  const GenerateConfig& cfg,
                                  const std::function<void(int)>& progress = nullptr) {
  if (!stage.Valid()) throw ConfigError("invalid stage " + stage.ToString());
  for (const StageId& dep : StageDependencies(stage)) {
    if (oracle == nullptr || !oracle->Has(dep)) {
      throw ConfigError("stage " + stage.ToString() + " needs the network for stage " + dep.ToString());
    }
  }
  if (cfg.samples <= 0) throw ConfigError("sample count must be positive");
  Dataset d;
  d.stage = stage;
  d.iterations = cfg.solve.iterations;
  d.averaging_delay = cfg.solve.averaging_delay;
  d.seed = cfg.seed;
  d.rows.resize(cfg.samples);
  SolverOptions opts;
  opts.oracle = oracle;
  // Rows depend only on their index, so workers can take any share.
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex mu;
  std::exception_ptr failure;
  const auto work = [&] {
    for (int i = next++; i < cfg.samples; i = next++) {
      try {
        std::mt19937_64 rng = SampleRng(cfg.seed, stage, static_cast<std::uint64_t>(i));
        const GameSituation sit = SampleSituation(stage.succeeds, stage.fails, rng);
        const PublicState root =
            PublicState::SituationRoot(stage.succeeds, stage.fails, stage.proposal, sit.proposer);
        const SolveResult res = SolveSituation(root, sit.belief, cfg.solve, opts);
        if (!(res.conservation_gap <= cfg.conservation_tolerance)) {
          throw std::runtime_error("value conservation violated at stage " + stage.ToString() +
                                   " sample " + std::to_string(i));
        }
        for (const auto& row : res.values) {
          for (double x : row) AVALON_CHECK(std::abs(x) <= 1.0 + 1e-9, "target value out of [-1, 1]");
        }
        d.rows[i] = TrainingExample{sit.proposer, sit.belief, res.values};
        const int finished = ++done;
        if (progress) {
          std::lock_guard<std::mutex> lock(mu);
          progress(finished);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = cfg.samples;
      }
    }
  };
  const int workers = std::clamp(cfg.workers, 1, cfg.samples);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return d;
}

struct Preset {
  std::string name;
  int samples = 0;
  int iterations = 0;
  int averaging_delay = 0;
  int epochs = 0;
  int batch_size = 0;
};

inline Preset PresetByName(const std::string& name) {
  if (name == "paper") return {"paper", 120000, 1500, 500, 3000, 4096};
  if (name == "desk") return {"desk", 5000, 300, 100, 500, 512};
  // Wiring check only; far too small to learn anything useful.
  if (name == "smoke") return {"smoke", 40, 20, 5, 20, 32};
  throw ConfigError("unknown preset '" + name + "' (paper, desk, smoke)");
}

// Stage -> file mapping with content hashes, stored as manifest.json in the
// output directory. A stage is complete once its weights are listed here.
class Manifest {
 public:
  explicit Manifest(std::string dir) : dir_(std::move(dir)) {
    const std::string path = Path();
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      try {
        json_ = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
      }
    } else {
      json_ = {{"version", 1}, {"stages", nlohmann::json::object()}};
    }
  }

  std::string Path() const { return (std::filesystem::path(dir_) / "manifest.json").string(); }
  const std::string& dir() const { return dir_; }
  const nlohmann::json& json() const { return json_; }

  void SetPreset(const Preset& p, std::uint64_t seed) {
    json_["preset"] = {{"name", p.name}, {"samples", p.samples}, {"iterations", p.iterations},
                       {"averagingDelay", p.averaging_delay}, {"epochs", p.epochs},
                       {"batchSize", p.batch_size}, {"seed", seed}};
  }

  bool Complete(const StageId& stage) const {
    const auto& stages = json_["stages"];
    const auto it = stages.find(stage.ToString());
    return it != stages.end() && it->contains("weights");
  }

  void Record(const StageId& stage, const std::string& key, const std::string& file,
              const nlohmann::json& extra = {}) {
    auto& entry = json_["stages"][stage.ToString()];
    entry[key] = {{"file", file},
                  {"sha256", Sha256File((std::filesystem::path(dir_) / file).string())}};
    if (!extra.is_null()) {
      for (const auto& [k, v] : extra.items()) entry[k] = v;
    }
    Save();
  }

  // Verified path of a stage artifact; throws if missing or altered.
  std::string Artifact(const StageId& stage, const std::string& key) const {
    const auto& stages = json_["stages"];
    const auto it = stages.find(stage.ToString());
    if (it == stages.end() || !it->contains(key)) {
      throw ConfigError("manifest has no " + key + " for stage " + stage.ToString());
    }
    const std::string path = (std::filesystem::path(dir_) / (*it)[key]["file"].get<std::string>()).string();
    if (Sha256File(path) != (*it)[key]["sha256"].get<std::string>()) {
      throw FormatError(path + ": hash does not match the manifest");
    }
    return path;
  }

  void Save() const {
    const std::string tmp = Path() + ".tmp";
    {
      std::ofstream out(tmp);
      out << json_.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, Path());
  }

 private:
  std::string dir_;
  nlohmann::json json_;
};

// Loads every trained network listed in a manifest directory.
inline NetworkOracle LoadNetworks(const std::string& dir) {
  const Manifest manifest(dir);
  NetworkOracle oracle;
  for (int i = 0; i < StageId::kCount; ++i) {
    const StageId stage = StageId::FromIndex(i);
    if (manifest.Complete(stage)) oracle.Add(Network::Load(manifest.Artifact(stage, "weights"), stage));
  }
  return oracle;
}

// Networks for play: every stage must be present.
inline std::shared_ptr<const NetworkOracle> LoadAllNetworks(const std::string& dir) {
  if (!std::filesystem::exists(std::filesystem::path(dir) / "manifest.json")) {
    throw ConfigError("no trained networks in " + dir + " (run train-all first)");
  }
  auto oracle = std::make_shared<NetworkOracle>(LoadNetworks(dir));
  if (oracle->size() != StageId::kCount) {
    throw ConfigError("networks in " + dir + " cover only " + std::to_string(oracle->size()) + " of " +
                      std::to_string(StageId::kCount) + " stages");
  }
  return oracle;
}

struct EndToEndOptions {
  Preset preset;
  std::string dir;
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<StageId> order = StageOrder();
  std::function<void(const std::string&)> log;
};

// Generates data and trains each stage in order, persisting datasets,
// weights and loss curves. Stages already complete in the manifest are
// loaded rather than recomputed; an existing dataset file whose hash is in
// the manifest is reused.
inline NetworkOracle EndToEndTrain(const EndToEndOptions& opt) {
  std::filesystem::create_directories(opt.dir);
  Manifest manifest(opt.dir);
  if (manifest.json().contains("preset") && manifest.json()["preset"]["name"] != opt.preset.name) {
    throw ConfigError(opt.dir + " was produced with preset " +
                      manifest.json()["preset"]["name"].get<std::string>());
  }
  manifest.SetPreset(opt.preset, opt.seed);
  manifest.Save();
  const auto log = [&](const std::string& msg) {
    if (opt.log) opt.log(msg);
  };
  NetworkOracle oracle;
  for (const StageId& stage : opt.order) {
    const std::string tag = std::to_string(stage.succeeds) + "_" + std::to_string(stage.fails) + "_" +
                            std::to_string(stage.proposal);
    if (manifest.Complete(stage)) {
      oracle.Add(Network::Load(manifest.Artifact(stage, "weights"), stage));
      log("stage " + stage.ToString() + ": already trained");
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Dataset data;
    const std::string data_file = "data_" + tag + ".bin";
    bool have_data = false;
    try {
      data = LoadDataset(manifest.Artifact(stage, "dataset"));
      have_data = true;
    } catch (const std::exception&) {
    }
    if (!have_data) {
      GenerateConfig gen;
      gen.samples = opt.preset.samples;
      gen.solve = {opt.preset.iterations, opt.preset.averaging_delay};
      gen.seed = opt.seed;
      gen.workers = opt.workers;
      data = GenerateDatapoints(stage, &oracle, gen, [&](int done) {
        if (done % 500 == 0) log("stage " + stage.ToString() + ": " + std::to_string(done) + " samples");
      });
      SaveDataset(data, (std::filesystem::path(opt.dir) / data_file).string());
      manifest.Record(stage, "dataset", data_file);
    }
    const auto t1 = std::chrono::steady_clock::now();
    TrainConfig tc;
    tc.epochs = opt.preset.epochs;
    tc.batch_size = opt.preset.batch_size;
    tc.seed = opt.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stage.Index() + 1));
    TrainResult trained = TrainNetwork(data.rows, stage, OutputLayer::kWinProbability, tc);
    const std::string weights_file = "net_" + tag + ".bin";
    const std::string curve_file = "loss_" + tag + ".csv";
    trained.network.Save((std::filesystem::path(opt.dir) / weights_file).string());
    {
      std::ofstream curve(std::filesystem::path(opt.dir) / curve_file);
      curve << "epoch,trainLoss,valLoss\n";
      for (const EpochLoss& e : trained.curve) curve << e.epoch << "," << e.train << "," << e.validation << "\n";
    }
    const auto t2 = std::chrono::steady_clock::now();
    const double gen_s = std::chrono::duration<double>(t1 - t0).count();
    const double train_s = std::chrono::duration<double>(t2 - t1).count();
    manifest.Record(stage, "weights", weights_file,
                    {{"lossCurve", curve_file}, {"bestEpoch", trained.best_epoch},
                     {"bestValLoss", trained.best_validation},
                     {"generateSeconds", gen_s}, {"trainSeconds", train_s}});
    oracle.Add(std::move(trained.network));
    log("stage " + stage.ToString() + ": val " + std::to_string(trained.best_validation) + " (gen " +
        std::to_string(gen_s) + " s, train " + std::to_string(train_s) + " s)");
  }
  return oracle;
}

}  // namespace avalon
