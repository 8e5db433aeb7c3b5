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

// Depth-limited vector-form CFR+ over the public tree with deductive
// reach zeroing. A solve window starts at any public node and stops at the
// next proposal node, where a value oracle (normally a stage network)
// supplies probability-weighted information-set values.

#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "avalon/belief.hpp"
#include "avalon/deduction.hpp"
#include "avalon/observation.hpp"
#include "avalon/public_state.hpp"
#include "avalon/roles.hpp"
#include "avalon/types.hpp"

namespace avalon {

// Identifies one of the 45 proposal stages (succeeds, fails, proposal).
struct StageId {
  int succeeds = 0;
  int fails = 0;
  int proposal = 1;

  static constexpr int kCount = 45;

  constexpr bool Valid() const {
    return succeeds >= 0 && succeeds <= 2 && fails >= 0 && fails <= 2 &&
           proposal >= 1 && proposal <= kMaxProposals;
  }
  constexpr int Index() const { return (succeeds * 3 + fails) * 5 + (proposal - 1); }
  static constexpr StageId FromIndex(int i) {
    return StageId{i / 15, (i / 5) % 3, i % 5 + 1};
  }
  static StageId Of(const PublicState& h) {
    return StageId{h.succeeds(), h.fails(), h.proposal_num()};
  }
  std::string ToString() const {
    return std::to_string(succeeds) + "," + std::to_string(fails) + "," +
           std::to_string(proposal);
  }
  friend constexpr bool operator==(const StageId&, const StageId&) = default;
};

inline StageId ParseStageId(const std::string& text) {
  StageId id{-1, -1, -1};
  char c1 = 0;
  char c2 = 0;
  std::string rest;
  std::istringstream in(text);
  if (!(in >> id.succeeds >> c1 >> id.fails >> c2 >> id.proposal) || c1 != ',' ||
      c2 != ',' || (in >> rest) || !id.Valid()) {
    throw ConfigError("bad stage id '" + text + "' (expected s,f,p)");
  }
  return id;
}

struct LeafQuery {
  Seat proposer = 0;
  JointBelief belief{};  // normalized
};

// Supplies probability-weighted values V_i(I) at a proposal stage for a
// normalized belief, as if that stage were solved with root reaches 1.
class ValueOracle {
 public:
  virtual ~ValueOracle() = default;
  virtual bool Has(const StageId& stage) const = 0;
  virtual void EvaluateBatch(const StageId& stage,
                             std::span<const LeafQuery> queries,
                             std::span<InfoSetValues> out) const = 0;
};

// Replaces regret matching at the nodes it covers. Used for fixed-strategy
// oracles and to pin parts of a tree.
class FrozenPolicy {
 public:
  virtual ~FrozenPolicy() = default;
  virtual bool Covers(const PublicState& h) const = 0;
  // Writes a distribution over `num_actions` actions into `out`.
  virtual void Strategy(const PublicState& h, Seat seat, int local_index,
                        int num_actions, double* out) const = 0;
};

class UniformPolicy : public FrozenPolicy {
 public:
  bool Covers(const PublicState&) const override { return true; }
  void Strategy(const PublicState&, Seat, int, int num_actions,
                double* out) const override {
    std::fill(out, out + num_actions, 1.0 / num_actions);
  }
};

// sigma[a] = r[a] / sum(r), or uniform when no regret is positive.
inline void RegretMatchingPlus(const double* regrets, int num_actions,
                               double* sigma) {
  AVALON_CHECK(num_actions > 0, "empty action set");
  double total = 0.0;
  for (int a = 0; a < num_actions; ++a) total += regrets[a];
  if (total > 0.0) {
    for (int a = 0; a < num_actions; ++a) sigma[a] = regrets[a] / total;
  } else {
    std::fill(sigma, sigma + num_actions, 1.0 / num_actions);
  }
}

inline std::vector<double> RegretMatchingPlus(const std::vector<double>& regrets) {
  AVALON_CHECK(!regrets.empty(), "empty action set");
  for (double r : regrets) AVALON_CHECK(r >= 0.0, "negative cumulative regret");
  std::vector<double> sigma(regrets.size());
  RegretMatchingPlus(regrets.data(), static_cast<int>(regrets.size()), sigma.data());
  return sigma;
}

// Counterfactual values at a terminal: every assignment adds its terminal
// belief times the seat's payoff to the seat's information set, then each
// entry is divided by the seat's own reach (0/0 := 0).
inline InfoSetValues TerminalCFVs(const PublicState& h, const AssignmentMask& mask,
                                  const JointBelief& b, const ReachVector& reach) {
  AVALON_CHECK(h.IsTerminal(), "terminal values of a non-terminal state");
  const JointBelief bt = TerminalBelief(mask, b, reach);
  InfoSetValues v = ZeroValues();
  for (int r = 0; r < kNumAssignments; ++r) {
    if (bt[r] == 0.0) continue;
    const RoleAssignment rho = RoleAssignment::FromIndex(r);
    for (Seat s = 0; s < kNumSeats; ++s) {
      v[s][InfoSetOf(s, r)] += bt[r] * TerminalUtility(h, rho, s);
    }
  }
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      v[s][local] = reach[s][local] == 0.0 ? 0.0 : v[s][local] / reach[s][local];
    }
  }
  return v;
}

inline InfoSetValues TerminalCFVs(const PublicState& h, const JointBelief& b,
                                  const ReachVector& reach) {
  return TerminalCFVs(h, ConsistencyMask(h), b, reach);
}

// Counterfactual values at a stage boundary from a value oracle queried with
// the normalized terminal belief.
inline InfoSetValues NeuralCFVs(const PublicState& h, const AssignmentMask& mask,
                                const JointBelief& b, const ReachVector& reach,
                                const ValueOracle& oracle) {
  AVALON_CHECK(h.phase() == Phase::kPropose, "network values need a proposal node");
  const StageId stage = StageId::Of(h);
  if (!oracle.Has(stage)) {
    throw ConfigError("no value network for stage " + stage.ToString());
  }
  const JointBelief bt = TerminalBelief(mask, b, reach);
  const double w = BeliefMass(bt);
  InfoSetValues v = ZeroValues();
  if (w == 0.0) return v;
  LeafQuery q;
  q.proposer = h.proposer();
  for (int r = 0; r < kNumAssignments; ++r) q.belief[r] = bt[r] / w;
  oracle.EvaluateBatch(stage, std::span<const LeafQuery>(&q, 1),
                       std::span<InfoSetValues>(&v, 1));
  for (Seat s = 0; s < kNumSeats; ++s) {
    for (int local = 0; local < kNumInfoSets; ++local) {
      v[s][local] = reach[s][local] == 0.0 ? 0.0 : w * v[s][local] / reach[s][local];
    }
  }
  return v;
}

struct SolveConfig {
  int iterations = 30;
  int averaging_delay = 5;
};

struct SolverOptions {
  const ValueOracle* oracle = nullptr;
  const FrozenPolicy* frozen = nullptr;
  // Proposal stages below the root to expand instead of asking the oracle.
  int expand_stages = 0;
};

struct SolveResult {
  InfoSetValues values{};
  NodeStrategy root_strategy{};
  SeatMask root_movers = 0;
  // |root total - boundary total| of the last iteration; see ConservationGap.
  double conservation_gap = 0.0;
};

class Solver {
 public:
  enum class Kind : std::uint8_t { kInternal, kTerminal, kLeaf };

  Solver(const PublicState& root, const JointBelief& belief,
         const SolverOptions& options = {})
      : belief_(belief), options_(options) {
    AVALON_CHECK(!root.IsTerminal(), "cannot solve from a terminal state");
    AssignmentMask all;
    all.set();
    Build(root.WithoutLog(), all, 0);
    reach_.resize(nodes_.size());
    values_.assign(nodes_.size(), ZeroValues());
    reach_[0] = OnesReach();
    leaf_queries_.resize(leaves_.size());
    leaf_weight_.resize(leaves_.size());
    leaf_values_.resize(leaves_.size());
    m_.resize(max_table_ + 1);
  }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_leaves() const { return static_cast<int>(leaves_.size()); }
  const PublicState& state(int node) const { return nodes_[node].state; }
  Kind kind(int node) const { return nodes_[node].kind; }
  const InfoSetValues& values(int node = 0) const { return values_[node]; }
  const ReachVector& reach(int node) const { return reach_[node]; }
  const AssignmentMask& mask(int node) const { return nodes_[node].mask; }
  void set_root_reach(const ReachVector& r) { reach_[0] = r; }

  // One pass of ModifiedCFR+ from the root; `weight` scales the strategy
  // sums. Returns the root values of this iteration.
  const InfoSetValues& RunIteration(double weight) {
    Forward();
    EvaluateLeaves();
    Backward(weight);
    return values_[0];
  }

  // Sum of reach-weighted values over all seats and information sets at the
  // root minus the same sum over every terminal and leaf node. Reach times
  // counterfactual value is conserved through internal nodes, so this is 0
  // up to rounding after every iteration.
  double ConservationGap() const {
    const auto total = [&](int id) {
      double t = 0.0;
      for (Seat s = 0; s < kNumSeats; ++s) {
        for (int local = 0; local < kNumInfoSets; ++local) {
          t += reach_[id][s][local] * values_[id][s][local];
        }
      }
      return t;
    };
    double boundary = 0.0;
    for (int id = 0; id < num_nodes(); ++id) {
      if (nodes_[id].kind != Kind::kInternal) boundary += total(id);
    }
    return std::abs(total(0) - boundary);
  }

  // Cumulative positive regrets of one information set (internal nodes).
  std::span<const double> Regrets(int node, Seat seat, int local) const {
    return Slots(regrets_, node, seat, local);
  }
  std::span<const double> StrategySums(int node, Seat seat, int local) const {
    return Slots(strategy_sums_, node, seat, local);
  }

  // Average (or current) strategy at an internal node for every moving seat.
  // Information sets without accumulated mass get a uniform distribution.
  NodeStrategy AverageStrategy(int node = 0) const {
    return ExtractStrategy(node, strategy_sums_);
  }
  NodeStrategy CurrentStrategy(int node = 0) const {
    return ExtractStrategy(node, sigma_);
  }
  SeatMask movers(int node = 0) const { return nodes_[node].state.MovingSeats(); }
  int num_actions(int node, Seat seat, int local) const {
    return nodes_[node].state.ActionCount(seat, local);
  }

 private:
  static constexpr int kCells = kNumSeats * kNumInfoSets;

  // Internal nodes own a table region with one slot per (seat, information
  // set, action). Non-moving seats and single-action information sets get
  // one slot with probability 1, so every cell is handled the same way. The
  // region ends with a slot fixed at probability 0 that inconsistent cells
  // point to.
  struct Node {
    PublicState state;
    Kind kind = Kind::kInternal;
    bool frozen = false;
    int first_edge = 0;
    int num_edges = 0;
    int table_offset = 0;
    int table_size = 0;     // excluding the trailing zero slot
    int cell_offset = 0;    // into cell_start_/cell_count_
    int payload = -1;       // terminal or leaf slot
    AssignmentMask mask;
  };

  struct Edge {
    int child = 0;
    int index_offset = 0;  // kCells table-relative slot indices in edge_slots_
  };

  // Nonzero b*mask entries with the flat cell each seat sees them in.
  struct Terminal {
    std::vector<std::array<std::uint8_t, kNumSeats>> cells;
    std::vector<double> weight;        // b[rho] * (+1 resistance win / -1 spy win)
    std::vector<SeatMask> spies;
    std::vector<std::uint8_t> touched;  // union of cells
  };

  struct Leaf {
    StageId stage;
    Seat proposer = 0;
    std::vector<std::uint8_t> support;
    std::vector<std::array<std::uint8_t, kNumSeats>> cells;
    std::vector<double> weight;  // b[rho]
  };

  static double* Flat(InfoSetValues& v) { return v[0].data(); }
  static const double* Flat(const InfoSetValues& v) { return v[0].data(); }

  static std::array<std::uint8_t, kNumSeats> CellsOf(int rho) {
    std::array<std::uint8_t, kNumSeats> out;
    for (Seat s = 0; s < kNumSeats; ++s) {
      out[s] = static_cast<std::uint8_t>(s * kNumInfoSets + InfoSetOf(s, rho));
    }
    return out;
  }

  std::span<const double> Slots(const std::vector<double>& table, int node, Seat seat,
                                int local) const {
    const Node& n = nodes_[node];
    AVALON_CHECK(n.kind == Kind::kInternal, "no actions at a non-internal node");
    const int cell = seat * kNumInfoSets + local;
    const int count = n.state.ActionCount(seat, local);
    return {&table[n.table_offset + cell_start_[n.cell_offset + cell]], static_cast<size_t>(count)};
  }

  int Build(const PublicState& h, const AssignmentMask& mask, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].state = h;
    nodes_[id].mask = mask;
    if (h.IsTerminal()) {
      Terminal t;
      std::bitset<kCells> touched;
      for (int r = 0; r < kNumAssignments; ++r) {
        if (!mask[r] || belief_[r] == 0.0) continue;
        const bool resistance_wins =
            WinningTeam(h, RoleAssignment::FromIndex(r)) == Team::kResistance;
        t.cells.push_back(CellsOf(r));
        t.weight.push_back(resistance_wins ? belief_[r] : -belief_[r]);
        t.spies.push_back(SpiesOf(r));
        for (std::uint8_t c : t.cells.back()) touched.set(c);
      }
      for (int c = 0; c < kCells; ++c) {
        if (touched[c]) t.touched.push_back(static_cast<std::uint8_t>(c));
      }
      nodes_[id].kind = Kind::kTerminal;
      nodes_[id].payload = static_cast<int>(terminals_.size());
      terminals_.push_back(std::move(t));
      return id;
    }
    if (id != 0 && h.phase() == Phase::kPropose && depth > options_.expand_stages) {
      Leaf leaf;
      leaf.stage = StageId::Of(h);
      leaf.proposer = h.proposer();
      if (options_.oracle == nullptr || !options_.oracle->Has(leaf.stage)) {
        throw ConfigError("no value network for stage " + leaf.stage.ToString());
      }
      for (int r = 0; r < kNumAssignments; ++r) {
        if (!mask[r] || belief_[r] == 0.0) continue;
        leaf.support.push_back(static_cast<std::uint8_t>(r));
        leaf.cells.push_back(CellsOf(r));
        leaf.weight.push_back(belief_[r]);
      }
      nodes_[id].kind = Kind::kLeaf;
      nodes_[id].payload = static_cast<int>(leaves_.size());
      leaves_.push_back(std::move(leaf));
      leaf_nodes_.push_back(id);
      return id;
    }

    // Slot layout of this node's table region.
    const SeatMask movers = h.MovingSeats();
    const int cell_offset = static_cast<int>(cell_start_.size());
    int size = 0;
    for (Seat s = 0; s < kNumSeats; ++s) {
      for (int local = 0; local < kNumInfoSets; ++local) {
        const int count = HasSeat(movers, s) ? h.ActionCount(s, local) : 1;
        cell_start_.push_back(static_cast<std::uint16_t>(size));
        cell_count_.push_back(static_cast<std::uint8_t>(count));
        size += count;
      }
    }
    const int table = static_cast<int>(regrets_.size());
    regrets_.resize(table + size + 1, 0.0);
    strategy_sums_.resize(regrets_.size(), 0.0);
    sigma_.resize(regrets_.size(), 0.0);
    for (int c = 0; c < kCells; ++c) {
      if (cell_count_[cell_offset + c] == 1) sigma_[table + cell_start_[cell_offset + c]] = 1.0;
    }
    max_table_ = std::max(max_table_, size);
    nodes_[id].table_offset = table;
    nodes_[id].table_size = size;
    nodes_[id].cell_offset = cell_offset;
    nodes_[id].frozen = options_.frozen != nullptr && options_.frozen->Covers(h);

    const std::vector<Observation> obs = Observations(h);
    const int first = static_cast<int>(edges_.size());
    nodes_[id].first_edge = first;
    nodes_[id].num_edges = static_cast<int>(obs.size());
    edges_.resize(edges_.size() + obs.size());
    for (size_t k = 0; k < obs.size(); ++k) {
      const Deduction d = DeduceActions(h, obs[k]);
      edges_[first + k].index_offset = static_cast<int>(edge_slots_.size());
      for (Seat s = 0; s < kNumSeats; ++s) {
        for (int local = 0; local < kNumInfoSets; ++local) {
          const int cell = s * kNumInfoSets + local;
          int slot = cell_start_[cell_offset + cell];
          if (HasSeat(movers, s)) {
            const int a = d.action[s][local];
            slot = a == kInconsistent ? size : slot + a;
          }
          edge_slots_.push_back(static_cast<std::uint16_t>(slot));
        }
      }
    }
    for (size_t k = 0; k < obs.size(); ++k) {
      const PublicState child = h.Apply(obs[k], /*record_log=*/false);
      const int child_depth = child.phase() == Phase::kPropose ? depth + 1 : depth;
      const int child_id = Build(child, mask & ObservationMask(obs[k]), child_depth);
      edges_[first + k].child = child_id;
    }
    return id;
  }

  void Forward() {
    for (int id = 0; id < num_nodes(); ++id) {
      const Node& n = nodes_[id];
      if (n.kind != Kind::kInternal) continue;
      double* sigma = &sigma_[n.table_offset];
      const std::uint16_t* start = &cell_start_[n.cell_offset];
      const std::uint8_t* count = &cell_count_[n.cell_offset];
      for (int c = 0; c < kCells; ++c) {
        if (count[c] < 2) continue;
        if (n.frozen) {
          options_.frozen->Strategy(n.state, c / kNumInfoSets, c % kNumInfoSets, count[c],
                                    sigma + start[c]);
        } else {
          RegretMatchingPlus(&regrets_[n.table_offset + start[c]], count[c], sigma + start[c]);
        }
      }
      const double* pi = Flat(reach_[id]);
      for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) {
        const std::uint16_t* slot = &edge_slots_[edges_[e].index_offset];
        double* child = Flat(reach_[edges_[e].child]);
        for (int c = 0; c < kCells; ++c) child[c] = pi[c] * sigma[slot[c]];
      }
    }
  }

  static double ReachProduct(const double* pi, const std::array<std::uint8_t, kNumSeats>& cells) {
    return pi[cells[0]] * pi[cells[1]] * pi[cells[2]] * pi[cells[3]] * pi[cells[4]];
  }

  // Probability-weighted values to counterfactual values: divide by the
  // seat's own reach, with 0/0 taken as 0.
  static void DivideByReach(InfoSetValues& v, const ReachVector& pi) {
    double* x = Flat(v);
    const double* p = Flat(pi);
    for (int c = 0; c < kCells; ++c) x[c] = p[c] == 0.0 ? 0.0 : x[c] / p[c];
  }

  void EvaluateLeaves() {
    if (leaves_.empty()) return;
    for (int k = 0; k < num_leaves(); ++k) {
      const Leaf& leaf = leaves_[k];
      const double* pi = Flat(reach_[leaf_nodes_[k]]);
      JointBelief& bt = leaf_queries_[k].belief;
      bt.fill(0.0);
      double w = 0.0;
      for (size_t j = 0; j < leaf.support.size(); ++j) {
        const double x = leaf.weight[j] * ReachProduct(pi, leaf.cells[j]);
        bt[leaf.support[j]] = x;
        w += x;
      }
      leaf_weight_[k] = w;
      if (w > 0.0) {
        for (double& x : bt) x /= w;
        leaf_queries_[k].proposer = leaf.proposer;
      }
    }
    // Group queries by stage so each network sees one batch.
    for (int stage = 0; stage < StageId::kCount; ++stage) {
      batch_queries_.clear();
      batch_index_.clear();
      for (int k = 0; k < num_leaves(); ++k) {
        if (leaves_[k].stage.Index() != stage || leaf_weight_[k] == 0.0) continue;
        batch_queries_.push_back(leaf_queries_[k]);
        batch_index_.push_back(k);
      }
      if (batch_queries_.empty()) continue;
      batch_out_.resize(batch_queries_.size());
      options_.oracle->EvaluateBatch(StageId::FromIndex(stage), batch_queries_,
                                     batch_out_);
      for (size_t j = 0; j < batch_index_.size(); ++j) {
        leaf_values_[batch_index_[j]] = batch_out_[j];
      }
    }
  }

  void Backward(double weight) {
    for (int id = num_nodes() - 1; id >= 0; --id) {
      const Node& n = nodes_[id];
      InfoSetValues& v = values_[id];
      if (n.kind == Kind::kTerminal) {
        TerminalValues(terminals_[n.payload], Flat(reach_[id]), Flat(v));
        continue;
      }
      if (n.kind == Kind::kLeaf) {
        const double w = leaf_weight_[n.payload];
        if (w == 0.0) {
          v = ZeroValues();
          continue;
        }
        const double* out = Flat(leaf_values_[n.payload]);
        double* x = Flat(v);
        for (int c = 0; c < kCells; ++c) x[c] = w * out[c];
        DivideByReach(v, reach_[id]);
        continue;
      }
      InternalValues(id, weight);
    }
  }

  // Only the touched cells can be nonzero; the rest stay 0 from construction.
  static void TerminalValues(const Terminal& t, const double* pi, double* v) {
    for (std::uint8_t c : t.touched) v[c] = 0.0;
    for (size_t j = 0; j < t.cells.size(); ++j) {
      const auto& cells = t.cells[j];
      const double x = t.weight[j] * ReachProduct(pi, cells);
      if (x == 0.0) continue;
      for (Seat s = 0; s < kNumSeats; ++s) v[cells[s]] += HasSeat(t.spies[j], s) ? -x : x;
    }
    for (std::uint8_t c : t.touched) v[c] = pi[c] == 0.0 ? 0.0 : v[c] / pi[c];
  }

  void InternalValues(int id, double weight) {
    const Node& n = nodes_[id];
    double* m = m_.data();
    std::fill(m, m + n.table_size + 1, 0.0);
    for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) {
      const std::uint16_t* slot = &edge_slots_[edges_[e].index_offset];
      const double* cv = Flat(values_[edges_[e].child]);
      for (int c = 0; c < kCells; ++c) m[slot[c]] += cv[c];
    }
    const double* pi = Flat(reach_[id]);
    double* u = Flat(values_[id]);
    const std::uint16_t* start = &cell_start_[n.cell_offset];
    const std::uint8_t* count = &cell_count_[n.cell_offset];
    for (int c = 0; c < kCells; ++c) {
      const double* ml = m + start[c];
      if (count[c] == 1) {
        u[c] = ml[0];
        continue;
      }
      const int off = n.table_offset + start[c];
      const double* sigma = &sigma_[off];
      double expected = 0.0;
      for (int a = 0; a < count[c]; ++a) expected += sigma[a] * ml[a];
      u[c] = expected;
      if (n.frozen) continue;
      double* r = &regrets_[off];
      double* sum = &strategy_sums_[off];
      for (int a = 0; a < count[c]; ++a) {
        r[a] = std::max(r[a] + ml[a] - expected, 0.0);
        sum[a] += pi[c] * sigma[a] * weight;
      }
    }
  }

  NodeStrategy ExtractStrategy(int node, const std::vector<double>& table) const {
    const Node& n = nodes_[node];
    AVALON_CHECK(n.kind == Kind::kInternal, "strategy requested at a non-internal node");
    NodeStrategy out{};
    const SeatMask movers = n.state.MovingSeats();
    for (Seat s = 0; s < kNumSeats; ++s) {
      if (!HasSeat(movers, s)) continue;
      for (int local = 0; local < kNumInfoSets; ++local) {
        const int count = n.state.ActionCount(s, local);
        const double* x = &table[n.table_offset + cell_start_[n.cell_offset + s * kNumInfoSets + local]];
        double total = 0.0;
        for (int a = 0; a < count; ++a) total += x[a];
        for (int a = 0; a < count; ++a) {
          out[s][local][a] = total > 0.0 ? x[a] / total : 1.0 / count;
        }
      }
    }
    return out;
  }

  JointBelief belief_;
  SolverOptions options_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::uint16_t> edge_slots_;
  std::vector<std::uint16_t> cell_start_;
  std::vector<std::uint8_t> cell_count_;
  std::vector<Terminal> terminals_;
  std::vector<Leaf> leaves_;
  std::vector<int> leaf_nodes_;
  std::vector<double> regrets_;
  std::vector<double> strategy_sums_;
  std::vector<double> sigma_;
  std::vector<ReachVector> reach_;
  std::vector<InfoSetValues> values_;
  int max_table_ = 0;

  // Per-iteration scratch.
  std::vector<LeafQuery> leaf_queries_;
  std::vector<double> leaf_weight_;
  std::vector<InfoSetValues> leaf_values_;
  std::vector<LeafQuery> batch_queries_;
  std::vector<int> batch_index_;
  std::vector<InfoSetValues> batch_out_;
  std::vector<double> m_;
};

// Runs `cfg.iterations` iterations with averaging weights max(t - d, 0) and
// returns the weighted mean root values and the average root strategy.
inline SolveResult SolveSituation(const PublicState& h, const JointBelief& b,
                                  const SolveConfig& cfg,
                                  const SolverOptions& options = {}) {
  if (cfg.iterations <= 0) throw ConfigError("iterations must be positive");
  if (cfg.averaging_delay < 0) throw ConfigError("averaging delay must be >= 0");
  if (cfg.iterations <= cfg.averaging_delay) {
    throw ConfigError("iterations must exceed the averaging delay");
  }
  AVALON_CHECK(IsNormalized(b, 1e-6), "solve belief must be normalized");
  Solver solver(h, b, options);
  SolveResult result;
  double total_weight = 0.0;
  for (int t = 1; t <= cfg.iterations; ++t) {
    const double w = std::max(t - cfg.averaging_delay, 0);
    const InfoSetValues& v = solver.RunIteration(w);
    if (w == 0.0) continue;
    total_weight += w;
    for (Seat s = 0; s < kNumSeats; ++s) {
      for (int local = 0; local < kNumInfoSets; ++local) {
        result.values[s][local] += w * v[s][local];
      }
    }
  }
  for (auto& row : result.values) {
    for (double& x : row) x /= total_weight;
  }
  result.root_strategy = solver.AverageStrategy(0);
  result.root_movers = solver.movers(0);
  result.conservation_gap = solver.ConservationGap();
  return result;
}

}  // namespace avalon
