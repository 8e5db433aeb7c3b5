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

// Stage value networks. Input is the proposer one-hot followed by the joint
// belief (65); two ReLU layers of 80 units feed either a sigmoid layer of
// per-assignment resistance win probabilities (aggregated into 5 x 15
// information-set values) or, in the lesioned variant, a plain linear map to
// the 75 values with a zero-sum correction.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "avalon/belief.hpp"
#include "avalon/binary_io.hpp"
#include "avalon/roles.hpp"
#include "avalon/solver.hpp"
#include "avalon/types.hpp"

namespace avalon {

inline constexpr int kNetInputs = kNumSeats + kNumAssignments;      // 65
inline constexpr int kNetOutputs = kNumSeats * kNumInfoSets;        // 75
inline constexpr int kHiddenUnits = 80;

enum class OutputLayer : std::uint8_t { kWinProbability = 0, kZeroSum = 1 };

inline const char* OutputLayerName(OutputLayer l) {
  return l == OutputLayer::kWinProbability ? "win" : "zero-sum";
}

// Training diverged (non-finite loss).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Row seat*15+local, column rho: +1 when the seat is Resistance under rho and
// rho lies in that information set, -1 when it is a spy there, else 0.
inline const Eigen::MatrixXd& SignedAggregation() {
  static const Eigen::MatrixXd m = [] {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(kNetOutputs, kNumAssignments);
    for (int r = 0; r < kNumAssignments; ++r) {
      for (Seat s = 0; s < kNumSeats; ++s) {
        out(s * kNumInfoSets + InfoSetOf(s, r), r) = IsSpyIn(s, r) ? -1.0 : 1.0;
      }
    }
    return out;
  }();
  return m;
}

}  // namespace detail

template <typename T>
struct NetworkParams {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  Mat w1, w2, w3;
  Vec b1, b2, b3;

  static NetworkParams Zeros(int outputs) {
    NetworkParams p;
    p.w1 = Mat::Zero(kHiddenUnits, kNetInputs);
    p.w2 = Mat::Zero(kHiddenUnits, kHiddenUnits);
    p.w3 = Mat::Zero(outputs, kHiddenUnits);
    p.b1 = Vec::Zero(kHiddenUnits);
    p.b2 = Vec::Zero(kHiddenUnits);
    p.b3 = Vec::Zero(outputs);
    return p;
  }

  // Layers in file order: (weights, bias).
  std::array<std::pair<Mat*, Vec*>, 3> Layers() {
    return {{{&w1, &b1}, {&w2, &b2}, {&w3, &b3}}};
  }
  std::array<std::pair<const Mat*, const Vec*>, 3> Layers() const {
    return {{{&w1, &b1}, {&w2, &b2}, {&w3, &b3}}};
  }

  int size() const {
    int n = 0;
    for (const auto& [w, b] : Layers()) n += static_cast<int>(w->size() + b->size());
    return n;
  }

  // Flat view for gradient checks and optimizers: weights then bias per layer.
  T& at(int index) {
    for (auto& [w, b] : Layers()) {
      if (index < w->size()) return w->data()[index];
      index -= static_cast<int>(w->size());
      if (index < b->size()) return b->data()[index];
      index -= static_cast<int>(b->size());
    }
    throw ContractViolation("parameter index out of range");
  }
  T at(int index) const { return const_cast<NetworkParams*>(this)->at(index); }

  template <typename U>
  NetworkParams<U> Cast() const {
    NetworkParams<U> out;
    out.w1 = w1.template cast<U>();
    out.w2 = w2.template cast<U>();
    out.w3 = w3.template cast<U>();
    out.b1 = b1.template cast<U>();
    out.b2 = b2.template cast<U>();
    out.b3 = b3.template cast<U>();
    return out;
  }
};

template <typename T>
class ValueNetwork {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using Params = NetworkParams<T>;

  static constexpr std::uint32_t kFormatVersion = 1;

  ValueNetwork(StageId stage = {}, OutputLayer layer = OutputLayer::kWinProbability)
      : stage_(stage), layer_(layer), params_(Params::Zeros(OutputSize(layer))) {}

  // Glorot-uniform weights, zero biases.
  static ValueNetwork Initialized(StageId stage, OutputLayer layer, std::mt19937_64& rng) {
    ValueNetwork net(stage, layer);
    for (auto& [w, b] : net.params_.Layers()) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w->rows() + w->cols()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index k = 0; k < w->size(); ++k) w->data()[k] = static_cast<T>(u(rng));
      b->setZero();
    }
    return net;
  }

  static int OutputSize(OutputLayer layer) {
    return layer == OutputLayer::kWinProbability ? kNumAssignments : kNetOutputs;
  }

  const StageId& stage() const { return stage_; }
  OutputLayer layer() const { return layer_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }

  template <typename U>
  ValueNetwork<U> Cast() const {
    ValueNetwork<U> out(stage_, layer_);
    out.params() = params_.template Cast<U>();
    return out;
  }

  // Column k of the returned matrix holds the input of query k.
  static Mat EncodeInputs(std::span<const LeafQuery> queries) {
    Mat x = Mat::Zero(kNetInputs, static_cast<Eigen::Index>(queries.size()));
    for (size_t k = 0; k < queries.size(); ++k) {
      AVALON_CHECK(IsNormalized(queries[k].belief, 1e-6), "network input belief is not normalized");
      AVALON_CHECK(queries[k].proposer >= 0 && queries[k].proposer < kNumSeats, "bad proposer");
      const auto col = static_cast<Eigen::Index>(k);
      x(queries[k].proposer, col) = T(1);
      for (int r = 0; r < kNumAssignments; ++r) x(kNumSeats + r, col) = static_cast<T>(queries[k].belief[r]);
    }
    return x;
  }

  // Forward pass over a 65 x B input; returns 75 x B values.
  Mat Forward(const Mat& x) const {
    Cache c;
    Run(x, c);
    return c.v;
  }

  InfoSetValues Forward(Seat proposer, const JointBelief& b) const {
    LeafQuery q{proposer, b};
    const Mat v = Forward(EncodeInputs(std::span<const LeafQuery>(&q, 1)));
    return ToInfoSetValues(v, 0);
  }

  static InfoSetValues ToInfoSetValues(const Mat& v, Eigen::Index col) {
    InfoSetValues out;
    for (Seat s = 0; s < kNumSeats; ++s) {
      for (int local = 0; local < kNumInfoSets; ++local) {
        out[s][local] = static_cast<double>(v(s * kNumInfoSets + local, col));
      }
    }
    return out;
  }

  // Mean squared error over all 75 outputs of every column; fills `grad`
  // (same shapes as the parameters) when non-null.
  T LossAndGradient(const Mat& x, const Mat& target, Params* grad) const {
    Cache c;
    Run(x, c);
    const T n = static_cast<T>(c.v.size());
    const Mat diff = c.v - target;
    const T loss = diff.squaredNorm() / n;
    if (grad == nullptr) return loss;

    const Mat dv = diff * (T(2) / n);
    Mat dz3;
    if (layer_ == OutputLayer::kWinProbability) {
      const Mat dg = Aggregation().transpose() * dv;
      const Mat dp = (T(2) * c.belief.array() * dg.array()).matrix();
      dz3 = (dp.array() * c.p.array() * (T(1) - c.p.array())).matrix();
    } else {
      // V = R - mass * colsum(R) / 5, so dR = dV - colsum(mass .* dV) / 5.
      const Eigen::Matrix<T, 1, Eigen::Dynamic> k =
          (c.mass.array() * dv.array()).colwise().sum() / T(kNumSeats);
      dz3 = dv.rowwise() - k;
    }
    grad->w3 = dz3 * c.h2.transpose();
    grad->b3 = dz3.rowwise().sum();
    const Mat dz2 = ((params_.w3.transpose() * dz3).array() * (c.z2.array() > T(0)).template cast<T>()).matrix();
    grad->w2 = dz2 * c.h1.transpose();
    grad->b2 = dz2.rowwise().sum();
    const Mat dz1 = ((params_.w2.transpose() * dz2).array() * (c.z1.array() > T(0)).template cast<T>()).matrix();
    grad->w1 = dz1 * x.transpose();
    grad->b1 = dz1.rowwise().sum();
    return loss;
  }

  // Versioned little-endian file: magic, version, stage, output kind, then
  // for each layer its dimensions, row-major weights and bias as float32.
  void Save(const std::string& path) const {
    ByteWriter w;
    w.Raw("AVNW", 4);
    w.U32(kFormatVersion);
    w.U8(static_cast<std::uint8_t>(stage_.succeeds));
    w.U8(static_cast<std::uint8_t>(stage_.fails));
    w.U8(static_cast<std::uint8_t>(stage_.proposal));
    w.U8(static_cast<std::uint8_t>(layer_));
    w.U32(3);
    for (const auto& [mat, bias] : params_.Layers()) {
      w.U32(static_cast<std::uint32_t>(mat->rows()));
      w.U32(static_cast<std::uint32_t>(mat->cols()));
      for (Eigen::Index i = 0; i < mat->rows(); ++i) {
        for (Eigen::Index j = 0; j < mat->cols(); ++j) w.F32(static_cast<float>((*mat)(i, j)));
      }
      for (Eigen::Index i = 0; i < bias->size(); ++i) w.F32(static_cast<float>((*bias)(i)));
    }
    w.WriteFile(path);
  }

  static ValueNetwork Load(const std::string& path) {
    ByteReader r = ByteReader::FromFile(path);
    if (r.Raw(4) != "AVNW") throw FormatError(path + ": not a value network file");
    const std::uint32_t version = r.U32();
    if (version != kFormatVersion) {
      throw FormatError(path + ": unsupported network version " + std::to_string(version));
    }
    StageId stage;
    stage.succeeds = r.U8();
    stage.fails = r.U8();
    stage.proposal = r.U8();
    const std::uint8_t kind = r.U8();
    if (!stage.Valid() || kind > 1) throw FormatError(path + ": bad network header");
    ValueNetwork net(stage, static_cast<OutputLayer>(kind));
    if (r.U32() != 3) throw FormatError(path + ": expected 3 layers");
    for (auto& [mat, bias] : net.params_.Layers()) {
      const std::uint32_t rows = r.U32();
      const std::uint32_t cols = r.U32();
      if (rows != mat->rows() || cols != mat->cols()) {
        throw FormatError(path + ": layer shape mismatch");
      }
      for (Eigen::Index i = 0; i < mat->rows(); ++i) {
        for (Eigen::Index j = 0; j < mat->cols(); ++j) (*mat)(i, j) = static_cast<T>(r.F32());
      }
      for (Eigen::Index i = 0; i < bias->size(); ++i) (*bias)(i) = static_cast<T>(r.F32());
    }
    if (!r.AtEnd()) throw FormatError(path + ": trailing bytes");
    return net;
  }

  static ValueNetwork Load(const std::string& path, const StageId& expected) {
    ValueNetwork net = Load(path);
    if (!(net.stage() == expected)) {
      throw ConfigError(path + " holds stage " + net.stage().ToString() + ", expected " +
                        expected.ToString());
    }
    return net;
  }

 private:
  struct Cache {
    Mat belief, mass, z1, h1, z2, h2, p, v;
  };

  static const Mat& Aggregation() {
    static const Mat m = detail::SignedAggregation().cast<T>();
    return m;
  }
  static const Mat& AbsAggregation() {
    static const Mat m = detail::SignedAggregation().cwiseAbs().cast<T>();
    return m;
  }

  void Run(const Mat& x, Cache& c) const {
    AVALON_CHECK(x.rows() == kNetInputs, "network input must have 65 rows");
    c.belief = x.bottomRows(kNumAssignments);
    c.z1 = (params_.w1 * x).colwise() + params_.b1;
    c.h1 = c.z1.cwiseMax(T(0));
    c.z2 = (params_.w2 * c.h1).colwise() + params_.b2;
    c.h2 = c.z2.cwiseMax(T(0));
    const Mat z3 = (params_.w3 * c.h2).colwise() + params_.b3;
    if (layer_ == OutputLayer::kWinProbability) {
      c.p = (T(1) / (T(1) + (-z3.array()).exp())).matrix();
      const Mat g = ((T(2) * c.p.array() - T(1)) * c.belief.array()).matrix();
      c.v = Aggregation() * g;
    } else {
      c.mass = AbsAggregation() * c.belief;
      const Eigen::Matrix<T, 1, Eigen::Dynamic> total = z3.colwise().sum() / T(kNumSeats);
      c.v = z3 - (c.mass.array().rowwise() * total.array()).matrix();
    }
  }

  StageId stage_;
  OutputLayer layer_;
  Params params_;
};

using Network = ValueNetwork<float>;

// Serves leaf queries from one float network per stage.
class NetworkOracle : public ValueOracle {
 public:
  void Add(Network net) {
    const StageId id = net.stage();
    nets_[id.Index()] = std::make_shared<const Network>(std::move(net));
  }
  bool Has(const StageId& stage) const override { return nets_.count(stage.Index()) > 0; }
  int size() const { return static_cast<int>(nets_.size()); }
  const Network& at(const StageId& stage) const {
    auto it = nets_.find(stage.Index());
    if (it == nets_.end()) throw ConfigError("no value network for stage " + stage.ToString());
    return *it->second;
  }

  void EvaluateBatch(const StageId& stage, std::span<const LeafQuery> queries,
                     std::span<InfoSetValues> out) const override {
    const Network& net = at(stage);
    const Network::Mat v = net.Forward(Network::EncodeInputs(queries));
    for (size_t k = 0; k < queries.size(); ++k) {
      out[k] = Network::ToInfoSetValues(v, static_cast<Eigen::Index>(k));
    }
  }

 private:
  std::map<int, std::shared_ptr<const Network>> nets_;
};

struct TrainingExample {
  Seat proposer = 0;
  JointBelief belief{};
  InfoSetValues target{};
};

struct TrainConfig {
  int epochs = 500;
  int batch_size = 512;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct EpochLoss {
  int epoch = 0;
  double train = 0.0;
  double validation = 0.0;
};

struct TrainResult {
  Network network;
  std::vector<EpochLoss> curve;
  int best_epoch = 0;
  double best_validation = 0.0;
};

inline std::pair<Network::Mat, Network::Mat> EncodeExamples(
    const std::vector<TrainingExample>& data, const std::vector<int>& rows) {
  Network::Mat x = Network::Mat::Zero(kNetInputs, static_cast<Eigen::Index>(rows.size()));
  Network::Mat t(kNetOutputs, static_cast<Eigen::Index>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) {
    const TrainingExample& e = data[rows[k]];
    const auto col = static_cast<Eigen::Index>(k);
    x(e.proposer, col) = 1.0f;
    for (int r = 0; r < kNumAssignments; ++r) x(kNumSeats + r, col) = static_cast<float>(e.belief[r]);
    for (Seat s = 0; s < kNumSeats; ++s) {
      for (int local = 0; local < kNumInfoSets; ++local) {
        t(s * kNumInfoSets + local, col) = static_cast<float>(e.target[s][local]);
      }
    }
  }
  return {std::move(x), std::move(t)};
}

// Adam on the mean squared error over all 75 outputs. A fixed fraction of
// the (shuffled) examples is held out; the weights with the lowest held-out
// loss are returned.
inline TrainResult TrainNetwork(const std::vector<TrainingExample>& data, StageId stage,
                                OutputLayer layer, const TrainConfig& cfg) {
  if (data.empty()) throw ConfigError("empty training set");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0) throw ConfigError("epochs and batch size must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  int held_out = static_cast<int>(std::floor(cfg.validation_fraction * static_cast<double>(data.size())));
  if (data.size() > 1) held_out = std::clamp(held_out, 1, static_cast<int>(data.size()) - 1);
  else held_out = 0;
  const std::vector<int> val_rows(order.end() - held_out, order.end());
  std::vector<int> train_rows(order.begin(), order.end() - held_out);
  const auto [x_all, t_all] = EncodeExamples(data, train_rows);
  const auto [x_val, t_val] = EncodeExamples(data, val_rows);

  TrainResult result;
  Network net = Network::Initialized(stage, layer, rng);
  Network::Params m = Network::Params::Zeros(Network::OutputSize(layer));
  Network::Params v = m;
  Network::Params grad = m;
  const int n_train = static_cast<int>(train_rows.size());
  std::vector<int> perm(n_train);
  std::iota(perm.begin(), perm.end(), 0);
  long step = 0;
  double best = std::numeric_limits<double>::infinity();
  Network::Mat xb, tb;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double total = 0.0;
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      const int size = std::min(cfg.batch_size, n_train - start);
      xb.resize(kNetInputs, size);
      tb.resize(kNetOutputs, size);
      for (int k = 0; k < size; ++k) {
        xb.col(k) = x_all.col(perm[start + k]);
        tb.col(k) = t_all.col(perm[start + k]);
      }
      const double loss = net.LossAndGradient(xb, tb, &grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at stage " + stage.ToString() + ", epoch " +
                            std::to_string(epoch) + ", batch offset " + std::to_string(start));
      }
      total += loss * size;
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (int k = 0; k < 3; ++k) {
        auto [pw, pb] = net.params().Layers()[k];
        auto [mw, mb] = m.Layers()[k];
        auto [vw, vb] = v.Layers()[k];
        auto [gw, gb] = grad.Layers()[k];
        const float b1 = static_cast<float>(cfg.beta1);
        const float b2 = static_cast<float>(cfg.beta2);
        const float lr = static_cast<float>(cfg.learning_rate);
        const float eps = static_cast<float>(cfg.epsilon);
        const float s1 = static_cast<float>(c1);
        const float s2 = static_cast<float>(c2);
        const auto update = [&](auto& p, auto& mm, auto& vv, const auto& g) {
          mm = b1 * mm.array() + (1.0f - b1) * g.array();
          vv = b2 * vv.array() + (1.0f - b2) * g.array().square();
          p.array() -= lr * (mm.array() / s1) / ((vv.array() / s2).sqrt() + eps);
        };
        update(*pw, *mw, *vw, *gw);
        update(*pb, *mb, *vb, *gb);
      }
    }
    EpochLoss e;
    e.epoch = epoch;
    e.train = total / n_train;
    e.validation = held_out > 0 ? net.LossAndGradient(x_val, t_val, nullptr) : e.train;
    if (!std::isfinite(e.validation)) {
      throw TrainingError("non-finite validation loss at stage " + stage.ToString() + ", epoch " +
                          std::to_string(epoch));
    }
    result.curve.push_back(e);
    if (e.validation < best) {
      best = e.validation;
      result.best_epoch = epoch;
      result.network = net;
    }
  }
  result.best_validation = best;
  return result;
}

}  // namespace avalon
