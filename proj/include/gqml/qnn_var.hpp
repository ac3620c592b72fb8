// Copyright 2026 The gqml Authors
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

#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gqml/adam.hpp"
#include "gqml/core.hpp"
#include "gqml/dataset.hpp"
#include "gqml/parallel.hpp"
#include "gqml/statevec.hpp"
#include "gqml/symmetry.hpp"

namespace gqml {

inline const std::vector<std::string> kDefaultGenerators{"sum_Y", "sum_XX", "sum_YY", "SWAP"};

/// Layered ansatz. Within a layer the generators act in listed order, the
/// first name acting on the state first.
struct AnsatzSpec {
    int layers = 3;
    std::vector<std::string> generators = kDefaultGenerators;

    std::size_t num_angles() const { return static_cast<std::size_t>(layers) * generators.size(); }

    void validate() const {
        require(layers >= 0, "ansatz: layers must be >= 0");
        require(!generators.empty(), "ansatz: generator list is empty");
        const auto pool = build_pool(2, generators);
        for (const auto& e : pool.entries())
            require(e.generator, "ansatz: '" + e.name + "' is not usable as a generator");
    }
};

struct AnsatzParams {
    std::vector<real> theta;
    real a = 1.0;
    real b = 0.0;
};

/// theta ~ U(-0.1, 0.1), a = 1, b = 0.
inline AnsatzParams init_params(const AnsatzSpec& spec, Rng& rng) {
    std::uniform_real_distribution<real> u(-0.1, 0.1);
    AnsatzParams p;
    p.theta.resize(spec.num_angles());
    for (auto& t : p.theta) t = u(rng);
    return p;
}

/// exp(-i theta G) for one certified generator.
inline void rotate_generator(std::vector<cplx>& v, const PoolEntry& g, real theta, int n) {
    const auto& f = g.op.factors;
    if (f.size() == 1 && std::holds_alternative<PauliSum>(f[0]) && std::get<PauliSum>(f[0]).pairwise_commuting()) {
        for (const auto& t : std::get<PauliSum>(f[0]).terms) t.string.rotate(v, theta * t.weight);
        return;
    }
    require(g.involutory, "rotate_generator: '" + g.name + "' has no closed-form exponential");
    RegisterState s{n, v};
    s = apply_observable(std::move(s), g.op);
    const real c = std::cos(theta);
    const cplx mis(0.0, -std::sin(theta));
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = c * v[j] + mis * s.amps[j];
}

/// Generators compiled for a fixed register size.
class Ansatz {
  public:
    Ansatz(int n, AnsatzSpec spec) : n_(n), spec_(std::move(spec)) {
        spec_.validate();
        pool_ = build_pool(n, spec_.generators);
    }

    int n() const noexcept { return n_; }
    const AnsatzSpec& spec() const noexcept { return spec_; }

    void apply(RegisterState& s, std::span<const real> theta) const {
        require(s.n == n_, "ansatz: register size mismatch");
        require(theta.size() == spec_.num_angles(), "ansatz: expected " + std::to_string(spec_.num_angles()) +
                                                        " angles, got " + std::to_string(theta.size()));
        const std::size_t G = spec_.generators.size();
        for (int l = 0; l < spec_.layers; ++l)
            for (std::size_t g = 0; g < G; ++g) rotate_generator(s.amps, pool_[g], theta[l * G + g], n_);
    }

  private:
    int n_;
    AnsatzSpec spec_;
    OperatorPool pool_;
};

inline RegisterState apply_ansatz(RegisterState state, const AnsatzSpec& spec, std::span<const real> theta) {
    Ansatz(state.n, spec).apply(state, theta);
    return state;
}

/// <phi|W^dag O W|phi> for an already encoded pair.
inline real raw_expectation(const RegisterState& encoded, const Ansatz& ansatz, std::span<const real> theta,
                            const ObservableExpr& observable) {
    RegisterState s = encoded;
    ansatz.apply(s, theta);
    return expectation(s, observable);
}

inline real model_eval(const SamplePair& x, const Ansatz& ansatz, const AnsatzParams& params,
                       const ObservableExpr& observable) {
    return params.a * raw_expectation(encode_pair(x), ansatz, params.theta, observable) + params.b;
}

inline real model_eval(const SamplePair& x, const AnsatzSpec& spec, const AnsatzParams& params,
                       const ObservableExpr& observable) {
    return model_eval(x, Ansatz(x.x1.qubits(), spec), params, observable);
}

inline real mse_loss(std::span<const real> predictions, std::span<const real> labels) {
    require(predictions.size() == labels.size(), "mse_loss: length mismatch");
    require(!labels.empty(), "mse_loss: empty input");
    real s = 0.0;
    for (std::size_t m = 0; m < labels.size(); ++m) s += (predictions[m] - labels[m]) * (predictions[m] - labels[m]);
    return s / static_cast<real>(labels.size());
}

inline int classify(real prediction) { return prediction > 0.5 ? 1 : 0; }

inline constexpr real kFiniteDifferenceStep = 1e-4;

/// Encoded training set plus everything needed to evaluate loss and gradient.
class QnnObjective {
  public:
    QnnObjective(const Ansatz& ansatz, ObservableExpr observable, std::span<const SamplePair> samples,
                 unsigned threads = 1)
        : ansatz_(&ansatz), observable_(std::move(observable)), threads_(threads) {
        require(!samples.empty(), "qnn: empty training set");
        for (const auto& p : samples) {
            states_.push_back(encode_pair(p));
            labels_.push_back(static_cast<real>(p.label));
        }
    }

    std::size_t size() const noexcept { return states_.size(); }
    std::span<const real> labels() const noexcept { return labels_; }

    std::vector<real> raw(std::span<const real> theta) const {
        std::vector<real> h(states_.size());
        parallel_for(
            states_.size(), [&](std::size_t m) { h[m] = raw_expectation(states_[m], *ansatz_, theta, observable_); },
            threads_);
        return h;
    }

    std::vector<real> predictions(const AnsatzParams& p) const {
        auto h = raw(p.theta);
        for (auto& v : h) v = p.a * v + p.b;
        return h;
    }

    real loss(const AnsatzParams& p) const { return mse_loss(predictions(p), labels_); }

    /// Layout: [theta..., a, b]. Central differences for theta, analytic for a, b.
    std::vector<real> gradient(const AnsatzParams& p, real step = kFiniteDifferenceStep) const {
        const std::size_t T = p.theta.size();
        std::vector<real> g(T + 2, 0.0);
        const auto h = raw(p.theta);
        const real M = static_cast<real>(states_.size());
        for (std::size_t m = 0; m < h.size(); ++m) {
            const real r = p.a * h[m] + p.b - labels_[m];
            g[T] += 2.0 * r * h[m] / M;
            g[T + 1] += 2.0 * r / M;
        }
        for (std::size_t j = 0; j < T; ++j) {
            AnsatzParams q = p;
            q.theta[j] = p.theta[j] + step;
            const real up = loss(q);
            q.theta[j] = p.theta[j] - step;
            const real down = loss(q);
            g[j] = (up - down) / (2.0 * step);
        }
        return g;
    }

  private:
    const Ansatz* ansatz_;
    ObservableExpr observable_;
    unsigned threads_;
    std::vector<RegisterState> states_;
    std::vector<real> labels_;
};

inline std::vector<real> pack(const AnsatzParams& p) {
    std::vector<real> v = p.theta;
    v.push_back(p.a);
    v.push_back(p.b);
    return v;
}

inline void unpack(std::span<const real> v, AnsatzParams& p) {
    require(v.size() == p.theta.size() + 2, "unpack: size mismatch");
    std::copy(v.begin(), v.end() - 2, p.theta.begin());
    p.a = v[v.size() - 2];
    p.b = v[v.size() - 1];
}

struct QnnTrainConfig {
    real lr = 0.1;
    int epochs = 200;
    real fd_step = kFiniteDifferenceStep;
    std::string observable = "SWAP";
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct QnnTrainResult {
    AnsatzParams params;
    std::vector<EpochStat> history; ///< epoch 0 is the initial model
};

using QnnEpochCallback = std::function<void(int epoch, const AnsatzParams&)>;

inline real accuracy_of(std::span<const real> predictions, std::span<const real> labels) {
    int hit = 0;
    for (std::size_t m = 0; m < labels.size(); ++m) hit += classify(predictions[m]) == static_cast<int>(labels[m]);
    return static_cast<real>(hit) / static_cast<real>(labels.size());
}

/// Full-batch Adam on the MSE loss, theta, a and b jointly.
inline QnnTrainResult train_qnn_u(const Dataset& train, const AnsatzSpec& spec, const QnnTrainConfig& cfg,
                                  const QnnEpochCallback& on_epoch = {}) {
    require(cfg.epochs >= 0 && cfg.lr >= 0.0 && cfg.fd_step > 0.0, "train_qnn_u: bad config");
    const Ansatz ansatz(train.n, spec);
    const auto pool = build_pool(train.n, std::vector<std::string>{cfg.observable});
    const QnnObjective obj(ansatz, pool.observable(cfg.observable), train.samples, cfg.threads);

    Rng rng(cfg.seed);
    QnnTrainResult out;
    out.params = init_params(spec, rng);
    AdamState adam(out.params.theta.size() + 2, cfg.lr);
    auto record = [&](int epoch) {
        const auto pred = obj.predictions(out.params);
        const real loss = mse_loss(pred, obj.labels());
        if (!std::isfinite(loss)) throw NumericalError("train_qnn_u: non-finite loss at epoch " + std::to_string(epoch));
        out.history.push_back({epoch, loss, accuracy_of(pred, obj.labels())});
        if (on_epoch) on_epoch(epoch, out.params);
    };
    record(0);
    for (int e = 1; e <= cfg.epochs; ++e) {
        const auto g = obj.gradient(out.params, cfg.fd_step);
        auto v = pack(out.params);
        adam_step(adam, g, v);
        unpack(v, out.params);
        record(e);
    }
    return out;
}

inline nlohmann::json to_json(const AnsatzParams& p, const AnsatzSpec& spec, const std::string& observable,
                              std::uint64_t seed) {
    return {{"theta", p.theta},           {"a", p.a},           {"b", p.b},
            {"layers", spec.layers},      {"generators", spec.generators},
            {"observable", observable},   {"seed", seed}};
}

inline std::pair<AnsatzParams, AnsatzSpec> ansatz_params_from_json(const nlohmann::json& j) {
    AnsatzParams p;
    AnsatzSpec s;
    p.theta = detail::json_field<std::vector<real>>(j, "theta", "ansatz");
    p.a = detail::json_field<real>(j, "a", "ansatz");
    p.b = detail::json_field<real>(j, "b", "ansatz");
    s.layers = detail::json_field<int>(j, "layers", "ansatz");
    s.generators = detail::json_field<std::vector<std::string>>(j, "generators", "ansatz");
    s.validate();
    require(p.theta.size() == s.num_angles(), "ansatz: theta length does not match layers x generators");
    return {p, s};
}

} // namespace gqml
