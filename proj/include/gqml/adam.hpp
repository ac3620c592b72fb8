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
#include <span>
#include <vector>

#include "gqml/core.hpp"

namespace gqml {

struct AdamState {
    std::vector<real> m;
    std::vector<real> v;
    long t = 0;
    real lr = 1e-3;
    real beta1 = 0.9;
    real beta2 = 0.999;
    real eps = 1e-8;

    AdamState() = default;
    AdamState(std::size_t count, real learning_rate) : m(count, 0.0), v(count, 0.0), lr(learning_rate) {}
};

/// Training-set loss and accuracy after a number of optimizer steps.
struct EpochStat {
    int epoch = 0; ///< number of optimizer steps taken
    real loss = 0.0;
    real train_acc = 0.0;
};

/// One bias-corrected Adam update of params in place.
inline void adam_step(AdamState& s, std::span<const real> grads, std::span<real> params) {
    require(grads.size() == params.size() && s.m.size() == params.size() && s.v.size() == params.size(),
            "adam_step: shape mismatch");
    ++s.t;
    const real c1 = 1.0 - std::pow(s.beta1, static_cast<real>(s.t));
    const real c2 = 1.0 - std::pow(s.beta2, static_cast<real>(s.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const real g = grads[i];
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
        const real mhat = s.m[i] / c1;
        const real vhat = s.v[i] / c2;
        params[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}

} // namespace gqml
