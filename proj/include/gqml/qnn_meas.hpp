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

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gqml/core.hpp"
#include "gqml/dataset.hpp"
#include "gqml/parallel.hpp"
#include "gqml/statevec.hpp"
#include "gqml/symmetry.hpp"

namespace gqml {

/// M x K matrix of pool expectation values, row-major.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<real> data;
    std::vector<std::string> names;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t m, std::size_t k) : rows(m), cols(k), data(m * k) {}

    real& operator()(std::size_t m, std::size_t k) { return data[m * cols + k]; }
    real operator()(std::size_t m, std::size_t k) const { return data[m * cols + k]; }
    std::span<const real> row(std::size_t m) const { return {data.data() + m * cols, cols}; }
};

enum class FeatureRoute {
    factorized,    ///< per-register product-term evaluation
    full_register, ///< explicit 2^{2n} amplitude vector
};

inline std::vector<real> feature_row(const SamplePair& p, std::span<const ObservableExpr> observables,
                                     FeatureRoute route = FeatureRoute::factorized) {
    std::vector<real> row;
    row.reserve(observables.size());
    if (route == FeatureRoute::factorized) {
        const auto a = phase_state(p.x1);
        const auto b = phase_state(p.x2);
        for (const auto& o : observables) row.push_back(expectation_product(a, b, o));
    } else {
        const auto s = encode_pair(p);
        for (const auto& o : observables) row.push_back(expectation(s, o));
    }
    return row;
}

inline FeatureMatrix extract_features(std::span<const SamplePair> samples, const OperatorPool& pool,
                                      FeatureRoute route = FeatureRoute::factorized, unsigned threads = 1) {
    const auto observables = pool.observables();
    FeatureMatrix f(samples.size(), observables.size());
    f.names = pool.names();
    parallel_for(
        samples.size(),
        [&](std::size_t m) {
            require(samples[m].x1.qubits() == pool.n(), "extract_features: sample size does not match pool");
            auto row = feature_row(samples[m], observables, route);
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (!std::isfinite(row[k])) throw NumericalError("extract_features: non-finite feature");
                f(m, k) = row[k];
            }
        },
        threads);
    return f;
}

inline FeatureMatrix extract_features(const Dataset& ds, const OperatorPool& pool,
                                      FeatureRoute route = FeatureRoute::factorized, unsigned threads = 1) {
    return extract_features(std::span<const SamplePair>(ds.samples), pool, route, threads);
}

/// sign(rho) * max(|rho| - lam, 0)
inline real soft_threshold(real rho, real lam) {
    require(lam >= 0.0, "soft_threshold: lambda must be >= 0");
    if (rho > lam) return rho - lam;
    if (rho < -lam) return rho + lam;
    return 0.0;
}

inline constexpr real kConstantColumnVariance = 1e-12;

struct LassoModel;

struct LassoOptions {
    real lambda = 0.1;
    int max_sweeps = 1000;
    real tol = 1e-8;
    /// Called after every full coordinate sweep with the current model.
    std::function<void(int sweep, const LassoModel&)> on_sweep;
};

struct Prediction {
    int label = 0;
    real score = 0.0;
};

/// Sparse linear model on standardized features with an unpenalized intercept.
struct LassoModel {
    std::vector<real> alpha;
    real lambda = 0.0;
    real intercept = 0.0;
    std::vector<real> feature_means;
    std::vector<real> feature_scales;
    std::vector<std::string> feature_names;
    int sweeps = 0;
    bool converged = false;
    std::vector<real> objective_history; ///< objective after each sweep

    real score(std::span<const real> row) const {
        require(row.size() == alpha.size(), "LassoModel: feature count mismatch");
        real s = intercept;
        for (std::size_t k = 0; k < alpha.size(); ++k)
            s += alpha[k] * (row[k] - feature_means[k]) / feature_scales[k];
        return s;
    }

    std::size_t nonzeros() const {
        return static_cast<std::size_t>(std::count_if(alpha.begin(), alpha.end(), [](real a) { return a != 0.0; }));
    }

    /// Coefficients and intercept in the original (unstandardized) feature units.
    std::pair<std::vector<real>, real> raw_coefficients() const {
        std::vector<real> coef(alpha.size());
        real b = intercept;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            coef[k] = alpha[k] / feature_scales[k];
            b -= coef[k] * feature_means[k];
        }
        return {coef, b};
    }
};

/// Decision threshold on the score; labels are 0/1.
inline constexpr real kDecisionThreshold = 0.5;

inline Prediction predict(const LassoModel& model, std::span<const real> row) {
    const real s = model.score(row);
    return {s > kDecisionThreshold ? 1 : 0, s};
}

namespace detail {

struct Standardized {
    std::vector<real> z; // column-major M x K
    std::vector<real> means, scales;
    std::vector<bool> constant;
};

inline Standardized standardize(const FeatureMatrix& f) {
    const std::size_t M = f.rows, K = f.cols;
    Standardized s{std::vector<real>(M * K), std::vector<real>(K), std::vector<real>(K, 1.0),
                   std::vector<bool>(K, false)};
    for (std::size_t k = 0; k < K; ++k) {
        real mean = 0.0;
        for (std::size_t m = 0; m < M; ++m) mean += f(m, k);
        mean /= static_cast<real>(M);
        real var = 0.0;
        for (std::size_t m = 0; m < M; ++m) var += (f(m, k) - mean) * (f(m, k) - mean);
        var /= static_cast<real>(M);
        s.means[k] = mean;
        if (var < kConstantColumnVariance) {
            s.constant[k] = true;
        } else {
            s.scales[k] = std::sqrt(var);
        }
        for (std::size_t m = 0; m < M; ++m) s.z[k * M + m] = (f(m, k) - mean) / s.scales[k];
    }
    return s;
}

} // namespace detail

/// (1/2M) sum_m (score_m - y_m)^2 + lambda * ||alpha||_1
inline real lasso_objective(const LassoModel& model, const FeatureMatrix& f, std::span<const real> labels) {
    real sse = 0.0;
    for (std::size_t m = 0; m < f.rows; ++m) {
        const real r = model.score(f.row(m)) - labels[m];
        sse += r * r;
    }
    real l1 = 0.0;
    for (real a : model.alpha) l1 += std::abs(a);
    return sse / (2.0 * static_cast<real>(f.rows)) + model.lambda * l1;
}

/// Smallest lambda for which every coefficient is zero:
/// max_k |<z_k, y - mean(y)>| / M on standardized columns.
inline real lambda_max(const FeatureMatrix& f, std::span<const real> labels) {
    const auto s = detail::standardize(f);
    const std::size_t M = f.rows;
    real ybar = 0.0;
    for (real y : labels) ybar += y;
    ybar /= static_cast<real>(M);
    real best = 0.0;
    for (std::size_t k = 0; k < f.cols; ++k) {
        if (s.constant[k]) continue;
        real dot = 0.0;
        for (std::size_t m = 0; m < M; ++m) dot += s.z[k * M + m] * (labels[m] - ybar);
        best = std::max(best, std::abs(dot) / static_cast<real>(M));
    }
    return best;
}

/// Cyclic coordinate descent. Stops when the largest coefficient change in a
/// sweep drops below tol, or after max_sweeps (then converged = false).
inline LassoModel lasso_fit(const FeatureMatrix& f, std::span<const real> labels, const LassoOptions& opt = {}) {
    const std::size_t M = f.rows, K = f.cols;
    require(M >= 2, "lasso_fit: need at least two samples");
    require(labels.size() == M, "lasso_fit: label count mismatch");
    require(opt.lambda >= 0.0 && opt.max_sweeps >= 1 && opt.tol > 0.0, "lasso_fit: bad options");
    bool has0 = false, has1 = false;
    for (real y : labels) {
        has0 |= y == 0.0;
        has1 |= y == 1.0;
    }
    require(has0 && has1, "lasso_fit: both classes must be present");

    const auto s = detail::standardize(f);
    LassoModel model;
    model.alpha.assign(K, 0.0);
    model.lambda = opt.lambda;
    model.feature_means = s.means;
    model.feature_scales = s.scales;
    model.feature_names = f.names;

    real ybar = 0.0;
    for (real y : labels) ybar += y;
    ybar /= static_cast<real>(M);
    model.intercept = ybar;

    std::vector<real> resid(M);
    for (std::size_t m = 0; m < M; ++m) resid[m] = labels[m] - ybar;
    std::vector<real> col_sq(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t m = 0; m < M; ++m) col_sq[k] += s.z[k * M + m] * s.z[k * M + m] / static_cast<real>(M);

    auto objective = [&] {
        real sse = 0.0;
        for (real r : resid) sse += r * r;
        real l1 = 0.0;
        for (real a : model.alpha) l1 += std::abs(a);
        return sse / (2.0 * static_cast<real>(M)) + opt.lambda * l1;
    };

    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        real max_change = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (s.constant[k]) continue;
            const real* z = &s.z[k * M];
            real rho = 0.0;
            for (std::size_t m = 0; m < M; ++m) rho += z[m] * resid[m];
            rho = rho / static_cast<real>(M) + col_sq[k] * model.alpha[k];
            const real updated = soft_threshold(rho, opt.lambda) / col_sq[k];
            const real delta = updated - model.alpha[k];
            if (delta != 0.0) {
                for (std::size_t m = 0; m < M; ++m) resid[m] -= delta * z[m];
                model.alpha[k] = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        model.sweeps = sweep;
        model.objective_history.push_back(objective());
        if (opt.on_sweep) opt.on_sweep(sweep, model);
        if (max_change < opt.tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

inline nlohmann::json to_json(const LassoModel& m) {
    return {{"alpha", m.alpha},
            {"lambda", m.lambda},
            {"intercept", m.intercept},
            {"feature_means", m.feature_means},
            {"feature_scales", m.feature_scales},
            {"pool", m.feature_names},
            {"sweeps", m.sweeps},
            {"converged", m.converged}};
}

inline LassoModel lasso_model_from_json(const nlohmann::json& j) {
    LassoModel m;
    m.alpha = detail::json_field<std::vector<real>>(j, "alpha", "lasso");
    m.lambda = detail::json_field<real>(j, "lambda", "lasso");
    m.intercept = detail::json_field<real>(j, "intercept", "lasso");
    m.feature_means = detail::json_field<std::vector<real>>(j, "feature_means", "lasso");
    m.feature_scales = detail::json_field<std::vector<real>>(j, "feature_scales", "lasso");
    m.feature_names = detail::json_field<std::vector<std::string>>(j, "pool", "lasso");
    m.sweeps = j.value("sweeps", 0);
    m.converged = j.value("converged", false);
    const auto K = m.alpha.size();
    require(m.feature_means.size() == K && m.feature_scales.size() == K && m.feature_names.size() == K,
            "lasso: vector lengths disagree");
    return m;
}

} // namespace gqml
