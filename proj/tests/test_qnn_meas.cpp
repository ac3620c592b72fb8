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

#include "gqml/qnn_meas.hpp"

#include <random>

#include "gtest/gtest.h"

#include "oracles.hpp"

using namespace gqml;

namespace {

std::vector<real> labels_of(const Dataset& ds) {
    std::vector<real> y;
    for (const auto& s : ds.samples) y.push_back(static_cast<real>(s.label));
    return y;
}

FeatureMatrix random_matrix(std::size_t m, std::size_t k, Rng& rng) {
    std::normal_distribution<real> g;
    FeatureMatrix f(m, k);
    for (auto& v : f.data) v = g(rng);
    return f;
}

std::vector<real> random_labels(std::size_t m, Rng& rng) {
    std::vector<real> y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = static_cast<real>(i % 2);
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

real accuracy(const LassoModel& model, const FeatureMatrix& f, std::span<const real> y) {
    int hit = 0;
    for (std::size_t m = 0; m < f.rows; ++m) hit += predict(model, f.row(m)).label == static_cast<int>(y[m]);
    return static_cast<real>(hit) / static_cast<real>(f.rows);
}

} // namespace

TEST(soft_threshold, examples) {
    EXPECT_DOUBLE_EQ(soft_threshold(0.5, 0.2), 0.3);
    EXPECT_DOUBLE_EQ(soft_threshold(-0.5, 0.2), -0.3);
    EXPECT_EQ(soft_threshold(0.1, 0.2), 0.0);
    EXPECT_EQ(soft_threshold(-0.2, 0.2), 0.0);
    EXPECT_THROW(soft_threshold(1.0, -0.1), ValidationError);
}

TEST(extract_features, sum_y_column_vanishes_and_forrelation_column_matches) {
    const auto ds = generate_dataset(3, default_epsilon(3), 6, 11);
    const auto pool = build_pool(3);
    const auto f = extract_features(ds, pool);
    ASSERT_EQ(f.rows, ds.size());
    ASSERT_EQ(f.cols, 10u);
    const auto y = pool.index_of("sum_Y");
    const auto h = pool.index_of("SWAP*H_all");
    for (std::size_t m = 0; m < f.rows; ++m) {
        EXPECT_NEAR(f(m, y), 0.0, 1e-12);
        EXPECT_NEAR(f(m, h), forrelation(ds.samples[m].x1, ds.samples[m].x2), 1e-10);
    }
}

TEST(extract_features, rows_invariant_under_exchange_and_complement) {
    Rng rng(3);
    const auto pool = build_pool(3);
    const auto obs = pool.observables();
    for (int t = 0; t < 10; ++t) {
        const auto p = random_pair(3, rng);
        const auto r = feature_row(p, obs);
        const auto rx = feature_row(p.exchanged(), obs);
        const auto rc = feature_row(p.complemented(), obs);
        for (std::size_t k = 0; k < r.size(); ++k) {
            EXPECT_NEAR(r[k], rx[k], 1e-10) << pool.names()[k];
            EXPECT_NEAR(r[k], rc[k], 1e-10) << pool.names()[k];
        }
    }
}

TEST(extract_features, factorized_route_matches_full_register) {
    const auto ds = generate_dataset(2, default_epsilon(2), 4, 5);
    const auto pool = build_pool(2);
    const auto a = extract_features(ds, pool, FeatureRoute::factorized);
    const auto b = extract_features(ds, pool, FeatureRoute::full_register, 2);
    for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-10);
}

TEST(extract_features, rejects_non_hermitian_pool_entry) {
    const std::vector<std::string> names{"SWAP", "H_all*Z_all"};
    const auto pool = build_pool(2, names);
    const auto ds = generate_dataset(2, default_epsilon(2), 1, 1);
    EXPECT_THROW(extract_features(ds, pool), ValidationError);
}

TEST(lasso_fit, zero_lambda_single_feature_is_least_squares) {
    Rng rng(17);
    for (int t = 0; t < 5; ++t) {
        auto f = random_matrix(30, 1, rng);
        const auto y = random_labels(30, rng);
        LassoOptions opt;
        opt.lambda = 0.0;
        const auto model = lasso_fit(f, y, opt);
        // Slope of y on the standardized feature: cov(z, y) / var(z), var(z) = 1.
        real mean = 0, var = 0, ybar = 0;
        for (std::size_t m = 0; m < 30; ++m) mean += f(m, 0) / 30, ybar += y[m] / 30;
        for (std::size_t m = 0; m < 30; ++m) var += (f(m, 0) - mean) * (f(m, 0) - mean) / 30;
        real cov = 0;
        for (std::size_t m = 0; m < 30; ++m) cov += (f(m, 0) - mean) / std::sqrt(var) * (y[m] - ybar) / 30;
        EXPECT_NEAR(model.alpha[0], cov, 1e-8);
        EXPECT_NEAR(model.intercept, ybar, 1e-12);
        EXPECT_TRUE(model.converged);
    }
}

TEST(lasso_fit, zero_lambda_matches_normal_equations) {
    Rng rng(23);
    auto f = random_matrix(40, 4, rng);
    const auto y = random_labels(40, rng);
    LassoOptions opt;
    opt.lambda = 0.0;
    opt.tol = 1e-13;
    opt.max_sweeps = 100000;
    const auto model = lasso_fit(f, y, opt);
    const auto [coef, b] = model.raw_coefficients();
    Eigen::MatrixXd X(40, 5);
    Eigen::VectorXd Y(40);
    for (int m = 0; m < 40; ++m) {
        X(m, 0) = 1.0;
        for (int k = 0; k < 4; ++k) X(m, k + 1) = f(m, k);
        Y(m) = y[m];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(Y);
    EXPECT_NEAR(b, beta(0), 1e-8);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(coef[k], beta(k + 1), 1e-8);
}

TEST(lasso_fit, null_model_at_and_above_lambda_max) {
    Rng rng(29);
    for (int t = 0; t < 10; ++t) {
        const auto f = random_matrix(20, 10, rng);
        const auto y = random_labels(20, rng);
        const real lmax = lambda_max(f, y);
        for (real scale : {1.0, 1.5, 10.0}) {
            LassoOptions opt;
            opt.lambda = lmax * scale;
            const auto model = lasso_fit(f, y, opt);
            EXPECT_EQ(model.nonzeros(), 0u);
        }
        LassoOptions below;
        below.lambda = lmax * 0.9;
        EXPECT_GT(lasso_fit(f, y, below).nonzeros(), 0u);
    }
}

TEST(lasso_fit, objective_non_increasing_across_sweeps) {
    Rng rng(31);
    for (real lam : {0.0, 1e-3, 1e-2, 1e-1}) {
        const auto f = random_matrix(25, 8, rng);
        const auto y = random_labels(25, rng);
        LassoOptions opt;
        opt.lambda = lam;
        const auto model = lasso_fit(f, y, opt);
        ASSERT_FALSE(model.objective_history.empty());
        for (std::size_t i = 1; i < model.objective_history.size(); ++i)
            EXPECT_LE(model.objective_history[i], model.objective_history[i - 1] + 1e-12);
        EXPECT_NEAR(model.objective_history.back(), lasso_objective(model, f, y), 1e-12);
    }
}

TEST(lasso_fit, sparsity_non_increasing_in_lambda) {
    const auto ds = generate_dataset(3, default_epsilon(3), 10, 41);
    const auto f = extract_features(ds, build_pool(3));
    const auto y = labels_of(ds);
    std::size_t prev = f.cols + 1;
    for (real lam : {1e-4, 1e-3, 1e-2, 1e-1}) {
        LassoOptions opt;
        opt.lambda = lam;
        const auto nz = lasso_fit(f, y, opt).nonzeros();
        EXPECT_LE(nz, prev) << lam;
        prev = nz;
    }
}

TEST(lasso_fit, constant_column_gets_scale_one_and_zero_weight) {
    const auto ds = generate_dataset(2, default_epsilon(2), 8, 43);
    const auto pool = build_pool(2);
    const auto f = extract_features(ds, pool);
    LassoOptions opt;
    opt.lambda = 1e-4;
    const auto model = lasso_fit(f, labels_of(ds), opt);
    const auto k = pool.index_of("sum_Y");
    EXPECT_EQ(model.feature_scales[k], 1.0);
    EXPECT_EQ(model.alpha[k], 0.0);
}

TEST(lasso_fit, destandardized_coefficients_reproduce_scores) {
    Rng rng(37);
    const auto f = random_matrix(20, 6, rng);
    const auto y = random_labels(20, rng);
    LassoOptions opt;
    opt.lambda = 0.01;
    const auto model = lasso_fit(f, y, opt);
    const auto [coef, b] = model.raw_coefficients();
    for (std::size_t m = 0; m < f.rows; ++m) {
        real s = b;
        for (std::size_t k = 0; k < f.cols; ++k) s += coef[k] * f(m, k);
        EXPECT_NEAR(s, model.score(f.row(m)), 1e-10);
    }
}

TEST(lasso_fit, preconditions) {
    FeatureMatrix f(3, 2);
    const std::vector<real> same{1, 1, 1};
    EXPECT_THROW(lasso_fit(f, same), ValidationError);
    const std::vector<real> short_y{0, 1};
    EXPECT_THROW(lasso_fit(f, short_y), ValidationError);
    FeatureMatrix one(1, 2);
    const std::vector<real> y1{0};
    EXPECT_THROW(lasso_fit(one, y1), ValidationError);
}

TEST(lasso_fit, reports_non_convergence_as_flag) {
    Rng rng(47);
    const auto f = random_matrix(20, 10, rng);
    const auto y = random_labels(20, rng);
    LassoOptions opt;
    opt.lambda = 0.0;
    opt.max_sweeps = 1;
    opt.tol = 1e-15;
    const auto model = lasso_fit(f, y, opt);
    EXPECT_FALSE(model.converged);
    EXPECT_EQ(model.sweeps, 1);
}

TEST(lasso_fit, barcode_task_at_four_qubits_per_register) {
    // The classes overlap at this size, so perfect training accuracy is a
    // majority outcome rather than a certainty.
    const auto pool = build_pool(4);
    const auto h = pool.index_of("SWAP*H_all");
    int perfect = 0;
    real mean = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto ds = generate_dataset(4, default_epsilon(4), 10, 2026 + t);
        const auto f = extract_features(ds, pool);
        const auto y = labels_of(ds);
        LassoOptions opt;
        opt.lambda = 1e-3;
        const auto model = lasso_fit(f, y, opt);
        EXPECT_NE(model.alpha[h], 0.0) << t;
        const real acc = accuracy(model, f, y);
        perfect += acc == 1.0;
        mean += acc / 20.0;
    }
    EXPECT_GE(perfect, 10);
    EXPECT_GE(mean, 0.95);
}

TEST(predict, threshold_at_one_half) {
    LassoModel m;
    m.alpha = {0.0};
    m.feature_means = {0.0};
    m.feature_scales = {1.0};
    const std::vector<real> row{0.0};
    m.intercept = 0.9;
    EXPECT_EQ(predict(m, row).label, 1);
    m.intercept = 0.1;
    EXPECT_EQ(predict(m, row).label, 0);
    EXPECT_DOUBLE_EQ(predict(m, row).score, 0.1);
}

TEST(predict, identical_under_exchange_and_complement) {
    const auto ds = generate_dataset(3, default_epsilon(3), 10, 53);
    const auto pool = build_pool(3);
    const auto obs = pool.observables();
    const auto model = lasso_fit(extract_features(ds, pool), labels_of(ds));
    Rng rng(59);
    for (int t = 0; t < 20; ++t) {
        const auto p = random_pair(3, rng);
        const auto a = predict(model, feature_row(p, obs));
        const auto b = predict(model, feature_row(p.exchanged(), obs));
        const auto c = predict(model, feature_row(p.complemented(), obs));
        EXPECT_EQ(a.label, b.label);
        EXPECT_EQ(a.label, c.label);
        EXPECT_NEAR(a.score, b.score, 1e-10);
        EXPECT_NEAR(a.score, c.score, 1e-10);
    }
}

TEST(predict, generalizes_at_five_qubits_per_register) {
    const auto pool = build_pool(5);
    const auto train = generate_dataset(5, default_epsilon(5), 10, 61);
    const auto test = generate_dataset(5, default_epsilon(5), 40, 67);
    const auto model = lasso_fit(extract_features(train, pool), labels_of(train));
    EXPECT_GE(accuracy(model, extract_features(test, pool), labels_of(test)), 0.95);
}

TEST(lasso_model, json_round_trip) {
    const auto ds = generate_dataset(2, default_epsilon(2), 5, 71);
    const auto pool = build_pool(2);
    const auto model = lasso_fit(extract_features(ds, pool), labels_of(ds));
    const auto back = lasso_model_from_json(nlohmann::json::parse(to_json(model).dump()));
    EXPECT_EQ(back.alpha, model.alpha);
    EXPECT_EQ(back.feature_names, pool.names());
    EXPECT_EQ(back.intercept, model.intercept);
    EXPECT_THROW(lasso_model_from_json(nlohmann::json::object()), ParseError);
}
