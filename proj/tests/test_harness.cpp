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

#include "gqml/harness.hpp"

#include <filesystem>

#include "gtest/gtest.h"

using namespace gqml;

namespace {

ExperimentConfig tiny(Experiment e) {
    auto c = default_config(e);
    c.n = {2};
    c.per_class = {2, 3};
    c.trials = 3;
    c.test_per_class = 5;
    c.epochs = 3;
    c.siamese.epochs = 3;
    c.siamese_spec.mlp.widths = {4, 2};
    c.siamese_spec.cnn = {2, 2, 2, Padding::automatic};
    c.models = {"QNN_U", "QNN_M", "DNN", "CNN"};
    c.threads = 1;
    return c;
}

std::string strip_wall(const std::string& csv) {
    std::string out;
    std::stringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

} // namespace

TEST(config, defaults_follow_protocols) {
    EXPECT_EQ(default_config(Experiment::fig4).n, std::vector<int>{10});
    EXPECT_EQ(default_config(Experiment::fig4).per_class.size(), 10u);
    EXPECT_EQ(default_config(Experiment::fig4).trials, 50);
    EXPECT_EQ(default_config(Experiment::fig3).trials, 10);
    EXPECT_EQ(default_config(Experiment::fig5).n, (std::vector<int>{2, 3, 4, 5}));
    EXPECT_EQ(default_config(Experiment::fig3).test_per_class, 40);
}

TEST(config, json_round_trip_and_overrides) {
    const auto j = nlohmann::json::parse(R"({"experiment": "fig5", "n": 3, "trials": 2, "lambda": 0.01,
                                             "siamese": {"epochs": 7, "head": "exponential"}})");
    const auto c = config_from_json(j);
    EXPECT_EQ(c.experiment, Experiment::fig5);
    EXPECT_EQ(c.n, std::vector<int>{3});
    EXPECT_EQ(c.per_class, std::vector<int>{5});
    EXPECT_EQ(c.siamese.epochs, 7);
    EXPECT_EQ(c.siamese_spec.head, Head::exponential);
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(config, rejects_bad_input) {
    using nlohmann::json;
    EXPECT_THROW(config_from_json(json::parse(R"({"trials": 0})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"trails": 3})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"models": ["SVM"]})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"trials": "ten"})")), ParseError);
    EXPECT_THROW(config_from_json(json::parse(R"([1, 2])")), ParseError);
    EXPECT_THROW(config_from_json(json::parse(R"({"experiment": "fig4"})"), Experiment::fig3), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"generators": ["H_all*Z_all"]})")), ValidationError);
}

TEST(make_split, train_and_test_are_disjoint) {
    // At n=1 there are only 16 distinct pairs, so collisions are certain.
    for (int t = 0; t < 10; ++t) {
        const auto s = make_split(1, default_epsilon(2), 3, 10, 100 + t, 200 + t);
        EXPECT_EQ(s.test.size(), 20u);
        EXPECT_TRUE(disjoint(s));
        for (std::size_t i = 0; i < s.test.size(); ++i) EXPECT_EQ(s.test.samples[i].label, static_cast<int>(i % 2));
    }
}

TEST(emit_csv, header_and_rows) {
    std::vector<RunRecord> r{{1, "QNN_M", 2, 4, 3, 0.1, 1.0, 0.5, 7, 1.5}, {0, "DNN", 2, 4, 0, 0.25, 0.5, 0.5, 8, 2}};
    const auto text = csv_text(r);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
    EXPECT_EQ(text.substr(text.find('\n') + 1, 3), "0,D");
    const auto back = parse_csv(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].model, "QNN_M");
    EXPECT_EQ(back[1].train_loss, 0.1);
    EXPECT_THROW(csv_text({}), ValidationError);
    EXPECT_THROW(emit_csv(r, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST(parse_csv, reports_line_numbers) {
    const std::string good = std::string(kCsvHeader) + "\n0,QNN_M,2,4,1,0.1,1,1,5,2\n";
    EXPECT_NO_THROW(parse_csv(good));
    try {
        parse_csv(good + "0,QNN_M,2,four,1,0.1,1,1,5,2\n", "runs.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("runs.csv:3"), std::string::npos);
    }
    EXPECT_THROW(parse_csv("a,b\n"), ParseError);
    EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\n"), ParseError);
}

TEST(run_sweep, rerun_is_identical_except_wall_time) {
    const auto cfg = tiny(Experiment::fig3);
    const auto a = csv_text(run_sweep(cfg));
    const auto b = csv_text(run_sweep(cfg));
    EXPECT_EQ(strip_wall(a), strip_wall(b));
}

TEST(run_sweep, trial_order_and_threads_do_not_matter) {
    auto cfg = tiny(Experiment::fig4);
    const auto a = run_sweep(cfg);
    cfg.threads = 3;
    const auto b = run_sweep(cfg, {}, {2, 0, 1});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].key(), b[i].key());
        EXPECT_EQ(a[i].test_acc, b[i].test_acc);
        EXPECT_EQ(a[i].train_loss, b[i].train_loss);
        EXPECT_EQ(a[i].seed, b[i].seed);
    }
}

TEST(run_sweep, record_shapes) {
    auto cfg = tiny(Experiment::fig3);
    cfg.per_class = {2};
    cfg.trials = 1;
    const auto per_epoch = run_sweep(cfg);
    int qnn_u = 0;
    for (const auto& r : per_epoch) {
        qnn_u += r.model == "QNN_U";
        EXPECT_GE(r.test_acc, 0.0);
        EXPECT_LE(r.test_acc, 1.0);
        EXPECT_EQ(r.M, 4);
    }
    EXPECT_EQ(qnn_u, cfg.epochs + 1);
    cfg.record_epochs = false;
    EXPECT_EQ(run_sweep(cfg).size(), 4u);
}

TEST(run_sweep, seeds_differ_across_trials_and_models) {
    const auto rows = run_sweep(tiny(Experiment::fig5));
    std::set<std::tuple<int, std::string, int>> keys;
    std::set<std::uint64_t> seeds;
    for (const auto& r : rows)
        if (keys.insert({r.trial, r.model, r.M}).second) seeds.insert(r.seed);
    EXPECT_EQ(seeds.size(), keys.size());
}

TEST(summarize, mean_and_sample_std_of_final_rows) {
    std::vector<RunRecord> r{{0, "QNN_M", 2, 4, 1, 0.3, 0.5, 0.0, 1, 0},
                             {0, "QNN_M", 2, 4, 2, 0.2, 1.0, 0.5, 1, 0},
                             {1, "QNN_M", 2, 4, 3, 0.1, 1.0, 1.0, 2, 0},
                             {0, "DNN", 2, 4, 5, 0.1, 1.0, 0.25, 3, 0}};
    const auto s = summarize(r);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[1].model, "QNN_M");
    EXPECT_EQ(s[1].count, 2);
    EXPECT_DOUBLE_EQ(s[1].test_mean, 0.75);
    EXPECT_NEAR(s[1].test_std, std::sqrt(0.125), 1e-15);
    EXPECT_DOUBLE_EQ(s[1].epoch_mean, 2.5);
    EXPECT_NE(format_summary(s).find("0.7500 +- 0.3536"), std::string::npos);
}

TEST(oracle, threshold_classifier_and_identity) {
    auto cfg = default_config(Experiment::oracle);
    cfg.n = {2, 5};
    cfg.trials = 2;
    cfg.oracle_samples = 50;
    cfg.identity_samples = 10;
    const auto lines = run_oracle_check(cfg);
    ASSERT_EQ(lines.size(), 2u);
    for (const auto& l : lines) {
        EXPECT_LE(l.identity_residual, 1e-10);
        EXPECT_GT(l.mean_a, l.mean_b);
        EXPECT_GE(l.threshold_acc, 0.0);
        EXPECT_LE(l.threshold_acc, 1.0);
    }
    const auto text = oracle_csv_text(lines);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(fit_f_threshold, separates_clean_data) {
    Rng rng(4);
    Dataset d{3, 0.1, 0, {}};
    while (d.size() < 6) {
        const auto p = random_pair(3, rng);
        const real f = forrelation(p.x1, p.x2);
        if (f > 0.3 && d.size() % 2 == 0) d.samples.push_back({p.x1, p.x2, kCorrelated});
        else if (f < 0.1 && d.size() % 2 == 1) d.samples.push_back({p.x1, p.x2, kUncorrelated});
    }
    const real t = fit_f_threshold(d);
    EXPECT_EQ(f_threshold_accuracy(d, t), 1.0);
    EXPECT_GT(t, 0.1);
    EXPECT_LT(t, 0.3);
}
