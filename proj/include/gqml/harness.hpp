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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "gqml/classical.hpp"
#include "gqml/core.hpp"
#include "gqml/dataset.hpp"
#include "gqml/parallel.hpp"
#include "gqml/qnn_meas.hpp"
#include "gqml/qnn_var.hpp"
#include "gqml/statevec.hpp"
#include "gqml/symmetry.hpp"

namespace gqml {

enum class Experiment { fig3, fig4, fig5, oracle };

inline std::string to_string(Experiment e) {
    switch (e) {
    case Experiment::fig3: return "fig3";
    case Experiment::fig4: return "fig4";
    case Experiment::fig5: return "fig5";
    default: return "oracle";
    }
}

inline Experiment parse_experiment(std::string_view s) {
    if (s == "fig3" || s == "fig3_compare") return Experiment::fig3;
    if (s == "fig4" || s == "fig4_samples") return Experiment::fig4;
    if (s == "fig5" || s == "fig5_scaling") return Experiment::fig5;
    if (s == "oracle" || s == "oracle_check") return Experiment::oracle;
    throw ValidationError("unknown experiment '" + std::string(s) + "' (expected fig3, fig4, fig5 or oracle)");
}

inline const std::vector<std::string> kModelNames{"QNN_U", "QNN_M", "DNN", "CNN"};

struct ExperimentConfig {
    Experiment experiment = Experiment::fig3;
    std::vector<int> n{2};
    std::vector<int> per_class{10};
    int test_per_class = 40;
    int trials = 10;
    std::vector<std::string> models{"QNN_U", "QNN_M"};
    std::optional<real> epsilon; ///< default: 1 / (4 ln N) per n
    Rounding rounding = Rounding::sign;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool record_epochs = true; ///< one row per epoch/sweep instead of final rows only

    // QNN_M
    real lambda = 0.1;
    int max_sweeps = 1000;
    real lasso_tol = 1e-8;
    int pool_size = static_cast<int>(kDefaultPoolSize);

    // QNN_U
    real lr = 0.1;
    int epochs = 200;
    AnsatzSpec ansatz;
    std::string observable = "SWAP";

    // Siamese baselines
    SiameseConfig siamese;
    SiameseSpec siamese_spec;

    // Oracle check
    int oracle_samples = 200;    ///< per class, for F statistics
    int identity_samples = 100;

    real epsilon_for(int n_) const { return epsilon ? *epsilon : default_epsilon(n_); }

    void validate() const {
        require(!n.empty() && !per_class.empty(), "config: n and per_class must be non-empty");
        for (int v : n) require(v >= 1 && v <= 12, "config: n must be in [1, 12], got " + std::to_string(v));
        for (int v : per_class) require(v >= 1, "config: per_class entries must be >= 1");
        require(test_per_class >= 1, "config: test_per_class must be >= 1");
        require(trials >= 1, "config: trials must be >= 1");
        require(!epsilon || (*epsilon > 0.0 && *epsilon <= 1.0), "config: epsilon must be in (0, 1]");
        require(lambda >= 0.0 && max_sweeps >= 1 && lasso_tol > 0.0, "config: bad lasso settings");
        require(pool_size >= 1 && pool_size <= static_cast<int>(kPoolCatalog.size()), "config: bad pool_size");
        require(lr >= 0.0 && epochs >= 0, "config: bad QNN_U optimizer settings");
        require(siamese.lr >= 0.0 && siamese.epochs >= 0 && siamese.batch_size >= 0,
                "config: bad siamese optimizer settings");
        require(oracle_samples >= 2 && identity_samples >= 1, "config: bad oracle sample counts");
        for (const auto& m : models)
            require(std::find(kModelNames.begin(), kModelNames.end(), m) != kModelNames.end(),
                    "config: unknown model '" + m + "' (expected QNN_U, QNN_M, DNN or CNN)");
        ansatz.validate();
    }
};

/// Protocol defaults for each study.
inline ExperimentConfig default_config(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
    case Experiment::fig3: break;
    case Experiment::fig4:
        c.n = {10};
        c.per_class = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        c.trials = 50;
        c.models = {"QNN_M", "DNN", "CNN"};
        c.record_epochs = false;
        break;
    case Experiment::fig5:
        c.n = {2, 3, 4, 5};
        c.per_class = {5};
        c.trials = 50;
        c.models = {"QNN_M", "DNN", "CNN"};
        c.record_epochs = false;
        break;
    case Experiment::oracle:
        c.n = {2, 3, 5, 10};
        c.per_class = {10};
        c.trials = 10;
        c.models = {"QNN_M"};
        c.record_epochs = false;
        break;
    }
    return c;
}

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    if (j.contains(key)) out = json_field<T>(j, key, where);
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok |= it.key() == k;
        if (!ok) throw ValidationError(where + ": unknown field '" + it.key() + "'");
    }
}

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const char* key, const std::string& where) {
    const auto& v = j.at(key);
    if (v.is_array()) return json_field<std::vector<T>>(j, key, where);
    return {json_field<T>(j, key, where)};
}

} // namespace detail

/// Fields absent from the JSON keep the defaults of the named experiment.
inline ExperimentConfig config_from_json(const nlohmann::json& j, std::optional<Experiment> experiment = {}) {
    if (!j.is_object()) throw ParseError("config: top level must be a JSON object");
    detail::check_keys(j,
                       {"experiment", "n", "per_class", "test_per_class", "trials", "models", "epsilon", "rounding",
                        "seed", "threads", "record_epochs", "lambda", "max_sweeps", "lasso_tol", "pool_size", "lr",
                        "epochs", "layers", "generators", "observable", "siamese", "oracle_samples",
                        "identity_samples"},
                       "config");
    Experiment e = experiment.value_or(Experiment::fig3);
    if (j.contains("experiment")) {
        const auto named = parse_experiment(detail::json_field<std::string>(j, "experiment", "config"));
        if (experiment && named != *experiment)
            throw ValidationError("config: experiment '" + to_string(named) + "' conflicts with requested '" +
                                  to_string(*experiment) + "'");
        e = named;
    }
    auto c = default_config(e);
    const std::string w = "config";
    if (j.contains("n")) c.n = detail::scalar_or_list<int>(j, "n", w);
    if (j.contains("per_class")) c.per_class = detail::scalar_or_list<int>(j, "per_class", w);
    detail::read_opt(j, "test_per_class", c.test_per_class, w);
    detail::read_opt(j, "trials", c.trials, w);
    detail::read_opt(j, "models", c.models, w);
    if (j.contains("epsilon") && !j.at("epsilon").is_null()) c.epsilon = detail::json_field<real>(j, "epsilon", w);
    if (j.contains("rounding")) c.rounding = parse_rounding(detail::json_field<std::string>(j, "rounding", w));
    detail::read_opt(j, "seed", c.seed, w);
    detail::read_opt(j, "threads", c.threads, w);
    detail::read_opt(j, "record_epochs", c.record_epochs, w);
    detail::read_opt(j, "lambda", c.lambda, w);
    detail::read_opt(j, "max_sweeps", c.max_sweeps, w);
    detail::read_opt(j, "lasso_tol", c.lasso_tol, w);
    detail::read_opt(j, "pool_size", c.pool_size, w);
    detail::read_opt(j, "lr", c.lr, w);
    detail::read_opt(j, "epochs", c.epochs, w);
    detail::read_opt(j, "layers", c.ansatz.layers, w);
    detail::read_opt(j, "generators", c.ansatz.generators, w);
    detail::read_opt(j, "observable", c.observable, w);
    detail::read_opt(j, "oracle_samples", c.oracle_samples, w);
    detail::read_opt(j, "identity_samples", c.identity_samples, w);
    if (j.contains("siamese")) {
        const auto s = detail::json_field<nlohmann::json>(j, "siamese", w);
        const std::string sw = "config.siamese";
        detail::check_keys(s,
                           {"lr", "epochs", "batch_size", "loss_tolerance", "calibrate_head", "head", "mlp_widths",
                            "cnn_channels", "cnn_embedding", "cnn_padding"},
                           sw);
        detail::read_opt(s, "lr", c.siamese.lr, sw);
        detail::read_opt(s, "epochs", c.siamese.epochs, sw);
        detail::read_opt(s, "batch_size", c.siamese.batch_size, sw);
        detail::read_opt(s, "loss_tolerance", c.siamese.loss_tolerance, sw);
        detail::read_opt(s, "calibrate_head", c.siamese.calibrate_head, sw);
        if (s.contains("head")) c.siamese_spec.head = parse_head(detail::json_field<std::string>(s, "head", sw));
        detail::read_opt(s, "mlp_widths", c.siamese_spec.mlp.widths, sw);
        if (s.contains("cnn_channels")) {
            const auto ch = detail::json_field<std::vector<int>>(s, "cnn_channels", sw);
            require(ch.size() == 2, "config.siamese.cnn_channels must have two entries");
            c.siamese_spec.cnn.channels1 = ch[0];
            c.siamese_spec.cnn.channels2 = ch[1];
        }
        detail::read_opt(s, "cnn_embedding", c.siamese_spec.cnn.embedding, sw);
        if (s.contains("cnn_padding"))
            c.siamese_spec.cnn.padding = parse_padding(detail::json_field<std::string>(s, "cnn_padding", sw));
    }
    c.validate();
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j{{"experiment", to_string(c.experiment)},
                     {"n", c.n},
                     {"per_class", c.per_class},
                     {"test_per_class", c.test_per_class},
                     {"trials", c.trials},
                     {"models", c.models},
                     {"epsilon", c.epsilon ? nlohmann::json(*c.epsilon) : nlohmann::json(nullptr)},
                     {"rounding", to_string(c.rounding)},
                     {"seed", c.seed},
                     {"threads", c.threads},
                     {"record_epochs", c.record_epochs},
                     {"lambda", c.lambda},
                     {"max_sweeps", c.max_sweeps},
                     {"lasso_tol", c.lasso_tol},
                     {"pool_size", c.pool_size},
                     {"lr", c.lr},
                     {"epochs", c.epochs},
                     {"layers", c.ansatz.layers},
                     {"generators", c.ansatz.generators},
                     {"observable", c.observable},
                     {"oracle_samples", c.oracle_samples},
                     {"identity_samples", c.identity_samples}};
    j["siamese"] = {{"lr", c.siamese.lr},
                    {"epochs", c.siamese.epochs},
                    {"batch_size", c.siamese.batch_size},
                    {"loss_tolerance", c.siamese.loss_tolerance},
                    {"calibrate_head", c.siamese.calibrate_head},
                    {"head", to_string(c.siamese_spec.head)},
                    {"mlp_widths", c.siamese_spec.mlp.widths},
                    {"cnn_channels", {c.siamese_spec.cnn.channels1, c.siamese_spec.cnn.channels2}},
                    {"cnn_embedding", c.siamese_spec.cnn.embedding},
                    {"cnn_padding", to_string(c.siamese_spec.cnn.padding)}};
    return j;
}

// ---------------------------------------------------------------------------
// Records

struct RunRecord {
    int trial = 0;
    std::string model;
    int n = 0;
    int M = 0;
    int epoch = 0;
    real train_loss = 0.0;
    real train_acc = 0.0;
    real test_acc = 0.0;
    std::uint64_t seed = 0;
    real wall_ms = 0.0;

    auto key() const { return std::tie(trial, model, n, M, epoch); }
    friend bool operator<(const RunRecord& a, const RunRecord& b) { return a.key() < b.key(); }
};

inline constexpr const char* kCsvHeader = "trial,model,n,M,epoch,train_loss,train_acc,test_acc,seed,wall_ms";

inline std::string format_real(real v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_text(std::vector<RunRecord> records) {
    require(!records.empty(), "emit_csv: no records to write");
    std::sort(records.begin(), records.end());
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : records) {
        out += std::to_string(r.trial) + "," + r.model + "," + std::to_string(r.n) + "," + std::to_string(r.M) + "," +
               std::to_string(r.epoch) + "," + format_real(r.train_loss) + "," + format_real(r.train_acc) + "," +
               format_real(r.test_acc) + "," + std::to_string(r.seed) + "," + format_real(r.wall_ms) + "\n";
    }
    return out;
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
    write_text_file(path, csv_text(records));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::vector<RunRecord> parse_csv(const std::string& text, const std::string& origin = "csv") {
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(origin + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ParseError(origin + ":1: unexpected header '" + line + "'");
    std::vector<RunRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        const auto where = origin + ":" + std::to_string(lineno);
        if (cells.size() != 10)
            throw ParseError(where + ": expected 10 columns, found " + std::to_string(cells.size()));
        try {
            RunRecord r;
            std::size_t pos = 0;
            auto whole = [&](const std::string& s, auto conv) {
                auto v = conv(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return v;
            };
            auto stoi_ = [](const std::string& s, std::size_t* p) { return std::stoi(s, p); };
            auto stod_ = [](const std::string& s, std::size_t* p) { return std::stod(s, p); };
            auto stoull_ = [](const std::string& s, std::size_t* p) { return std::stoull(s, p); };
            r.trial = whole(cells[0], stoi_);
            r.model = cells[1];
            r.n = whole(cells[2], stoi_);
            r.M = whole(cells[3], stoi_);
            r.epoch = whole(cells[4], stoi_);
            r.train_loss = whole(cells[5], stod_);
            r.train_acc = whole(cells[6], stod_);
            r.test_acc = whole(cells[7], stod_);
            r.seed = whole(cells[8], stoull_);
            r.wall_ms = whole(cells[9], stod_);
            if (r.model.empty()) throw std::invalid_argument("model");
            out.push_back(r);
        } catch (const std::exception&) {
            throw ParseError(where + ": malformed row '" + line + "'");
        }
    }
    if (out.empty()) throw ParseError(origin + ": no data rows");
    return out;
}

// ---------------------------------------------------------------------------
// Splits

struct Split {
    Dataset train;
    Dataset test;
};

/// Fresh train and test sets for one (trial, sweep point). Test pairs equal
/// to any training pair are redrawn so the splits are disjoint.
inline Split make_split(int n, real epsilon, int per_class, int test_per_class, std::uint64_t train_seed,
                        std::uint64_t test_seed, Rounding rounding = Rounding::sign) {
    Split s{generate_dataset(n, epsilon, per_class, train_seed, rounding), Dataset{n, epsilon, test_seed, {}}};
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : s.train.samples) seen.insert({p.x1.to_string(), p.x2.to_string()});
    Rng rng(test_seed);
    constexpr int kMaxRedraws = 100000;
    int redraws = 0;
    for (int i = 0; i < 2 * test_per_class; ++i) {
        const bool correlated = i % 2 == 0;
        for (;;) {
            auto p = sample_pair(n, epsilon, correlated, rng, rounding);
            if (!seen.count({p.x1.to_string(), p.x2.to_string()})) {
                s.test.samples.push_back(std::move(p));
                break;
            }
            if (++redraws > kMaxRedraws) throw NumericalError("make_split: cannot draw a disjoint test set");
        }
    }
    return s;
}

inline bool disjoint(const Split& s) {
    for (const auto& a : s.train.samples)
        for (const auto& b : s.test.samples)
            if (a.x1 == b.x1 && a.x2 == b.x2) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Model runners

struct PointContext {
    const ExperimentConfig& cfg;
    int trial;
    int n;
    int per_class;
    const Split& split;
    std::uint64_t seed; ///< model seed
};

inline real elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<real, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline std::vector<RunRecord> run_qnn_m(const PointContext& p) {
    const auto start = std::chrono::steady_clock::now();
    const auto pool = build_pool(p.n, static_cast<std::size_t>(p.cfg.pool_size));
    const auto ftrain = extract_features(p.split.train, pool);
    const auto ftest = extract_features(p.split.test, pool);
    const auto ytrain = p.split.train.labels();
    const auto ytest = p.split.test.labels();
    auto acc = [](const LassoModel& m, const FeatureMatrix& f, const std::vector<real>& y) {
        int hit = 0;
        for (std::size_t r = 0; r < f.rows; ++r) hit += predict(m, f.row(r)).label == static_cast<int>(y[r]);
        return static_cast<real>(hit) / static_cast<real>(f.rows);
    };
    const int M = 2 * p.per_class;
    std::vector<RunRecord> out;
    LassoOptions opt;
    opt.lambda = p.cfg.lambda;
    opt.max_sweeps = p.cfg.max_sweeps;
    opt.tol = p.cfg.lasso_tol;
    if (p.cfg.record_epochs)
        opt.on_sweep = [&](int sweep, const LassoModel& m) {
            out.push_back({p.trial, "QNN_M", p.n, M, sweep, m.objective_history.back(), acc(m, ftrain, ytrain),
                           acc(m, ftest, ytest), p.seed, elapsed_ms(start)});
        };
    const auto model = lasso_fit(ftrain, ytrain, opt);
    if (!p.cfg.record_epochs)
        out.push_back({p.trial, "QNN_M", p.n, M, model.sweeps, model.objective_history.back(),
                       acc(model, ftrain, ytrain), acc(model, ftest, ytest), p.seed, elapsed_ms(start)});
    return out;
}

inline std::vector<RunRecord> run_qnn_u(const PointContext& p) {
    const auto start = std::chrono::steady_clock::now();
    QnnTrainConfig tc;
    tc.lr = p.cfg.lr;
    tc.epochs = p.cfg.epochs;
    tc.observable = p.cfg.observable;
    tc.seed = p.seed;
    const Ansatz ansatz(p.n, p.cfg.ansatz);
    const auto pool = build_pool(p.n, std::vector<std::string>{p.cfg.observable});
    const QnnObjective test_obj(ansatz, pool.observable(p.cfg.observable), p.split.test.samples);
    const int M = 2 * p.per_class;
    std::vector<RunRecord> out;
    real last_test = 0.0;
    auto test_acc = [&](const AnsatzParams& params) {
        return accuracy_of(test_obj.predictions(params), test_obj.labels());
    };
    const auto result = train_qnn_u(p.split.train, p.cfg.ansatz, tc, [&](int epoch, const AnsatzParams& params) {
        if (p.cfg.record_epochs || epoch == tc.epochs) last_test = test_acc(params);
        if (p.cfg.record_epochs) out.push_back({p.trial, "QNN_U", p.n, M, epoch, 0.0, 0.0, last_test, p.seed, 0.0});
    });
    if (p.cfg.record_epochs) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i].train_loss = result.history[i].loss;
            out[i].train_acc = result.history[i].train_acc;
        }
        for (auto& r : out) r.wall_ms = elapsed_ms(start);
    } else {
        const auto& h = result.history.back();
        out.push_back({p.trial, "QNN_U", p.n, M, h.epoch, h.loss, h.train_acc, last_test, p.seed, elapsed_ms(start)});
    }
    return out;
}

inline std::vector<RunRecord> run_siamese(const PointContext& p, Arch arch) {
    const auto start = std::chrono::steady_clock::now();
    auto spec = p.cfg.siamese_spec;
    spec.arch = arch;
    auto sc = p.cfg.siamese;
    sc.seed = p.seed;
    const std::string name = to_string(arch);
    const int M = 2 * p.per_class;
    auto test_acc = [&](const SiameseModel& m) {
        int hit = 0;
        for (const auto& s : p.split.test.samples) hit += m.predict(s) == s.label;
        return static_cast<real>(hit) / static_cast<real>(p.split.test.size());
    };
    std::vector<RunRecord> out;
    std::vector<real> per_epoch_test;
    const auto result = train_siamese(p.split.train, spec, sc, [&](int, const SiameseModel& m) {
        if (p.cfg.record_epochs) per_epoch_test.push_back(test_acc(m));
    });
    const real wall = elapsed_ms(start);
    if (p.cfg.record_epochs) {
        for (std::size_t i = 0; i < result.history.size(); ++i) {
            const auto& h = result.history[i];
            out.push_back({p.trial, name, p.n, M, h.epoch, h.loss, h.train_acc, per_epoch_test[i], p.seed, wall});
        }
    } else {
        const auto& h = result.history.back();
        out.push_back({p.trial, name, p.n, M, h.epoch, h.loss, h.train_acc, test_acc(result.model), p.seed, wall});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SeedPlan {
    std::uint64_t master;
    Experiment experiment;

    std::uint64_t train(int trial, int n, int per_class) const {
        return derive_seed(master, hash_string(to_string(experiment)), trial, n, per_class, hash_string("train"));
    }
    std::uint64_t test(int trial, int n, int per_class) const {
        return derive_seed(master, hash_string(to_string(experiment)), trial, n, per_class, hash_string("test"));
    }
    std::uint64_t model(int trial, int n, int per_class, const std::string& name) const {
        return derive_seed(master, hash_string(to_string(experiment)), trial, n, per_class, hash_string(name));
    }
};

using ProgressLog = std::function<void(const std::string&)>;

/// Every (trial, n, per_class) point gets its own seeded split shared by all
/// models. Points run in parallel; the result is sorted, so it does not depend
/// on execution order or thread count.
inline std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, const ProgressLog& log = {},
                                        std::vector<int> trial_order = {}) {
    cfg.validate();
    if (trial_order.empty()) {
        trial_order.resize(static_cast<std::size_t>(cfg.trials));
        std::iota(trial_order.begin(), trial_order.end(), 0);
    }
    struct Job {
        int trial, n, per_class;
    };
    std::vector<Job> jobs;
    for (int t : trial_order)
        for (int n : cfg.n)
            for (int k : cfg.per_class) jobs.push_back({t, n, k});
    const SeedPlan seeds{cfg.seed, cfg.experiment};
    std::vector<std::vector<RunRecord>> results(jobs.size());
    std::mutex log_mutex;
    std::size_t done = 0;
    parallel_for(
        jobs.size(),
        [&](std::size_t i) {
            const auto& j = jobs[i];
            const real eps = cfg.epsilon_for(j.n);
            const auto split = make_split(j.n, eps, j.per_class, cfg.test_per_class, seeds.train(j.trial, j.n, j.per_class),
                                          seeds.test(j.trial, j.n, j.per_class), cfg.rounding);
            for (const auto& name : cfg.models) {
                const PointContext ctx{cfg, j.trial, j.n, j.per_class, split,
                                       seeds.model(j.trial, j.n, j.per_class, name)};
                std::vector<RunRecord> r;
                if (name == "QNN_M") r = run_qnn_m(ctx);
                else if (name == "QNN_U") r = run_qnn_u(ctx);
                else r = run_siamese(ctx, parse_arch(name));
                results[i].insert(results[i].end(), r.begin(), r.end());
            }
            if (log) {
                std::lock_guard lock(log_mutex);
                ++done;
                log(to_string(cfg.experiment) + ": " + std::to_string(done) + "/" + std::to_string(jobs.size()) +
                    " points (trial " + std::to_string(j.trial) + ", n=" + std::to_string(j.n) +
                    ", M=" + std::to_string(2 * j.per_class) + ")");
            }
        },
        cfg.threads);
    std::vector<RunRecord> all;
    for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
    std::sort(all.begin(), all.end());
    return all;
}

inline std::vector<RunRecord> run_fig3(const ExperimentConfig& cfg, const ProgressLog& log = {}) {
    require(cfg.experiment == Experiment::fig3, "run_fig3: config is for another experiment");
    return run_sweep(cfg, log);
}

inline std::vector<RunRecord> run_fig4(const ExperimentConfig& cfg, const ProgressLog& log = {}) {
    require(cfg.experiment == Experiment::fig4, "run_fig4: config is for another experiment");
    return run_sweep(cfg, log);
}

inline std::vector<RunRecord> run_fig5(const ExperimentConfig& cfg, const ProgressLog& log = {}) {
    require(cfg.experiment == Experiment::fig5, "run_fig5: config is for another experiment");
    return run_sweep(cfg, log);
}

// ---------------------------------------------------------------------------
// Summaries

struct SummaryRow {
    std::string model;
    int n = 0;
    int M = 0;
    int count = 0;
    real test_mean = 0.0, test_std = 0.0;
    real train_mean = 0.0, train_std = 0.0;
    real loss_mean = 0.0;
    real epoch_mean = 0.0;
};

inline std::pair<real, real> mean_std(const std::vector<real>& v) {
    if (v.empty()) return {0.0, 0.0};
    real m = 0.0;
    for (real x : v) m += x;
    m /= static_cast<real>(v.size());
    real s = 0.0;
    for (real x : v) s += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(s / static_cast<real>(v.size() - 1)) : 0.0};
}

/// Final row (largest epoch) of each (trial, model, n, M) run, aggregated over
/// trials. Standard deviations use the sample (n - 1) normalization.
inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    require(!records.empty(), "summarize: no records");
    std::map<std::tuple<int, std::string, int, int>, const RunRecord*> last;
    for (const auto& r : records) {
        auto& slot = last[{r.trial, r.model, r.n, r.M}];
        if (!slot || r.epoch > slot->epoch) slot = &r;
    }
    std::map<std::tuple<std::string, int, int>, std::vector<const RunRecord*>> groups;
    for (const auto& [k, r] : last) groups[{r->model, r->n, r->M}].push_back(r);
    std::vector<SummaryRow> out;
    for (const auto& [k, rs] : groups) {
        std::vector<real> test, train, loss, epoch;
        for (const auto* r : rs) {
            test.push_back(r->test_acc);
            train.push_back(r->train_acc);
            loss.push_back(r->train_loss);
            epoch.push_back(r->epoch);
        }
        SummaryRow row{std::get<0>(k), std::get<1>(k), std::get<2>(k), static_cast<int>(rs.size())};
        std::tie(row.test_mean, row.test_std) = mean_std(test);
        std::tie(row.train_mean, row.train_std) = mean_std(train);
        row.loss_mean = mean_std(loss).first;
        row.epoch_mean = mean_std(epoch).first;
        out.push_back(row);
    }
    return out;
}

inline std::string format_summary(const std::vector<SummaryRow>& rows) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-6s %3s %4s %6s  %-17s  %-17s  %-12s %s\n", "model", "n", "M", "trials",
                  "test_acc", "train_acc", "final_loss", "epochs");
    out += buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-6s %3d %4d %6d  %.4f +- %.4f  %.4f +- %.4f  %-12.4g %.1f\n", r.model.c_str(),
                      r.n, r.M, r.count, r.test_mean, r.test_std, r.train_mean, r.train_std, r.loss_mean,
                      r.epoch_mean);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Oracle check

struct OracleLine {
    int n = 0;
    int N = 0;
    real epsilon = 0.0;
    real mean_a = 0.0, std_a = 0.0; ///< forrelation, correlated class
    real mean_b = 0.0, std_b = 0.0; ///< forrelation, uncorrelated class
    real separation_se = 0.0;      ///< (mean_a - mean_b) / standard error of the difference
    real threshold_acc = 0.0;      ///< F-threshold classifier, fit on train, mean test accuracy
    real qnn_m_acc = 0.0;          ///< mean QNN_M test accuracy on the same splits
    real identity_residual = 0.0;  ///< max |<SWAP*H_all> - F| over random pairs
};

/// Threshold on F maximizing training accuracy; F above it predicts the
/// correlated class.
inline real fit_f_threshold(const Dataset& train) {
    std::vector<std::pair<real, int>> v;
    for (const auto& s : train.samples) v.push_back({forrelation(s.x1, s.x2), s.label});
    std::sort(v.begin(), v.end());
    real best_t = v.front().first - 1.0;
    int best = -1;
    for (std::size_t i = 0; i <= v.size(); ++i) {
        if (i > 0 && i < v.size() && v[i - 1].first == v[i].first) continue;
        const real t = i == 0 ? v.front().first - 1.0
                       : i == v.size() ? v.back().first + 1.0
                                       : 0.5 * (v[i - 1].first + v[i].first);
        int hit = 0;
        for (const auto& [f, y] : v) hit += (f > t ? kCorrelated : kUncorrelated) == y;
        if (hit > best) best = hit, best_t = t;
    }
    return best_t;
}

inline real f_threshold_accuracy(const Dataset& test, real threshold) {
    int hit = 0;
    for (const auto& s : test.samples) hit += (forrelation(s.x1, s.x2) > threshold ? kCorrelated : kUncorrelated) == s.label;
    return static_cast<real>(hit) / static_cast<real>(test.size());
}

inline std::vector<OracleLine> run_oracle_check(const ExperimentConfig& cfg, const ProgressLog& log = {}) {
    cfg.validate();
    const SeedPlan seeds{cfg.seed, Experiment::oracle};
    std::vector<OracleLine> out;
    for (int n : cfg.n) {
        OracleLine line;
        line.n = n;
        line.N = 1 << n;
        line.epsilon = cfg.epsilon_for(n);

        const auto stats = generate_dataset(n, line.epsilon, cfg.oracle_samples,
                                            derive_seed(cfg.seed, hash_string("oracle-stats"), n), cfg.rounding);
        std::vector<real> fa, fb;
        for (const auto& s : stats.samples) (s.label == kCorrelated ? fa : fb).push_back(forrelation(s.x1, s.x2));
        std::tie(line.mean_a, line.std_a) = mean_std(fa);
        std::tie(line.mean_b, line.std_b) = mean_std(fb);
        const real se = std::sqrt(line.std_a * line.std_a / static_cast<real>(fa.size()) +
                                  line.std_b * line.std_b / static_cast<real>(fb.size()));
        line.separation_se = se > 0.0 ? (line.mean_a - line.mean_b) / se : 0.0;

        const auto pool = build_pool(n, static_cast<std::size_t>(cfg.pool_size));
        LassoOptions opt;
        opt.lambda = cfg.lambda;
        opt.max_sweeps = cfg.max_sweeps;
        opt.tol = cfg.lasso_tol;
        for (int t = 0; t < cfg.trials; ++t) {
            const int k = cfg.per_class.front();
            const auto split = make_split(n, line.epsilon, k, cfg.test_per_class, seeds.train(t, n, k),
                                          seeds.test(t, n, k), cfg.rounding);
            line.threshold_acc += f_threshold_accuracy(split.test, fit_f_threshold(split.train)) / cfg.trials;
            const auto model = lasso_fit(extract_features(split.train, pool), split.train.labels(), opt);
            const auto ftest = extract_features(split.test, pool);
            int hit = 0;
            for (std::size_t r = 0; r < ftest.rows; ++r)
                hit += predict(model, ftest.row(r)).label == split.test.samples[r].label;
            line.qnn_m_acc += static_cast<real>(hit) / static_cast<real>(ftest.rows) / cfg.trials;
        }

        // Full-register evaluation, independent of the factorized feature path.
        const auto forr = make_pool_operator("SWAP*H_all", n);
        Rng rng(derive_seed(cfg.seed, hash_string("oracle-identity"), n));
        for (int i = 0; i < cfg.identity_samples; ++i) {
            const auto p = random_pair(n, rng);
            line.identity_residual =
                std::max(line.identity_residual, std::abs(expectation(encode_pair(p), forr) - forrelation(p.x1, p.x2)));
        }
        if (log) log("oracle: n=" + std::to_string(n) + " done");
        out.push_back(line);
    }
    return out;
}

inline constexpr const char* kOracleCsvHeader =
    "n,N,epsilon,mean_F_correlated,std_F_correlated,mean_F_uncorrelated,std_F_uncorrelated,separation_se,"
    "threshold_acc,qnn_m_acc,identity_residual";

inline std::string oracle_csv_text(const std::vector<OracleLine>& lines) {
    require(!lines.empty(), "oracle report is empty");
    std::string out = std::string(kOracleCsvHeader) + "\n";
    for (const auto& l : lines)
        out += std::to_string(l.n) + "," + std::to_string(l.N) + "," + format_real(l.epsilon) + "," +
               format_real(l.mean_a) + "," + format_real(l.std_a) + "," + format_real(l.mean_b) + "," +
               format_real(l.std_b) + "," + format_real(l.separation_se) + "," + format_real(l.threshold_acc) + "," +
               format_real(l.qnn_m_acc) + "," + format_real(l.identity_residual) + "\n";
    return out;
}

} // namespace gqml
