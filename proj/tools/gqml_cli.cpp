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

// gqml: data generation, experiment runs and summaries for the barcode
// similarity workbench.
//
// Exit codes: 0 success, 1 validation error (bad arguments, config or input
// file), 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gqml/gqml.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int gen_data(int n, std::optional<double> epsilon, int per_class, std::uint64_t seed, const std::string& rounding,
             const std::string& out) {
    gqml::require(n >= 1 && n <= gqml::kMaxQubitsPerRegister,
                  "--n must be in [1, " + std::to_string(gqml::kMaxQubitsPerRegister) + "]");
    const double eps = epsilon.value_or(gqml::default_epsilon(n));
    gqml::require(eps > 0.0 && eps <= 1.0, "--epsilon must be in (0, 1]");
    const auto ds = gqml::generate_dataset(n, eps, per_class, seed, gqml::parse_rounding(rounding));
    gqml::save_dataset(ds, out);
    std::fprintf(stderr, "wrote %zu pairs (n=%d, epsilon=%.6g) to %s\n", ds.size(), n, eps, out.c_str());
    return kExitOk;
}

int run(const std::string& experiment, const std::string& config_path, const std::string& out, bool quiet) {
    const auto e = gqml::parse_experiment(experiment);
    auto cfg = gqml::default_config(e);
    if (!config_path.empty())
        cfg = gqml::config_from_json(gqml::parse_json_text(gqml::read_text_file(config_path), config_path), e);
    cfg.validate();
    gqml::ProgressLog log;
    if (!quiet) log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
    if (e == gqml::Experiment::oracle) {
        const auto lines = gqml::run_oracle_check(cfg, log);
        gqml::write_text_file(out, gqml::oracle_csv_text(lines));
    } else {
        const auto records = gqml::run_sweep(cfg, log);
        gqml::emit_csv(records, out);
        if (!quiet) std::fputs(gqml::format_summary(gqml::summarize(records)).c_str(), stdout);
    }
    return kExitOk;
}

int summarize(const std::string& in) {
    const auto text = gqml::read_text_file(in);
    if (text.rfind(gqml::kOracleCsvHeader, 0) == 0) {
        std::fputs(text.c_str(), stdout);
        return kExitOk;
    }
    std::fputs(gqml::format_summary(gqml::summarize(gqml::parse_csv(text, in))).c_str(), stdout);
    return kExitOk;
}

int validate_pool(int n, int k) {
    gqml::require(n >= 1 && n <= gqml::kMaxQubitsPerRegister, "--n must be in [1, 24]");
    const auto pool = gqml::build_pool(n, static_cast<std::size_t>(k));
    std::printf("%-12s %-9s %-10s %-9s %s\n", "entry", "hermitian", "involutory", "generator", "equivariance");
    for (const auto& e : pool.entries())
        std::printf("%-12s %-9s %-10s %-9s %.3g\n", e.name.c_str(), e.hermitian ? "yes" : "no",
                    e.involutory ? "yes" : "no", e.generator ? "yes" : "no", e.equivariance_norm);
    const int n_check = std::min(n, gqml::kMaxDenseCheckQubits);
    const auto report = gqml::check_invariance_conditions(n_check);
    std::printf("\ninvariance conditions (dense check at n=%d)\n", n_check);
    for (const auto& l : report.lines)
        std::printf("  %-4s %-18s %-24s %.3g\n", l.passed ? "ok" : "FAIL", l.condition.c_str(), l.subject.c_str(),
                    l.residual);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum and classical barcode similarity workbench"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Generate a labeled barcode-pair dataset as JSON");
    int gen_n = 0, per_class = 0;
    std::optional<double> epsilon;
    std::uint64_t seed = 0;
    std::string rounding = "sign", gen_out;
    gen->add_option("--n", gen_n, "Qubits per register (barcode length 2^n)")->required();
    gen->add_option("--epsilon", epsilon, "Covariance strength (default 1/(4 ln N))");
    gen->add_option("--per-class", per_class, "Pairs per class")->required();
    gen->add_option("--seed", seed, "Generator seed")->required();
    gen->add_option("--rounding", rounding, "sign or randomized")->check(CLI::IsMember({"sign", "randomized"}));
    gen->add_option("--out", gen_out, "Output JSON path")->required();

    auto* runc = app.add_subcommand("run", "Run an experiment and write CSV");
    std::string experiment, config, run_out;
    bool quiet = false;
    runc->add_option("--experiment", experiment, "fig3, fig4, fig5 or oracle")
        ->required()
        ->check(CLI::IsMember({"fig3", "fig4", "fig5", "oracle"}));
    runc->add_option("--config", config, "JSON config; omitted fields keep the experiment defaults")
        ->check(CLI::ExistingFile);
    runc->add_option("--out", run_out, "Output CSV path")->required();
    runc->add_flag("--quiet", quiet, "No progress or summary output");

    auto* sum = app.add_subcommand("summarize", "Print mean +- std per (model, n, M) from a run CSV");
    std::string sum_in;
    sum->add_option("--in", sum_in, "CSV written by run")->required()->check(CLI::ExistingFile);

    auto* pool = app.add_subcommand("validate-pool", "Certify the observable pool and invariance conditions");
    int pool_n = 0, pool_k = static_cast<int>(gqml::kDefaultPoolSize);
    pool->add_option("--n", pool_n, "Qubits per register")->required();
    pool->add_option("--k", pool_k, "Pool size")->check(CLI::Range(1, static_cast<int>(gqml::kPoolCatalog.size())));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*gen) return gen_data(gen_n, epsilon, per_class, seed, rounding, gen_out);
        if (*runc) return run(experiment, config, run_out, quiet);
        if (*sum) return summarize(sum_in);
        if (*pool) return validate_pool(pool_n, pool_k);
    } catch (const gqml::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const gqml::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitRuntime;
}
