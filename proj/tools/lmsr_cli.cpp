// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/lmsr.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kRuntimeError = 2;

int exit_code(lmsr_status s) {
    switch (s) {
        case LMSR_OK: return kOk;
        case LMSR_E_TRANSPORT:
        case LMSR_E_API:
        case LMSR_E_TRANSCRIPT_EXHAUSTED:
        case LMSR_E_NO_FINITE_OBJECTIVE:
        case LMSR_E_INTERNAL: return kRuntimeError;
        default: return kUserError;
    }
}

// Prints the library error and returns the exit code for `s`.
int fail(lmsr_status s, const std::string& what) {
    std::cerr << "lmsr: " << what << ": " << lmsr_status_name(s) << ": " << lmsr_last_error() << "\n";
    return exit_code(s);
}

struct StringDeleter {
    void operator()(char* s) const { lmsr_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct LogDeleter {
    void operator()(lmsr_runlog* l) const { lmsr_runlog_free(l); }
};
using Log = std::unique_ptr<lmsr_runlog, LogDeleter>;

struct ConfigDeleter {
    void operator()(lmsr_config* c) const { lmsr_config_free(c); }
};

bool write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        std::cerr << "lmsr: cannot write " << path.string() << "\n";
        return false;
    }
    return true;
}

// Loads every log or reports the first failure.
std::optional<int> load_logs(const std::vector<std::string>& paths, std::vector<Log>& out) {
    for (const auto& p : paths) {
        lmsr_runlog* raw = nullptr;
        if (auto s = lmsr_runlog_read(p.c_str(), &raw); s != LMSR_OK) return fail(s, "reading " + p);
        out.emplace_back(raw);
    }
    return std::nullopt;
}

std::vector<const lmsr_runlog*> views(const std::vector<Log>& logs) {
    std::vector<const lmsr_runlog*> v;
    for (const auto& l : logs) v.push_back(l.get());
    return v;
}

struct RunOptions {
    std::string config_path;
    std::optional<std::string> dataset, operators, policy, backend, transcript, variant, model;
    std::optional<int> iterations, runs, subsample;
    std::optional<unsigned> workers;
    std::optional<double> temperature;
    std::optional<std::uint64_t> seed;
    bool no_context = false, no_data = false, no_scratchpad = false;
    std::string out = "runs";
};

int cmd_run(const RunOptions& o) {
    lmsr_config* raw = nullptr;
    auto s = o.config_path.empty() ? lmsr_config_new(&raw) : lmsr_config_load(o.config_path.c_str(), &raw);
    if (s != LMSR_OK) return fail(s, "loading config");
    std::unique_ptr<lmsr_config, ConfigDeleter> cfg(raw);

    std::vector<std::tuple<std::string, std::string, std::string>> sets;
    auto add = [&](const char* sec, const char* key, const std::string& v) { sets.emplace_back(sec, key, v); };
    if (o.dataset) add("run", "dataset", *o.dataset);
    if (o.iterations) add("run", "iterations", std::to_string(*o.iterations));
    if (o.runs) add("run", "runs", std::to_string(*o.runs));
    if (o.seed) add("run", "seed", std::to_string(*o.seed));
    if (o.workers) add("run", "workers", std::to_string(*o.workers));
    if (o.variant) add("run", "variant", *o.variant);
    if (o.operators) add("prompt", "operators", *o.operators);
    if (o.no_context) add("prompt", "context", "false");
    if (o.no_data) add("prompt", "data", "false");
    if (o.no_scratchpad) add("prompt", "scratchpad", "false");
    if (o.subsample) add("prompt", "subsample", std::to_string(*o.subsample));
    if (o.policy) add("feedback", "policy", *o.policy);
    if (o.backend) add("backend", "kind", *o.backend);
    if (o.transcript) add("backend", "transcript", *o.transcript);
    if (o.model) add("backend", "model", *o.model);
    if (o.temperature) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", *o.temperature);
        add("backend", "temperature", buf);
    }
    for (const auto& [sec, key, value] : sets) {
        if (s = lmsr_config_set(cfg.get(), sec.c_str(), key.c_str(), value.c_str()); s != LMSR_OK)
            return fail(s, "--" + key);
    }
    if (s = lmsr_config_validate(cfg.get()); s != LMSR_OK) return fail(s, "config");

    const fs::path out(o.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::cerr << "lmsr: cannot create " << out.string() << ": " << ec.message() << "\n";
        return kUserError;
    }
    char* ini = nullptr;
    if (s = lmsr_config_to_ini(cfg.get(), &ini); s != LMSR_OK) return fail(s, "config");
    const bool wrote = write_file(out / "config.ini", CString(ini).get());
    if (!wrote) return kUserError;

    const int n = lmsr_config_runs(cfg.get());
    std::vector<lmsr_runlog*> raw_logs(static_cast<std::size_t>(n), nullptr);
    s = lmsr_run_all(cfg.get(), out.string().c_str(), raw_logs.data());
    std::vector<Log> logs;
    for (auto* l : raw_logs)
        if (l) logs.emplace_back(l);
    if (s != LMSR_OK) return fail(s, "run");

    int code = kOk;
    double total_cost = 0.0;
    bool priced = true;
    long total_prompt = 0, total_completion = 0;
    std::printf("%-5s %-11s %-7s %-12s %-10s %-12s %s\n", "run", "iterations", "store", "rediscovery", "tokens",
                "cost_usd", "status");
    for (const auto& l : logs) {
        const int r = lmsr_runlog_run(l.get());
        char* csv = nullptr;
        if (lmsr_runlog_store_csv(l.get(), &csv) == LMSR_OK) {
            CString holder(csv);
            if (!write_file(out / ("run" + std::to_string(r) + ".store.csv"), holder.get())) code = kUserError;
        }
        long pt = 0, ct = 0;
        lmsr_runlog_usage(l.get(), &pt, &ct);
        total_prompt += pt;
        total_completion += ct;
        double cost = 0.0;
        const bool has_cost = lmsr_runlog_cost(l.get(), &cost) != 0;
        priced = priced && has_cost;
        total_cost += cost;
        const int found = lmsr_runlog_rediscovery(l.get());
        const char* err = lmsr_runlog_error(l.get());
        std::printf("%-5d %-11d %-7zu %-12s %-10ld %-12s %s\n", r, lmsr_runlog_iterations(l.get()),
                    lmsr_runlog_store_size(l.get()), found ? std::to_string(found).c_str() : "-", pt + ct,
                    has_cost ? std::to_string(cost).c_str() : "-", err ? err : "completed");
        if (err) code = kRuntimeError;
    }
    const auto found_runs = std::count_if(logs.begin(), logs.end(), [](const Log& l) {
        return lmsr_runlog_rediscovery(l.get()) > 0;
    });
    std::printf("target found in %ld/%d runs\n", static_cast<long>(found_runs), n);
    std::printf("tokens: %ld prompt, %ld completion", total_prompt, total_completion);
    if (priced) std::printf("; estimated cost %.4f USD", total_cost);
    std::printf("\nlogs written to %s\n", out.string().c_str());
    return code;
}

int cmd_replay(const std::vector<std::string>& paths, double tol) {
    std::vector<Log> logs;
    if (auto e = load_logs(paths, logs)) return *e;
    int code = kOk;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        int ok = 0;
        char* report = nullptr;
        if (auto s = lmsr_replay(logs[i].get(), tol, &ok, &report); s != LMSR_OK) return fail(s, "replaying " + paths[i]);
        CString holder(report);
        if (ok) {
            std::printf("%s: reproduced\n", paths[i].c_str());
        } else {
            std::printf("%s: DIVERGED\n%s", paths[i].c_str(), holder.get());
            code = kRuntimeError;
        }
    }
    return code;
}

int cmd_score(const std::vector<std::string>& paths, std::string target, int iterations, const std::string& mode,
              const std::string& out) {
    std::vector<Log> logs;
    if (auto e = load_logs(paths, logs)) return *e;
    if (target.empty()) {
        const char* t = lmsr_runlog_target(logs.front().get());
        if (t == nullptr) {
            std::cerr << "lmsr: the logs carry no target model; pass --target\n";
            return kUserError;
        }
        target = t;
    }
    if (iterations <= 0)
        for (const auto& l : logs) iterations = std::max(iterations, lmsr_runlog_iterations(l.get()));
    if (iterations <= 0) {
        std::cerr << "lmsr: the logs hold no iterations; pass --iterations\n";
        return kUserError;
    }
    std::vector<int> score(static_cast<std::size_t>(iterations), 0);
    const auto v = views(logs);
    const auto m = mode == "front" ? LMSR_SCORE_FRONT : LMSR_SCORE_CUMULATIVE;
    if (auto s = lmsr_score(v.data(), v.size(), target.c_str(), iterations, m, score.data()); s != LMSR_OK)
        return fail(s, "scoring");

    std::string csv = "iteration,count\n";
    for (std::size_t i = 0; i < score.size(); ++i) csv += std::to_string(i + 1) + "," + std::to_string(score[i]) + "\n";
    if (!out.empty() && !write_file(out, csv)) return kUserError;

    std::printf("target: %s (%s score over %zu runs)\n", target.c_str(), mode.c_str(), logs.size());
    std::printf("%-10s %s\n", "iteration", "found");
    for (std::size_t i = 0; i < score.size(); ++i)
        std::printf("%-10zu %d/%zu\n", i + 1, score[i], logs.size());
    return kOk;
}

int cmd_pareto(const std::vector<std::string>& paths, const std::string& out) {
    std::vector<Log> logs;
    if (auto e = load_logs(paths, logs)) return *e;
    const auto v = views(logs);
    if (!out.empty()) {
        std::error_code ec;
        fs::create_directories(out, ec);
        for (std::size_t i = 0; i < v.size(); ++i) {
            char* csv = nullptr;
            if (auto s = lmsr_front_csv(&v[i], 1, &csv); s != LMSR_OK) return fail(s, "front of " + paths[i]);
            CString holder(csv);
            const auto name = "run" + std::to_string(lmsr_runlog_run(v[i])) + ".front.csv";
            if (!write_file(fs::path(out) / name, holder.get())) return kUserError;
        }
    }
    char* merged = nullptr;
    if (auto s = lmsr_front_csv(v.data(), v.size(), &merged); s != LMSR_OK) return fail(s, "merged front");
    CString holder(merged);
    if (!out.empty()) {
        if (!write_file(fs::path(out) / "front.csv", holder.get())) return kUserError;
        std::printf("fronts written to %s\n", out.c_str());
    }
    std::fputs(holder.get(), stdout);
    return kOk;
}

int cmd_datasets(const std::string& references) {
    char* text = nullptr;
    const auto s = references.empty() ? lmsr_datasets_table(&text) : lmsr_reference_table(references.c_str(), &text);
    if (s != LMSR_OK) return fail(s, "datasets");
    CString holder(text);
    std::fputs(holder.get(), stdout);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic regression with a chat model in the loop"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(lmsr_version()));

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Run the search loop and write run logs");
    run->add_option("-c,--config", ro.config_path, "INI config file")->check(CLI::ExistingFile);
    run->add_option("--dataset", ro.dataset, "Bundled dataset id");
    run->add_option("--operators", ro.operators, "Operator regime")->check(CLI::IsMember({"easy", "hard"}));
    run->add_option("--iterations", ro.iterations, "Iterations per run")->check(CLI::PositiveNumber);
    run->add_option("--runs", ro.runs, "Independent runs")->check(CLI::PositiveNumber);
    run->add_option("--workers", ro.workers, "Runs executed concurrently")->check(CLI::PositiveNumber);
    run->add_option("--temperature", ro.temperature, "Sampling temperature")->check(CLI::Range(0.0, 2.0));
    run->add_option("--policy", ro.policy, "Feedback policy")->check(CLI::IsMember({"standard", "top5"}));
    run->add_option("--variant", ro.variant, "Prompt variant")->check(CLI::IsMember({"p1", "p2", "p3"}));
    run->add_option("--subsample", ro.subsample, "Rows shown in the prompt")->check(CLI::PositiveNumber);
    run->add_flag("--no-context", ro.no_context, "Leave the scientific context out of the prompt");
    run->add_flag("--no-data", ro.no_data, "Leave the data out of the prompt");
    run->add_flag("--no-scratchpad", ro.no_scratchpad, "Ask for the expressions only");
    run->add_option("--backend", ro.backend, "Chat backend")->check(CLI::IsMember({"http", "scripted"}));
    run->add_option("--transcript", ro.transcript, "Scripted transcript; {run} becomes the run number");
    run->add_option("--model", ro.model, "Model name");
    run->add_option("--seed", ro.seed, "Base seed");
    run->add_option("--out", ro.out, "Output directory")->capture_default_str();

    std::vector<std::string> replay_logs;
    double replay_tol = 1e-9;
    auto* replay = app.add_subcommand("replay", "Recompute run logs from their recorded responses");
    replay->add_option("logs", replay_logs, "Run log files")->required()->check(CLI::ExistingFile);
    replay->add_option("--tol", replay_tol, "Relative tolerance")->capture_default_str();

    std::vector<std::string> score_logs;
    std::string score_target, score_mode = "cumulative", score_out;
    int score_iterations = 0;
    auto* score = app.add_subcommand("score", "Count runs that found the target at each iteration");
    score->add_option("logs", score_logs, "Run log files")->required()->check(CLI::ExistingFile);
    score->add_option("--target", score_target, "Dataset id or expression (default: the logged target)");
    score->add_option("--iterations", score_iterations, "Iterations to score (default: longest log)");
    score->add_option("--mode", score_mode, "cumulative or front")
        ->check(CLI::IsMember({"cumulative", "front"}))
        ->capture_default_str();
    score->add_option("--out", score_out, "Score CSV path");

    std::vector<std::string> pareto_logs;
    std::string pareto_out;
    auto* pareto = app.add_subcommand("pareto", "Per-run and merged Pareto fronts");
    pareto->add_option("logs", pareto_logs, "Run log files")->required()->check(CLI::ExistingFile);
    pareto->add_option("--out", pareto_out, "Directory for the front CSV files");

    std::string references;
    auto* datasets = app.add_subcommand("datasets", "List bundled datasets");
    datasets->add_option("--references", references, "Show the reference results of a dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUserError;
    }

    if (*run) return cmd_run(ro);
    if (*replay) return cmd_replay(replay_logs, replay_tol);
    if (*score) return cmd_score(score_logs, score_target, score_iterations, score_mode, score_out);
    if (*pareto) return cmd_pareto(pareto_logs, pareto_out);
    if (*datasets) return cmd_datasets(references);
    return kUserError;
}
