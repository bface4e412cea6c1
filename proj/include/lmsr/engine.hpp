// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lmsr/data.hpp"
#include "lmsr/expr.hpp"
#include "lmsr/llm.hpp"
#include "lmsr/optimize.hpp"
#include "lmsr/pareto.hpp"
#include "lmsr/prompts.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmsr::engine {

struct BackendConfig {
    enum class Kind { http, scripted };
    Kind kind = Kind::scripted;
    /// Scripted transcript path; "{run}" is replaced by the 1-based run number.
    std::string transcript;
    llm::HttpConfig http;
};

struct RunConfig {
    std::string dataset = "langmuir";
    /// A CSV file used instead of the bundled dataset when set.
    std::optional<std::filesystem::path> data_file;
    std::string operators = "easy";  // "easy" or "hard"
    prompts::PromptConfig prompt;
    std::optional<prompts::Subsample> subsample;
    std::optional<std::filesystem::path> template_dir;
    std::string variant;        // "", "p1", "p2" or "p3"
    std::string challenge_mae;  // p3 target; defaults to the best bundled reference
    pareto::FeedbackPolicy feedback;
    optimize::FitConfig fit;
    int iterations = 15;
    int runs = 5;
    double temperature = 0.7;
    std::uint64_t seed = 0;
    unsigned workers = 1;  // runs executed concurrently
    BackendConfig backend;
    llm::PriceTable prices = llm::default_prices();

    /// Throws config on out-of-range values.
    void validate() const;
    [[nodiscard]] const std::string& model() const { return backend.http.model; }
};

enum class OutcomeStatus { fitted, duplicate, parse_error, invalid, fit_failed };

std::string_view to_string(OutcomeStatus s);

struct ExpressionOutcome {
    std::string text;  // as extracted from the response
    OutcomeStatus status = OutcomeStatus::parse_error;
    std::string error;
    std::optional<expr::Expression> expr;  // set once parsed
    std::vector<double> params;
    double mse = 0.0;
    double mae = 0.0;
    std::size_t complexity = 0;
};

struct IterationRecord {
    int iteration = 0;  // 1-based
    std::string system;
    std::string prompt;
    std::string response;  // raw text, scratchpad included
    std::optional<std::string> retry_prompt;
    std::optional<std::string> retry_response;
    std::vector<std::string> extracted;
    std::vector<ExpressionOutcome> outcomes;
    llm::Usage usage;
};

struct RunLog {
    int run = 1;
    std::string dataset;
    std::optional<std::filesystem::path> data_file;
    std::vector<std::string> variables;
    std::string dependent = "y";
    std::string backend;
    std::string config;  // resolved configuration as INI text
    std::optional<std::string> target;
    std::vector<IterationRecord> iterations;
    pareto::Store store;
    std::optional<int> rediscovery_iteration;
    std::optional<std::string> error;  // set when the run stopped early
    llm::Usage usage;
    std::optional<double> cost_usd;

    [[nodiscard]] bool completed() const { return !error.has_value(); }
    /// Every raw response in request order, retries included.
    [[nodiscard]] std::vector<std::string> responses() const;
};

/// Receives one JSON line per record as the run progresses.
using RecordSink = std::function<void(const std::string&)>;

/// Lines between the last begin marker and the following end marker, with
/// list bullets and math delimiters stripped; at most `limit` non-empty lines.
std::vector<std::string> extract_expressions(std::string_view response, std::size_t limit);

/// Structural SR-equivalence; free exponents never match fixed ones.
bool check_rediscovery(const pareto::Candidate& c, const expr::Expression& target);
bool check_rediscovery(const expr::Expression& e, const expr::Expression& target);

/// Loads the dataset named by the config.
data::Dataset resolve_dataset(const RunConfig& cfg);

/// One run. Backend failures end the loop early and are reported in
/// RunLog::error rather than thrown; configuration problems throw.
RunLog run(const RunConfig& cfg, const data::Dataset& d, llm::Backend& backend, int run_number,
           const RecordSink& sink = {});

using BackendFactory = std::function<std::unique_ptr<llm::Backend>(int run_number)>;

/// The backend the config describes for `run_number`.
std::unique_ptr<llm::Backend> make_backend(const RunConfig& cfg, int run_number);

/// All cfg.runs runs, up to cfg.workers at a time. `sink_for` may return an
/// empty sink.
std::vector<RunLog> run_all(const RunConfig& cfg, const data::Dataset& d, const BackendFactory& backends,
                            const std::function<RecordSink(int run_number)>& sink_for = {});

// RunLog persistence: line-delimited JSON with a header record, one record per
// iteration, and a summary record carrying the store snapshot.
std::string header_record(const RunLog& log);
std::string iteration_record(const IterationRecord& rec);
std::string summary_record(const RunLog& log);
std::string to_jsonl(const RunLog& log);
RunLog parse_run_log(std::string_view jsonl);
RunLog read_run_log(const std::filesystem::path& path);
void write_run_log(const RunLog& log, const std::filesystem::path& path);

struct ReplayReport {
    std::vector<std::string> divergences;
    RunLog replayed;
    [[nodiscard]] bool ok() const { return divergences.empty(); }
};

/// Re-runs a logged run against its own responses and compares prompts,
/// outcomes and metrics (relative tolerance `rel_tol`).
ReplayReport replay(const RunLog& log, double rel_tol = 1e-9);

enum class ScoreMode { cumulative, front };

/// Iteration of the first fitted candidate matching `target`, if any.
std::optional<int> rediscovery_iteration(const RunLog& log, const expr::Expression& target);

/// score[i-1] for iterations 1..n. cumulative: runs that found the target by
/// iteration i. front: runs whose front holds the target after iteration i.
std::vector<int> score_runs(std::span<const RunLog> logs, const expr::Expression& target, int iterations,
                            ScoreMode mode = ScoreMode::cumulative);

/// "iteration,count" rows.
std::string score_csv(std::span<const int> score);

/// "complexity,mse,equation" rows sorted by complexity.
std::string front_csv(std::span<const pareto::Candidate> front);

}  // namespace lmsr::engine
