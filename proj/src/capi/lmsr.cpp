// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/lmsr.h"

#include "lmsr/config.hpp"
#include "lmsr/data.hpp"
#include "lmsr/engine.hpp"
#include "lmsr/error.hpp"
#include "lmsr/expr.hpp"
#include "lmsr/optimize.hpp"
#include "lmsr/pareto.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <new>
#include <sstream>

struct lmsr_dataset {
    lmsr::data::Dataset d;
};
struct lmsr_expr {
    lmsr::expr::Expression e;
};
struct lmsr_config {
    lmsr::engine::RunConfig c;
};
struct lmsr_runlog {
    lmsr::engine::RunLog log;
};

namespace {

using namespace lmsr;

thread_local std::string g_last_error;

lmsr_status to_status(Errc c) { return static_cast<lmsr_status>(static_cast<int>(c) + 1); }

template <class F>
lmsr_status guard(F&& f) noexcept {
    try {
        g_last_error.clear();
        f();
        return LMSR_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return LMSR_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LMSR_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return LMSR_E_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) throw Error(Errc::invalid_argument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<std::string> x_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
    return out;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

expr::Expression resolve_target(const char* target, std::size_t n_vars) {
    const std::string t = target;
    for (const auto& entry : data::manifest()) {
        if (entry.id != t) continue;
        if (!entry.target) throw Error(Errc::invalid_argument, "dataset " + t + " has no target model");
        return expr::parse(*entry.target, expr::Dialect::infix, x_names(n_vars));
    }
    return expr::parse(t, expr::Dialect::infix, x_names(n_vars));
}

}  // namespace

extern "C" {

const char* lmsr_version(void) { return "0.1.0"; }

const char* lmsr_last_error(void) { return g_last_error.c_str(); }

const char* lmsr_status_name(lmsr_status status) {
    if (status == LMSR_OK) return "Ok";
    if (status < LMSR_OK || status > LMSR_E_INTERNAL) return "Unknown";
    static std::string names[LMSR_E_INTERNAL + 1];
    static std::once_flag once;
    std::call_once(once, [] {
        for (int i = 1; i <= LMSR_E_INTERNAL; ++i) names[i] = std::string(errc_name(static_cast<Errc>(i - 1)));
    });
    return names[status].c_str();
}

void lmsr_string_free(char* s) { std::free(s); }

lmsr_status lmsr_dataset_load_builtin(const char* id, lmsr_dataset** out) {
    return guard([&] {
        require(id, "id");
        require(out, "out");
        *out = new lmsr_dataset{data::load_builtin(id)};
    });
}

lmsr_status lmsr_dataset_load_csv(const char* path, lmsr_dataset** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new lmsr_dataset{data::load_csv(path)};
    });
}

void lmsr_dataset_free(lmsr_dataset* d) { delete d; }

size_t lmsr_dataset_rows(const lmsr_dataset* d) { return d ? d->d.row_count() : 0; }

size_t lmsr_dataset_inputs(const lmsr_dataset* d) { return d ? d->d.input_count() : 0; }

lmsr_status lmsr_datasets_table(char** out) {
    return guard([&] {
        require(out, "out");
        std::string s = pad("id", 20) + pad("rows", 6) + pad("provenance", 15) + pad("target", 30) + "source\n";
        for (const auto& e : data::manifest()) {
            s += pad(e.id, 20) + pad(std::to_string(e.rows), 6) + pad(e.provenance, 15) +
                 pad(e.target.value_or("-"), 30) + e.source + "\n";
        }
        *out = dup(s);
    });
}

lmsr_status lmsr_reference_table(const char* id, char** out) {
    return guard([&] {
        require(id, "id");
        require(out, "out");
        *out = dup(data::reference_table(data::manifest_entry(id)));
    });
}

lmsr_status lmsr_expr_parse(const char* text, const char* dialect, size_t n_vars, lmsr_expr** out) {
    return guard([&] {
        require(text, "text");
        require(out, "out");
        auto d = expr::Dialect::infix;
        if (dialect != nullptr) {
            auto parsed = expr::dialect_from_string(dialect);
            if (!parsed) throw Error(Errc::invalid_argument, std::string("unknown dialect '") + dialect + "'");
            d = *parsed;
        }
        *out = new lmsr_expr{expr::parse(text, d, x_names(n_vars))};
    });
}

void lmsr_expr_free(lmsr_expr* e) { delete e; }

lmsr_status lmsr_expr_render(const lmsr_expr* e, char** out) {
    return guard([&] {
        require(e, "expression");
        require(out, "out");
        *out = dup(expr::render(e->e));
    });
}

lmsr_status lmsr_expr_canonical(const lmsr_expr* e, char** out) {
    return guard([&] {
        require(e, "expression");
        require(out, "out");
        *out = dup(expr::render(expr::canonicalize(e->e)));
    });
}

size_t lmsr_expr_complexity(const lmsr_expr* e) { return e ? expr::complexity(e->e) : 0; }

size_t lmsr_expr_constant_count(const lmsr_expr* e) { return e ? e->e.constant_count() : 0; }

int lmsr_expr_equivalent(const lmsr_expr* a, const lmsr_expr* b) {
    if (a == nullptr || b == nullptr) return 0;
    try {
        return expr::sr_equivalent(a->e, b->e) ? 1 : 0;
    } catch (...) {
        return 0;
    }
}

lmsr_fit_options lmsr_fit_options_default(void) {
    const optimize::FitConfig d;
    return lmsr_fit_options{d.hops, d.refits, d.max_evals, d.tol, d.seed};
}

lmsr_status lmsr_fit(const lmsr_expr* e, const lmsr_dataset* d, const lmsr_fit_options* options, double* params,
                     size_t capacity, lmsr_fit_result* result) {
    return guard([&] {
        require(e, "expression");
        require(d, "dataset");
        require(result, "result");
        if (capacity > 0) require(params, "params");
        optimize::FitConfig cfg;
        if (options != nullptr) {
            cfg.hops = options->hops;
            cfg.refits = options->refits;
            cfg.max_evals = options->max_evals;
            cfg.tol = options->tol;
            cfg.seed = options->seed;
        }
        const auto r = cfg.refits > 1 ? optimize::repeat_fit(e->e, d->d, cfg) : optimize::fit(e->e, d->d, cfg);
        result->mse = r.mse;
        result->mae = r.mae;
        result->evals = r.evals;
        result->n_params = r.params.size();
        for (std::size_t i = 0; i < r.params.size() && i < capacity; ++i) params[i] = r.params[i];
    });
}

lmsr_status lmsr_config_new(lmsr_config** out) {
    return guard([&] {
        require(out, "out");
        *out = new lmsr_config{};
    });
}

lmsr_status lmsr_config_parse(const char* ini, lmsr_config** out) {
    return guard([&] {
        require(ini, "ini");
        require(out, "out");
        *out = new lmsr_config{config::parse(ini)};
    });
}

lmsr_status lmsr_config_load(const char* path, lmsr_config** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new lmsr_config{config::load(path)};
    });
}

void lmsr_config_free(lmsr_config* c) { delete c; }

lmsr_status lmsr_config_set(lmsr_config* c, const char* section, const char* key, const char* value) {
    return guard([&] {
        require(c, "config");
        require(section, "section");
        require(key, "key");
        require(value, "value");
        config::set(c->c, section, key, value);
    });
}

lmsr_status lmsr_config_validate(const lmsr_config* c) {
    return guard([&] {
        require(c, "config");
        c->c.validate();
    });
}

lmsr_status lmsr_config_to_ini(const lmsr_config* c, char** out) {
    return guard([&] {
        require(c, "config");
        require(out, "out");
        *out = dup(config::to_ini(c->c));
    });
}

int lmsr_config_runs(const lmsr_config* c) { return c ? c->c.runs : 0; }

int lmsr_config_iterations(const lmsr_config* c) { return c ? c->c.iterations : 0; }

lmsr_status lmsr_run(const lmsr_config* c, int run_number, lmsr_record_fn on_record, void* user, lmsr_runlog** out) {
    return guard([&] {
        require(c, "config");
        require(out, "out");
        c->c.validate();
        const auto d = engine::resolve_dataset(c->c);
        auto backend = engine::make_backend(c->c, run_number);
        engine::RecordSink sink;
        if (on_record != nullptr) sink = [&](const std::string& line) { on_record(line.c_str(), user); };
        *out = new lmsr_runlog{engine::run(c->c, d, *backend, run_number, sink)};
    });
}

lmsr_status lmsr_run_all(const lmsr_config* c, const char* out_dir, lmsr_runlog** logs) {
    return guard([&] {
        require(c, "config");
        require(out_dir, "out_dir");
        require(logs, "logs");
        c->c.validate();
        const auto d = engine::resolve_dataset(c->c);
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        // Backends are built up front so a missing key fails before any run.
        std::vector<std::unique_ptr<llm::Backend>> backends;
        for (int n = 1; n <= c->c.runs; ++n) backends.push_back(engine::make_backend(c->c, n));
        auto results = engine::run_all(
            c->c, d,
            [&](int n) { return std::move(backends[static_cast<std::size_t>(n - 1)]); },
            [&](int n) -> engine::RecordSink {
                auto path = dir / ("run" + std::to_string(n) + ".jsonl");
                auto file = std::make_shared<std::ofstream>(path, std::ios::binary | std::ios::trunc);
                if (!*file) throw Error(Errc::io, "cannot write " + path.string());
                return [file](const std::string& line) {
                    *file << line << '\n';
                    file->flush();
                };
            });
        for (std::size_t i = 0; i < results.size(); ++i) logs[i] = new lmsr_runlog{std::move(results[i])};
    });
}

lmsr_status lmsr_runlog_read(const char* path, lmsr_runlog** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new lmsr_runlog{engine::read_run_log(path)};
    });
}

lmsr_status lmsr_runlog_write(const lmsr_runlog* log, const char* path) {
    return guard([&] {
        require(log, "log");
        require(path, "path");
        engine::write_run_log(log->log, path);
    });
}

void lmsr_runlog_free(lmsr_runlog* log) { delete log; }

int lmsr_runlog_run(const lmsr_runlog* log) { return log ? log->log.run : 0; }

const char* lmsr_runlog_dataset(const lmsr_runlog* log) { return log ? log->log.dataset.c_str() : ""; }

const char* lmsr_runlog_target(const lmsr_runlog* log) {
    return log && log->log.target ? log->log.target->c_str() : nullptr;
}

int lmsr_runlog_iterations(const lmsr_runlog* log) { return log ? static_cast<int>(log->log.iterations.size()) : 0; }

int lmsr_runlog_rediscovery(const lmsr_runlog* log) {
    return log && log->log.rediscovery_iteration ? *log->log.rediscovery_iteration : 0;
}

int lmsr_runlog_completed(const lmsr_runlog* log) { return log && log->log.completed() ? 1 : 0; }

const char* lmsr_runlog_error(const lmsr_runlog* log) {
    return log && log->log.error ? log->log.error->c_str() : nullptr;
}

void lmsr_runlog_usage(const lmsr_runlog* log, long* prompt_tokens, long* completion_tokens) {
    if (prompt_tokens) *prompt_tokens = log ? log->log.usage.prompt_tokens : 0;
    if (completion_tokens) *completion_tokens = log ? log->log.usage.completion_tokens : 0;
}

int lmsr_runlog_cost(const lmsr_runlog* log, double* cost) {
    if (log == nullptr || !log->log.cost_usd) return 0;
    if (cost) *cost = *log->log.cost_usd;
    return 1;
}

size_t lmsr_runlog_store_size(const lmsr_runlog* log) { return log ? log->log.store.size() : 0; }

lmsr_status lmsr_runlog_store_csv(const lmsr_runlog* log, char** out) {
    return guard([&] {
        require(log, "log");
        require(out, "out");
        *out = dup(log->log.store.to_csv());
    });
}

size_t lmsr_runlog_fit_count(const lmsr_runlog* log) {
    if (log == nullptr) return 0;
    std::size_t n = 0;
    for (const auto& rec : log->log.iterations)
        for (const auto& o : rec.outcomes)
            if (o.status == engine::OutcomeStatus::fitted || o.status == engine::OutcomeStatus::fit_failed) ++n;
    return n;
}

lmsr_status lmsr_replay(const lmsr_runlog* log, double rel_tol, int* ok, char** report) {
    return guard([&] {
        require(log, "log");
        require(ok, "ok");
        const auto r = engine::replay(log->log, rel_tol);
        *ok = r.ok() ? 1 : 0;
        if (report != nullptr) {
            std::string s;
            for (const auto& d : r.divergences) s += d + "\n";
            *report = dup(s);
        }
    });
}

lmsr_status lmsr_score(const lmsr_runlog* const* logs, size_t n_logs, const char* target, int n_iterations,
                       lmsr_score_mode mode, int* scores) {
    return guard([&] {
        require(target, "target");
        if (n_logs > 0) require(logs, "logs");
        if (n_iterations > 0) require(scores, "scores");
        std::vector<engine::RunLog> copies;
        std::size_t n_vars = 1;
        for (std::size_t i = 0; i < n_logs; ++i) {
            require(logs[i], "log");
            copies.push_back(logs[i]->log);
            n_vars = std::max(n_vars, logs[i]->log.variables.size());
        }
        const auto t = resolve_target(target, n_vars);
        const auto s = engine::score_runs(copies, t, n_iterations,
                                          mode == LMSR_SCORE_FRONT ? engine::ScoreMode::front
                                                                   : engine::ScoreMode::cumulative);
        for (std::size_t i = 0; i < s.size(); ++i) scores[i] = s[i];
    });
}

lmsr_status lmsr_front_csv(const lmsr_runlog* const* logs, size_t n_logs, char** out) {
    return guard([&] {
        require(out, "out");
        if (n_logs > 0) require(logs, "logs");
        std::vector<pareto::Candidate> all;
        for (std::size_t i = 0; i < n_logs; ++i) {
            require(logs[i], "log");
            const auto& c = logs[i]->log.store.candidates();
            all.insert(all.end(), c.begin(), c.end());
        }
        *out = dup(engine::front_csv(pareto::pareto_front(all)));
    });
}

}  // extern "C"
