// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/engine.hpp"

#include "lmsr/config.hpp"
#include "lmsr/error.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <exception>
#include <thread>

namespace lmsr::engine {

namespace {

bool backend_failure(Errc c) { return c == Errc::transport || c == Errc::api || c == Errc::transcript_exhausted; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_marker(std::string_view line, std::string_view marker) {
    auto decorative = [](char c) { return c == '*' || c == '`' || c == '#' || c == '_' || c == ':' || c == '='; };
    line = trim(line);
    while (!line.empty() && decorative(line.front()) && !line.starts_with(marker)) line.remove_prefix(1);
    while (!line.empty() && decorative(line.back())) line.remove_suffix(1);
    return trim(line) == marker;
}

bool strip_pair(std::string_view& s, std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        return true;
    }
    return false;
}

std::string clean_line(std::string_view s) {
    s = trim(s);
    if (s.starts_with("- ") || s.starts_with("* ") || s.starts_with("+ ")) s = trim(s.substr(2));
    if (s.starts_with("\xE2\x80\xA2")) s = trim(s.substr(3));  // bullet
    // "1." or "1)" numbering
    std::size_t digits = 0;
    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
    if (digits > 0 && digits + 1 < s.size() && (s[digits] == '.' || s[digits] == ')') && s[digits + 1] == ' ')
        s = trim(s.substr(digits + 2));
    while (!s.empty() && (s.back() == ',' || s.back() == ';')) s = trim(s.substr(0, s.size() - 1));
    bool stripped = true;
    while (stripped) {
        stripped = strip_pair(s, "`", "`") || strip_pair(s, "$$", "$$") || strip_pair(s, "$", "$") ||
                   strip_pair(s, "\\(", "\\)") || strip_pair(s, "\\[", "\\]") || strip_pair(s, "\"", "\"");
    }
    return std::string(s);
}

void rethrow_as_config(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        if (e.code() == Errc::config) throw;
        throw Error(Errc::config, e.what());
    }
}

std::string best_reference_mae(const data::Dataset& d) {
    const auto& entry = data::manifest_entry(d.id());
    std::string best;
    double best_value = 0.0;
    for (const auto& r : entry.references) {
        const double v = std::stod(r.mae);
        if (best.empty() || v < best_value) {
            best = r.mae;
            best_value = v;
        }
    }
    if (best.empty()) throw Error(Errc::config, "variant p3 needs challenge_mae; dataset " + d.id() + " has no references");
    return best;
}

class Loop {
public:
    Loop(const RunConfig& cfg, const data::Dataset& d, llm::Backend& backend, int run_number, const RecordSink& sink)
        : cfg_(cfg), d_(d), backend_(backend), sink_(sink) {
        cfg_.validate();
        templates_ = cfg_.template_dir ? prompts::TemplateSet::from_dir(*cfg_.template_dir)
                                       : prompts::TemplateSet::bundled();
        rethrow_as_config([&] {
            pcfg_ = cfg_.prompt;
            pcfg_.operators = d_.operator_set(cfg_.operators);
            pcfg_.feedback_has_params = cfg_.feedback.include_params;
            if (!cfg_.variant.empty()) {
                const auto mae = cfg_.challenge_mae.empty() && cfg_.variant == "p3" ? best_reference_mae(d_)
                                                                                   : cfg_.challenge_mae;
                for (auto& s : prompts::variant_instructions(cfg_.variant, mae, templates_))
                    pcfg_.extra_instructions.push_back(std::move(s));
            }
            view_ = prompts::make_data_view(d_, pcfg_.rounding_decimals, cfg_.subsample);
            system_ = prompts::build_system(templates_);
        });
        run_seed_ = optimize::refit_seed(cfg_.seed, run_number - 1);

        log_.run = run_number;
        log_.dataset = d_.id();
        log_.data_file = cfg_.data_file;
        log_.variables = d_.variables();
        log_.dependent = d_.dependent();
        log_.backend = backend_.id();
        log_.config = config::to_ini(cfg_);
        if (d_.target) log_.target = expr::render(*d_.target);
    }

    RunLog run() {
        emit(header_record(log_));
        for (int it = 1; it <= cfg_.iterations; ++it) {
            IterationRecord rec;
            rec.iteration = it;
            rec.system = system_;
            try {
                rec.prompt = it == 1 ? prompts::build_initial(view_, d_.context, pcfg_, templates_)
                                     : prompts::build_iteration(view_, feedback(), d_.context, pcfg_, templates_);
                rec.response = ask(rec.prompt, rec);
                if (!process(rec.response, rec)) {
                    rec.retry_prompt = rec.prompt + "\n\n" + prompts::build_format_reminder(pcfg_, templates_);
                    rec.retry_response = ask(*rec.retry_prompt, rec);
                    process(*rec.retry_response, rec);
                }
            } catch (const Error& e) {
                if (!backend_failure(e.code())) throw;
                log_.error = std::string(errc_name(e.code())) + ": " + e.what();
                // Keep what this iteration already produced.
                if (!rec.response.empty() || !rec.outcomes.empty()) finish_iteration(std::move(rec));
                break;
            }
            finish_iteration(std::move(rec));
        }
        if (cfg_.prices.count(cfg_.model()) != 0) log_.cost_usd = llm::estimate_cost(log_.usage, cfg_.model(), cfg_.prices);
        emit(summary_record(log_));
        return std::move(log_);
    }

private:
    void emit(const std::string& line) const {
        if (sink_) sink_(line);
    }

    std::string feedback() const {
        const auto sel = pareto::select_feedback(log_.store, cfg_.feedback);
        return pareto::to_feedback_json(sel, cfg_.feedback.include_params);
    }

    std::string ask(const std::string& user, IterationRecord& rec) {
        llm::ChatRequest req;
        req.system = system_;
        req.user = user;
        req.temperature = cfg_.temperature;
        req.model = cfg_.model();
        auto resp = backend_.complete(req);
        rec.usage += resp;
        log_.usage += resp;
        return std::move(resp.text);
    }

    // Returns whether any extracted line parsed.
    bool process(const std::string& response, IterationRecord& rec) {
        const auto lines = extract_expressions(response, static_cast<std::size_t>(pcfg_.n_expressions));
        bool any_parsed = false;
        for (const auto& text : lines) {
            rec.extracted.push_back(text);
            auto out = evaluate(text, rec.iteration);
            if (out.expr) any_parsed = true;
            rec.outcomes.push_back(std::move(out));
        }
        return any_parsed;
    }

    ExpressionOutcome evaluate(const std::string& text, int iteration) {
        ExpressionOutcome out;
        out.text = text;
        try {
            out.expr = expr::parse(text, pcfg_.dialect, d_.variables(), d_.parse_options());
        } catch (const Error& e) {
            out.status = OutcomeStatus::parse_error;
            out.error = e.what();
            return out;
        }
        out.complexity = expr::complexity(*out.expr);
        try {
            expr::validate_operators(*out.expr, pcfg_.operators);
            expr::validate_variables(*out.expr, static_cast<std::uint32_t>(d_.input_count()));
        } catch (const Error& e) {
            out.status = OutcomeStatus::invalid;
            out.error = e.what();
            return out;
        }
        if (auto k = log_.store.find(*out.expr); k != pareto::Store::npos) {
            const auto& c = log_.store.candidates()[k];
            out.status = OutcomeStatus::duplicate;
            out.error = "same as " + expr::render(c.expr);
            return out;
        }
        auto fc = cfg_.fit;
        fc.seed = optimize::refit_seed(run_seed_, ++fits_);
        optimize::FitResult r;
        try {
            r = fc.refits > 1 ? optimize::repeat_fit(*out.expr, d_, fc) : optimize::fit(*out.expr, d_, fc);
        } catch (const Error& e) {
            out.status = e.code() == Errc::too_many_constants ? OutcomeStatus::invalid : OutcomeStatus::fit_failed;
            out.error = e.what();
            return out;
        }
        out.status = OutcomeStatus::fitted;
        out.params = r.params;
        out.mse = r.mse;
        out.mae = r.mae;
        auto cand = pareto::Candidate::make(*out.expr, r.params, r.mse, r.mae, iteration);
        if (d_.target && !log_.rediscovery_iteration && check_rediscovery(cand, *d_.target))
            log_.rediscovery_iteration = iteration;
        log_.store.insert(std::move(cand));
        return out;
    }

    void finish_iteration(IterationRecord rec) {
        emit(iteration_record(rec));
        log_.iterations.push_back(std::move(rec));
    }

    RunConfig cfg_;
    const data::Dataset& d_;
    llm::Backend& backend_;
    const RecordSink& sink_;
    prompts::TemplateSet templates_;
    prompts::PromptConfig pcfg_;
    prompts::DataView view_;
    std::string system_;
    std::uint64_t run_seed_ = 0;
    int fits_ = 0;
    RunLog log_;
};

}  // namespace

std::string_view to_string(OutcomeStatus s) {
    switch (s) {
        case OutcomeStatus::fitted: return "fitted";
        case OutcomeStatus::duplicate: return "duplicate";
        case OutcomeStatus::parse_error: return "parse_error";
        case OutcomeStatus::invalid: return "invalid";
        case OutcomeStatus::fit_failed: return "fit_failed";
    }
    return "unknown";
}

void RunConfig::validate() const {
    if (iterations < 1) throw Error(Errc::config, "iterations must be >= 1");
    if (runs < 1) throw Error(Errc::config, "runs must be >= 1");
    if (workers < 1) throw Error(Errc::config, "workers must be >= 1");
    if (operators != "easy" && operators != "hard")
        throw Error(Errc::config, "operators must be easy or hard, got '" + operators + "'");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw Error(Errc::config, "temperature must be in [0, 2]");
    if (!variant.empty() && variant != "p1" && variant != "p2" && variant != "p3")
        throw Error(Errc::config, "variant must be p1, p2 or p3, got '" + variant + "'");
    if (backend.kind == BackendConfig::Kind::scripted && backend.transcript.empty())
        throw Error(Errc::config, "the scripted backend needs a transcript path");
    if (model().empty()) throw Error(Errc::config, "model name is empty");
    if (subsample && subsample->count == 0) throw Error(Errc::config, "subsample size must be positive");
    rethrow_as_config([&] {
        prompt.validate();
        feedback.validate();
        fit.validate();
    });
}

std::vector<std::string> RunLog::responses() const {
    std::vector<std::string> out;
    for (const auto& rec : iterations) {
        out.push_back(rec.response);
        if (rec.retry_response) out.push_back(*rec.retry_response);
    }
    return out;
}

std::vector<std::string> extract_expressions(std::string_view response, std::size_t limit) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= response.size()) {
        auto end = response.find('\n', start);
        if (end == std::string_view::npos) end = response.size();
        lines.push_back(response.substr(start, end - start));
        start = end + 1;
    }
    std::size_t begin = lines.size();
    for (std::size_t i = lines.size(); i-- > 0;) {
        if (is_marker(lines[i], prompts::kBeginMarker)) {
            begin = i;
            break;
        }
    }
    std::vector<std::string> out;
    if (begin == lines.size()) return out;
    for (std::size_t i = begin + 1; i < lines.size() && out.size() < limit; ++i) {
        if (is_marker(lines[i], prompts::kEndMarker)) break;
        auto line = clean_line(lines[i]);
        if (!line.empty()) out.push_back(std::move(line));
    }
    return out;
}

bool check_rediscovery(const expr::Expression& e, const expr::Expression& target) {
    return expr::sr_equivalent(e, target);
}

bool check_rediscovery(const pareto::Candidate& c, const expr::Expression& target) {
    return expr::canonicalize(target) == c.canonical;
}

data::Dataset resolve_dataset(const RunConfig& cfg) {
    if (cfg.data_file) return data::load_csv(*cfg.data_file, data::CsvOptions{cfg.dataset});
    return data::load_builtin(cfg.dataset);
}

RunLog run(const RunConfig& cfg, const data::Dataset& d, llm::Backend& backend, int run_number,
           const RecordSink& sink) {
    if (run_number < 1) throw Error(Errc::invalid_argument, "run numbers start at 1");
    return Loop(cfg, d, backend, run_number, sink).run();
}

std::unique_ptr<llm::Backend> make_backend(const RunConfig& cfg, int run_number) {
    if (cfg.backend.kind == BackendConfig::Kind::http) return std::make_unique<llm::HttpBackend>(cfg.backend.http);
    std::string path = cfg.backend.transcript;
    const std::string token = "{run}";
    for (auto pos = path.find(token); pos != std::string::npos; pos = path.find(token, pos))
        path.replace(pos, token.size(), std::to_string(run_number));
    return llm::ScriptedBackend::from_file(path);
}

std::vector<RunLog> run_all(const RunConfig& cfg, const data::Dataset& d, const BackendFactory& backends,
                            const std::function<RecordSink(int run_number)>& sink_for) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.runs);
    std::vector<std::optional<RunLog>> logs(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            const int number = static_cast<int>(k) + 1;
            try {
                auto backend = backends(number);
                const RecordSink sink = sink_for ? sink_for(number) : RecordSink{};
                logs[k] = run(cfg, d, *backend, number, sink);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const auto threads = std::min<std::size_t>(cfg.workers, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<RunLog> out;
    for (auto& l : logs) out.push_back(std::move(*l));
    return out;
}

std::optional<int> rediscovery_iteration(const RunLog& log, const expr::Expression& target) {
    const auto key = expr::canonicalize(target);
    for (const auto& rec : log.iterations)
        for (const auto& o : rec.outcomes)
            if (o.status == OutcomeStatus::fitted && o.expr && expr::canonicalize(*o.expr) == key) return rec.iteration;
    return std::nullopt;
}

std::vector<int> score_runs(std::span<const RunLog> logs, const expr::Expression& target, int iterations,
                            ScoreMode mode) {
    std::vector<int> score(static_cast<std::size_t>(std::max(iterations, 0)), 0);
    const auto key = expr::canonicalize(target);
    for (const auto& log : logs) {
        if (mode == ScoreMode::cumulative) {
            if (auto it = rediscovery_iteration(log, target))
                for (int i = *it; i <= iterations; ++i) ++score[static_cast<std::size_t>(i - 1)];
            continue;
        }
        pareto::Store store;
        bool on_front = false;
        std::size_t rec = 0;
        for (int i = 1; i <= iterations; ++i) {
            bool changed = false;
            for (; rec < log.iterations.size() && log.iterations[rec].iteration <= i; ++rec) {
                for (const auto& o : log.iterations[rec].outcomes) {
                    if (o.status != OutcomeStatus::fitted || !o.expr) continue;
                    store.insert(pareto::Candidate::make(*o.expr, o.params, o.mse, o.mae, log.iterations[rec].iteration));
                    changed = true;
                }
            }
            if (changed) {
                const auto front = pareto::pareto_front(store);
                on_front = std::any_of(front.begin(), front.end(),
                                       [&](const pareto::Candidate& c) { return c.canonical == key; });
            }
            if (on_front) ++score[static_cast<std::size_t>(i - 1)];
        }
    }
    return score;
}

std::string score_csv(std::span<const int> score) {
    std::string out = "iteration,count\n";
    for (std::size_t i = 0; i < score.size(); ++i) out += std::to_string(i + 1) + "," + std::to_string(score[i]) + "\n";
    return out;
}

std::string front_csv(std::span<const pareto::Candidate> front) {
    std::vector<const pareto::Candidate*> rows;
    for (const auto& c : front) rows.push_back(&c);
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->complexity < b->complexity; });
    std::string out = "complexity,mse,equation\n";
    char buf[64];
    for (const auto* c : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", c->mse);
        out += std::to_string(c->complexity) + "," + buf + ",\"" + expr::render(c->expr) + "\"\n";
    }
    return out;
}

}  // namespace lmsr::engine
