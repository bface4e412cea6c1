// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/config.hpp"
#include "lmsr/engine.hpp"
#include "lmsr/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace lmsr::engine {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kVersion = 1;

Json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double read_number(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw Error(Errc::invalid_argument, "run log holds a non-numeric metric: " + j.dump());
}

Json usage_json(const llm::Usage& u) {
    return Json{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

llm::Usage read_usage(const Json& j) {
    llm::Usage u;
    if (j.is_object()) {
        u.prompt_tokens = j.value("prompt_tokens", 0L);
        u.completion_tokens = j.value("completion_tokens", 0L);
    }
    return u;
}

Json params_json(std::span<const double> params) {
    Json a = Json::array();
    for (double p : params) a.push_back(number(p));
    return a;
}

std::vector<double> read_params(const Json& j) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(read_number(v));
    return out;
}

std::optional<OutcomeStatus> status_from(std::string_view s) {
    for (auto st : {OutcomeStatus::fitted, OutcomeStatus::duplicate, OutcomeStatus::parse_error, OutcomeStatus::invalid,
                    OutcomeStatus::fit_failed})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::vector<std::string> x_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
    return out;
}

template <class T>
std::optional<T> opt(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<T>();
}

bool close(double a, double b, double rel) {
    if (a == b) return true;
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

std::string header_record(const RunLog& log) {
    Json j;
    j["type"] = "header";
    j["version"] = kVersion;
    j["run"] = log.run;
    j["dataset"] = log.dataset;
    j["data_file"] = log.data_file ? Json(log.data_file->string()) : Json(nullptr);
    j["variables"] = log.variables;
    j["dependent"] = log.dependent;
    j["target"] = log.target ? Json(*log.target) : Json(nullptr);
    j["backend"] = log.backend;
    j["config"] = log.config;
    return j.dump();
}

std::string iteration_record(const IterationRecord& rec) {
    Json j;
    j["type"] = "iteration";
    j["iteration"] = rec.iteration;
    j["system"] = rec.system;
    j["prompt"] = rec.prompt;
    j["response"] = rec.response;
    j["retry_prompt"] = rec.retry_prompt ? Json(*rec.retry_prompt) : Json(nullptr);
    j["retry_response"] = rec.retry_response ? Json(*rec.retry_response) : Json(nullptr);
    j["extracted"] = rec.extracted;
    Json outs = Json::array();
    for (const auto& o : rec.outcomes) {
        Json x;
        x["text"] = o.text;
        x["status"] = to_string(o.status);
        if (!o.error.empty()) x["error"] = o.error;
        if (o.expr) {
            x["expression"] = expr::render(*o.expr);
            x["equation"] = expr::render(expr::canonicalize(*o.expr));
            x["complexity"] = o.complexity;
        }
        if (o.status == OutcomeStatus::fitted) {
            x["params"] = params_json(o.params);
            x["mse"] = number(o.mse);
            x["mae"] = number(o.mae);
        }
        outs.push_back(std::move(x));
    }
    j["outcomes"] = std::move(outs);
    j["usage"] = usage_json(rec.usage);
    return j.dump();
}

std::string summary_record(const RunLog& log) {
    Json j;
    j["type"] = "summary";
    j["status"] = log.completed() ? "completed" : "failed";
    j["error"] = log.error ? Json(*log.error) : Json(nullptr);
    j["iterations"] = log.iterations.size();
    j["rediscovery_iteration"] = log.rediscovery_iteration ? Json(*log.rediscovery_iteration) : Json(nullptr);
    j["usage"] = usage_json(log.usage);
    j["cost_usd"] = log.cost_usd ? Json(*log.cost_usd) : Json(nullptr);
    Json store = Json::array();
    for (const auto& c : log.store.candidates()) {
        store.push_back(Json{{"expression", expr::render(c.expr)},
                             {"equation", expr::render(c.canonical)},
                             {"complexity", c.complexity},
                             {"mse", number(c.mse)},
                             {"mae", number(c.mae)},
                             {"params", params_json(c.params)},
                             {"iteration", c.iteration_born}});
    }
    j["store"] = std::move(store);
    return j.dump();
}

std::string to_jsonl(const RunLog& log) {
    std::string out = header_record(log) + "\n";
    for (const auto& rec : log.iterations) out += iteration_record(rec) + "\n";
    out += summary_record(log) + "\n";
    return out;
}

RunLog parse_run_log(std::string_view jsonl) {
    RunLog log;
    bool have_header = false;
    bool have_summary = false;
    std::vector<std::string> names;
    std::size_t start = 0;
    int line_no = 0;
    while (start < jsonl.size()) {
        auto end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        const auto line = jsonl.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const auto where = "run log line " + std::to_string(line_no) + ": ";
        try {
            const auto j = Json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "header") {
                if (j.value("version", 0) != kVersion) throw Error(Errc::invalid_argument, "unsupported version");
                log.run = j.at("run").get<int>();
                log.dataset = j.at("dataset").get<std::string>();
                if (auto f = opt<std::string>(j, "data_file")) log.data_file = *f;
                log.variables = j.at("variables").get<std::vector<std::string>>();
                log.dependent = j.value("dependent", std::string("y"));
                log.target = opt<std::string>(j, "target");
                log.backend = j.value("backend", std::string());
                log.config = j.value("config", std::string());
                names = x_names(log.variables.size());
                have_header = true;
            } else if (type == "iteration") {
                if (!have_header) throw Error(Errc::invalid_argument, "iteration before header");
                IterationRecord rec;
                rec.iteration = j.at("iteration").get<int>();
                rec.system = j.value("system", std::string());
                rec.prompt = j.at("prompt").get<std::string>();
                rec.response = j.at("response").get<std::string>();
                rec.retry_prompt = opt<std::string>(j, "retry_prompt");
                rec.retry_response = opt<std::string>(j, "retry_response");
                rec.extracted = j.value("extracted", std::vector<std::string>{});
                for (const auto& x : j.at("outcomes")) {
                    ExpressionOutcome o;
                    o.text = x.at("text").get<std::string>();
                    const auto st = status_from(x.at("status").get<std::string>());
                    if (!st) throw Error(Errc::invalid_argument, "unknown outcome status");
                    o.status = *st;
                    o.error = x.value("error", std::string());
                    if (auto e = opt<std::string>(x, "expression")) {
                        o.expr = expr::parse(*e, expr::Dialect::infix, names);
                        o.complexity = x.value("complexity", expr::complexity(*o.expr));
                    }
                    if (o.status == OutcomeStatus::fitted) {
                        if (!o.expr) throw Error(Errc::invalid_argument, "fitted outcome without expression");
                        o.params = read_params(x.at("params"));
                        o.mse = read_number(x.at("mse"));
                        o.mae = read_number(x.at("mae"));
                        log.store.insert(pareto::Candidate::make(*o.expr, o.params, o.mse, o.mae, rec.iteration));
                    }
                    rec.outcomes.push_back(std::move(o));
                }
                rec.usage = read_usage(j.value("usage", Json::object()));
                log.usage.prompt_tokens += rec.usage.prompt_tokens;
                log.usage.completion_tokens += rec.usage.completion_tokens;
                log.iterations.push_back(std::move(rec));
            } else if (type == "summary") {
                log.error = opt<std::string>(j, "error");
                log.rediscovery_iteration = opt<int>(j, "rediscovery_iteration");
                log.cost_usd = opt<double>(j, "cost_usd");
                have_summary = true;
            } else {
                throw Error(Errc::invalid_argument, "unknown record type '" + type + "'");
            }
        } catch (const Error& e) {
            throw Error(e.code() == Errc::syntax ? Errc::invalid_argument : e.code(), where + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::invalid_argument, where + e.what());
        }
    }
    if (!have_header) throw Error(Errc::invalid_argument, "run log has no header record");
    // A log cut short by a crash has no summary; recover what the iterations say.
    if (!have_summary && !log.error) log.error = "run log has no summary record";
    return log;
}

RunLog read_run_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open run log " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_run_log(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_run_log(const RunLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write run log " + path.string());
    out << to_jsonl(log);
    if (!out) throw Error(Errc::io, "failed writing run log " + path.string());
}

ReplayReport replay(const RunLog& log, double rel_tol) {
    if (log.config.empty()) throw Error(Errc::config, "run log carries no configuration");
    auto cfg = config::parse(log.config);
    const auto d = resolve_dataset(cfg);
    llm::ScriptedBackend backend(log.responses(), "replay");

    ReplayReport report;
    report.replayed = run(cfg, d, backend, log.run);
    const auto& got = report.replayed;
    auto diverge = [&](const std::string& what) { report.divergences.push_back(what); };

    if (got.iterations.size() != log.iterations.size()) {
        diverge("iteration count " + std::to_string(got.iterations.size()) + " vs logged " +
                std::to_string(log.iterations.size()));
    }
    const auto n = std::min(got.iterations.size(), log.iterations.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = log.iterations[i];
        const auto& b = got.iterations[i];
        const auto at = "iteration " + std::to_string(a.iteration) + ": ";
        if (a.prompt != b.prompt) diverge(at + "prompt differs");
        if (a.retry_prompt != b.retry_prompt) diverge(at + "retry prompt differs");
        if (a.extracted != b.extracted) diverge(at + "extracted expressions differ");
        if (a.outcomes.size() != b.outcomes.size()) {
            diverge(at + "outcome count differs");
            continue;
        }
        for (std::size_t k = 0; k < a.outcomes.size(); ++k) {
            const auto& x = a.outcomes[k];
            const auto& y = b.outcomes[k];
            const auto which = at + "expression " + std::to_string(k + 1) + " ('" + x.text + "'): ";
            if (x.status != y.status) {
                diverge(which + "status " + std::string(to_string(y.status)) + " vs logged " +
                        std::string(to_string(x.status)));
                continue;
            }
            if (x.expr.has_value() != y.expr.has_value() ||
                (x.expr && expr::canonicalize(*x.expr) != expr::canonicalize(*y.expr)))
                diverge(which + "expression differs");
            if (x.complexity != y.complexity) diverge(which + "complexity differs");
            if (x.status != OutcomeStatus::fitted) continue;
            if (!close(x.mse, y.mse, rel_tol)) diverge(which + "mse differs");
            if (!close(x.mae, y.mae, rel_tol)) diverge(which + "mae differs");
        }
    }
    if (got.store.size() != log.store.size()) diverge("store size differs");
    if (got.rediscovery_iteration != log.rediscovery_iteration) diverge("rediscovery iteration differs");
    if (got.completed() != log.completed()) diverge("run completion differs");
    return report;
}

}  // namespace lmsr::engine
