// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/config.hpp"

#include "lmsr/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace lmsr::config {

namespace {

namespace pt = boost::property_tree;

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {
        for (const auto& [section, body] : tree_) {
            if (!known_sections().count(section)) throw Error(Errc::config, "unknown config section [" + section + "]");
            if (body.empty() && !body.data().empty())
                throw Error(Errc::config, "key '" + section + "' must sit inside a section");
        }
    }

    std::optional<std::string> get(const std::string& section, const std::string& key) {
        used_.insert(section + "." + key);
        auto s = tree_.get_child_optional(section);
        if (!s) return std::nullopt;
        auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return *v;
    }

    void read(const std::string& section, const std::string& key, std::string& out) {
        if (auto v = get(section, key)) out = *v;
    }
    void read(const std::string& section, const std::string& key, bool& out) {
        if (auto v = get(section, key)) out = to_bool(section, key, *v);
    }
    template <class T>
    void read_num(const std::string& section, const std::string& key, T& out) {
        if (auto v = get(section, key)) out = to_num<T>(section, key, *v);
    }

    template <class T>
    T to_num(const std::string& section, const std::string& key, const std::string& text) const {
        T value{};
        const auto* end = text.data() + text.size();
        auto res = std::from_chars(text.data(), end, value);
        if (res.ec != std::errc() || res.ptr != end)
            throw Error(Errc::config, "[" + section + "] " + key + ": '" + text + "' is not a valid number");
        return value;
    }

    static bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
        if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
        if (v == "false" || v == "no" || v == "off" || v == "0") return false;
        throw Error(Errc::config, "[" + section + "] " + key + ": expected true or false, got '" + v + "'");
    }

    /// Throws on keys nobody asked for; [prices] is free-form.
    void check_unused() const {
        for (const auto& [section, body] : tree_) {
            if (section == "prices") continue;
            for (const auto& [key, value] : body)
                if (!used_.count(section + "." + key))
                    throw Error(Errc::config, "unknown config key [" + section + "] " + key);
        }
    }

    const pt::ptree& tree() const { return tree_; }

private:
    static const std::set<std::string>& known_sections() {
        static const std::set<std::string> s{"run", "prompt", "feedback", "fit", "backend", "prices"};
        return s;
    }

    const pt::ptree& tree_;
    std::set<std::string> used_;
};

}  // namespace

engine::RunConfig parse(std::string_view ini) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(ini)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::config, std::string("config: ") + e.what());
    }
    Reader r(tree);
    engine::RunConfig cfg;

    r.read("run", "dataset", cfg.dataset);
    if (auto f = r.get("run", "data_file"); f && !f->empty()) cfg.data_file = *f;
    r.read_num("run", "iterations", cfg.iterations);
    r.read_num("run", "runs", cfg.runs);
    r.read_num("run", "seed", cfg.seed);
    r.read_num("run", "workers", cfg.workers);
    r.read("run", "variant", cfg.variant);
    r.read("run", "challenge_mae", cfg.challenge_mae);

    auto& p = cfg.prompt;
    r.read("prompt", "operators", cfg.operators);
    if (auto d = r.get("prompt", "dialect")) {
        auto parsed = expr::dialect_from_string(*d);
        if (!parsed) throw Error(Errc::config, "[prompt] dialect: unknown dialect '" + *d + "'");
        p.dialect = *parsed;
    }
    r.read("prompt", "scratchpad", p.use_scratchpad);
    r.read("prompt", "context", p.use_context);
    r.read("prompt", "data", p.include_data);
    r.read_num("prompt", "n_expressions", p.n_expressions);
    if (auto v = r.get("prompt", "rounding")) {
        if (*v == "none") p.rounding_decimals.reset();
        else p.rounding_decimals = r.to_num<int>("prompt", "rounding", *v);
    }
    if (auto v = r.get("prompt", "subsample"); v && *v != "none" && *v != "0") {
        prompts::Subsample s;
        s.count = r.to_num<std::size_t>("prompt", "subsample", *v);
        r.read_num("prompt", "subsample_seed", s.seed);
        r.read_num("prompt", "subsample_offset", s.offset);
        cfg.subsample = s;
    } else {
        r.get("prompt", "subsample_seed");
        r.get("prompt", "subsample_offset");
    }
    if (auto v = r.get("prompt", "template_dir"); v && !v->empty()) cfg.template_dir = *v;
    std::size_t extra_count = 0;
    while (auto v = r.get("prompt", "instruction" + std::to_string(extra_count + 1))) {
        p.extra_instructions.push_back(*v);
        ++extra_count;
    }

    auto& fb = cfg.feedback;
    if (auto v = r.get("feedback", "policy")) {
        if (*v == "standard") fb.kind = pareto::FeedbackPolicy::Kind::standard;
        else if (*v == "top_k" || *v == "top5") fb.kind = pareto::FeedbackPolicy::Kind::top_k;
        else throw Error(Errc::config, "[feedback] policy: expected standard, top5 or top_k, got '" + *v + "'");
    }
    r.read_num("feedback", "min_count", fb.min_count);
    r.read_num("feedback", "recent", fb.recent);
    r.read_num("feedback", "k", fb.k);
    r.read("feedback", "include_params", fb.include_params);

    auto& f = cfg.fit;
    r.read_num("fit", "hops", f.hops);
    r.read_num("fit", "step_scale", f.step_scale);
    r.read_num("fit", "max_evals", f.max_evals);
    r.read_num("fit", "tol", f.tol);
    r.read_num("fit", "refits", f.refits);
    r.read_num("fit", "max_constants", f.max_constants);
    r.read_num("fit", "workers", f.workers);
    r.read_num("fit", "reflection", f.simplex.reflection);
    r.read_num("fit", "expansion", f.simplex.expansion);
    r.read_num("fit", "contraction", f.simplex.contraction);
    r.read_num("fit", "shrink", f.simplex.shrink);

    auto& b = cfg.backend;
    if (auto v = r.get("backend", "kind")) {
        if (*v == "http") b.kind = engine::BackendConfig::Kind::http;
        else if (*v == "scripted") b.kind = engine::BackendConfig::Kind::scripted;
        else throw Error(Errc::config, "[backend] kind: expected http or scripted, got '" + *v + "'");
    }
    r.read("backend", "transcript", b.transcript);
    r.read("backend", "model", b.http.model);
    r.read_num("backend", "temperature", cfg.temperature);
    r.read("backend", "endpoint", b.http.endpoint);
    r.read("backend", "key_env", b.http.key_env_var);
    r.read_num("backend", "timeout", b.http.timeout_s);
    r.read_num("backend", "max_retries", b.http.max_retries);
    r.read_num("backend", "backoff", b.http.backoff_base_s);

    if (auto prices = tree.get_child_optional("prices")) {
        for (const auto& [model, value] : *prices) {
            const auto text = value.data();
            const auto comma = text.find(',');
            if (comma == std::string::npos)
                throw Error(Errc::config, "[prices] " + model + ": expected '<prompt>,<completion>' per-token prices");
            llm::Price price;
            price.prompt_per_token = r.to_num<double>("prices", model, text.substr(0, comma));
            price.completion_per_token = r.to_num<double>("prices", model, text.substr(comma + 1));
            cfg.prices[model] = price;
        }
    }

    r.check_unused();
    return cfg;
}

engine::RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::config, "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void set(engine::RunConfig& cfg, std::string_view section, std::string_view key, std::string_view value) {
    if (key.empty() || key.find_first_of("=[]\n") != std::string_view::npos)
        throw Error(Errc::config, "invalid config key '" + std::string(key) + "'");
    if (value.find('\n') != std::string_view::npos) throw Error(Errc::config, "config values are single lines");
    pt::ptree tree;
    std::istringstream in(to_ini(cfg));
    pt::read_ini(in, tree);
    const pt::ptree::path_type sec(std::string(section), '\0');
    if (!tree.get_child_optional(sec)) tree.add_child(sec, pt::ptree());
    tree.get_child(sec).put(pt::ptree::path_type(std::string(key), '\0'), std::string(value));
    std::ostringstream out;
    pt::write_ini(out, tree);
    cfg = parse(out.str());
}

std::string to_ini(const engine::RunConfig& cfg) {
    std::ostringstream o;
    o << "[run]\n";
    o << "dataset = " << cfg.dataset << "\n";
    o << "data_file = " << (cfg.data_file ? cfg.data_file->string() : "") << "\n";
    o << "iterations = " << cfg.iterations << "\n";
    o << "runs = " << cfg.runs << "\n";
    o << "seed = " << cfg.seed << "\n";
    o << "workers = " << cfg.workers << "\n";
    o << "variant = " << cfg.variant << "\n";
    o << "challenge_mae = " << cfg.challenge_mae << "\n";

    const auto& p = cfg.prompt;
    o << "\n[prompt]\n";
    o << "operators = " << cfg.operators << "\n";
    o << "dialect = " << expr::to_string(p.dialect) << "\n";
    o << "scratchpad = " << fmt(p.use_scratchpad) << "\n";
    o << "context = " << fmt(p.use_context) << "\n";
    o << "data = " << fmt(p.include_data) << "\n";
    o << "n_expressions = " << p.n_expressions << "\n";
    o << "rounding = " << (p.rounding_decimals ? std::to_string(*p.rounding_decimals) : "none") << "\n";
    if (cfg.subsample) {
        o << "subsample = " << cfg.subsample->count << "\n";
        o << "subsample_seed = " << cfg.subsample->seed << "\n";
        o << "subsample_offset = " << cfg.subsample->offset << "\n";
    } else {
        o << "subsample = none\n";
    }
    o << "template_dir = " << (cfg.template_dir ? cfg.template_dir->string() : "") << "\n";
    for (std::size_t i = 0; i < p.extra_instructions.size(); ++i)
        o << "instruction" << i + 1 << " = " << p.extra_instructions[i] << "\n";

    const auto& fb = cfg.feedback;
    o << "\n[feedback]\n";
    o << "policy = " << (fb.kind == pareto::FeedbackPolicy::Kind::standard ? "standard" : "top_k") << "\n";
    o << "min_count = " << fb.min_count << "\n";
    o << "recent = " << fb.recent << "\n";
    o << "k = " << fb.k << "\n";
    o << "include_params = " << fmt(fb.include_params) << "\n";

    const auto& f = cfg.fit;
    o << "\n[fit]\n";
    o << "hops = " << f.hops << "\n";
    o << "step_scale = " << fmt(f.step_scale) << "\n";
    o << "max_evals = " << f.max_evals << "\n";
    o << "tol = " << fmt(f.tol) << "\n";
    o << "refits = " << f.refits << "\n";
    o << "max_constants = " << f.max_constants << "\n";
    o << "workers = " << f.workers << "\n";
    o << "reflection = " << fmt(f.simplex.reflection) << "\n";
    o << "expansion = " << fmt(f.simplex.expansion) << "\n";
    o << "contraction = " << fmt(f.simplex.contraction) << "\n";
    o << "shrink = " << fmt(f.simplex.shrink) << "\n";

    const auto& b = cfg.backend;
    o << "\n[backend]\n";
    o << "kind = " << (b.kind == engine::BackendConfig::Kind::http ? "http" : "scripted") << "\n";
    o << "transcript = " << b.transcript << "\n";
    o << "model = " << b.http.model << "\n";
    o << "temperature = " << fmt(cfg.temperature) << "\n";
    o << "endpoint = " << b.http.endpoint << "\n";
    o << "key_env = " << b.http.key_env_var << "\n";
    o << "timeout = " << fmt(b.http.timeout_s) << "\n";
    o << "max_retries = " << b.http.max_retries << "\n";
    o << "backoff = " << fmt(b.http.backoff_base_s) << "\n";

    o << "\n[prices]\n";
    for (const auto& [model, price] : cfg.prices)
        o << model << " = " << fmt(price.prompt_per_token) << "," << fmt(price.completion_per_token) << "\n";
    return o.str();
}

}  // namespace lmsr::config
