// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/prompts.hpp"

#include "lmsr/detail/embedded.hpp"
#include "lmsr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace lmsr::prompts {

namespace {

std::string strip_final_newline(std::string_view s) {
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return std::string(s);
}

class Renderer {
public:
    Renderer(const TemplateSet& set, const std::map<std::string, std::string>& values) : set_(set), values_(values) {}

    std::string run(std::string_view text, int depth = 0) const {
        if (depth > 8) throw Error(Errc::config, "template includes nest too deeply");
        std::string out;
        std::size_t pos = 0;
        while (true) {
            const auto open = text.find("{{", pos);
            if (open == std::string_view::npos) {
                out.append(text.substr(pos));
                return out;
            }
            out.append(text.substr(pos, open - pos));
            const auto close = text.find("}}", open);
            if (close == std::string_view::npos) throw Error(Errc::config, "unterminated '{{' in template");
            const auto tag = text.substr(open + 2, close - open - 2);
            pos = close + 2;
            if (tag.empty()) throw Error(Errc::config, "empty template tag");
            const char sigil = tag.front();
            if (sigil == '>') {
                out += run(set_.get(tag.substr(1)), depth + 1);
            } else if (sigil == '#' || sigil == '^') {
                const auto name = tag.substr(1);
                const std::string end_tag = "{{/" + std::string(name) + "}}";
                const auto end = find_section_end(text, pos, name);
                if (end == std::string_view::npos) throw Error(Errc::config, "missing " + end_tag + " in template");
                const bool on = !value(name).empty();
                if (on == (sigil == '#')) out += run(text.substr(pos, end - pos), depth);
                pos = end + end_tag.size();
            } else if (sigil == '/') {
                throw Error(Errc::config, "stray {{" + std::string(tag) + "}} in template");
            } else {
                out += value(tag);
            }
        }
    }

private:
    const std::string& value(std::string_view name) const {
        auto it = values_.find(std::string(name));
        if (it == values_.end()) throw Error(Errc::config, "template uses unknown placeholder '" + std::string(name) + "'");
        return it->second;
    }

    // Matching close tag, allowing nested sections of the same name.
    static std::size_t find_section_end(std::string_view text, std::size_t from, std::string_view name) {
        const std::string open_a = "{{#" + std::string(name) + "}}";
        const std::string open_b = "{{^" + std::string(name) + "}}";
        const std::string close = "{{/" + std::string(name) + "}}";
        int level = 1;
        std::size_t pos = from;
        while (true) {
            const auto c = text.find(close, pos);
            if (c == std::string_view::npos) return c;
            auto next_open = std::min(text.find(open_a, pos), text.find(open_b, pos));
            if (next_open < c) {
                ++level;
                pos = next_open + open_a.size();
                continue;
            }
            if (--level == 0) return c;
            pos = c + close.size();
        }
    }

    const TemplateSet& set_;
    const std::map<std::string, std::string>& values_;
};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string data_block(const DataView& v) {
    std::string out;
    // Dependent variable first, then the inputs.
    const std::size_t n = v.names.size();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t c = (k == 0) ? n - 1 : k - 1;
        if (k) out += '\n';
        out += v.names[c] + ": [" + join(v.columns[c], ", ") + "]";
    }
    return out;
}

std::map<std::string, std::string> common_values(const DataView& view, const std::optional<std::string>& context,
                                                 const PromptConfig& cfg) {
    cfg.validate();
    if (cfg.include_data && view.empty()) throw Error(Errc::missing_data, "prompt requests data but the view is empty");
    if (view.names.size() < 2) throw Error(Errc::missing_data, "data view has no variable names");
    std::vector<std::string> inputs(view.names.begin(), view.names.end() - 1);

    std::map<std::string, std::string> v;
    v["context"] = cfg.use_context && context ? *context : "";
    v["data"] = cfg.include_data ? data_block(view) : "";
    v["row_note"] = view.indices.size() == view.total_rows
                        ? std::to_string(view.total_rows) + " rows"
                        : std::to_string(view.indices.size()) + " of " + std::to_string(view.total_rows) + " rows";
    v["scratchpad"] = cfg.use_scratchpad ? "1" : "";
    v["n_expressions"] = std::to_string(cfg.n_expressions);
    v["variables"] = join(inputs, ", ");
    v["dependent"] = view.names.back();
    v["operators"] = operator_note(cfg.operators);
    v["dialect_note"] = cfg.dialect == expr::Dialect::latex_lite
                            ? "Write each expression in LaTeX math notation."
                            : "Write each expression as a plain Python-style math string.";
    std::string extra;
    for (const auto& e : cfg.extra_instructions) extra += "- " + e + "\n";
    v["extra_rules"] = extra;
    v["begin_marker"] = std::string(kBeginMarker);
    v["end_marker"] = std::string(kEndMarker);
    return v;
}

// Unbiased integer in [0, bound) from raw engine output.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % bound;
}

}  // namespace

TemplateSet TemplateSet::bundled() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& f : detail::bundled_prompt_files()) s.files_[std::string(f.name)] = strip_final_newline(f.data);
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::from_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error(Errc::io, "prompt directory " + dir.string() + " not found");
    TemplateSet s = bundled();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        s.files_[entry.path().filename().string()] = strip_final_newline(ss.str());
    }
    return s;
}

const std::string& TemplateSet::get(std::string_view name) const {
    auto it = files_.find(name);
    if (it == files_.end()) throw Error(Errc::config, "no prompt template named '" + std::string(name) + "'");
    return it->second;
}

std::string TemplateSet::render(std::string_view name, const std::map<std::string, std::string>& values) const {
    return Renderer(*this, values).run(get(name));
}

void PromptConfig::validate() const {
    if (n_expressions < 1) throw Error(Errc::invalid_argument, "n_expressions must be >= 1");
    if (rounding_decimals && (*rounding_decimals < 0 || *rounding_decimals > 15))
        throw Error(Errc::invalid_argument, "rounding must be between 0 and 15 decimals");
    if (operators.binary.empty()) throw Error(Errc::invalid_argument, "operator set has no binary operators");
}

std::string format_number(double v, std::optional<int> decimals) {
    char buf[64];
    if (!decimals) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }
    std::snprintf(buf, sizeof buf, "%.*f", *decimals, v);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

std::vector<std::size_t> sample_rows(std::size_t rows, const Subsample& s) {
    if (s.count == 0) throw Error(Errc::invalid_argument, "subsample size must be positive");
    if (s.offset + s.count > rows) {
        throw Error(Errc::sample_too_large, "requested rows " + std::to_string(s.offset + 1) + ".." +
                                                std::to_string(s.offset + s.count) + " of a " +
                                                std::to_string(rows) + "-row permutation");
    }
    std::vector<std::size_t> perm(rows);
    for (std::size_t i = 0; i < rows; ++i) perm[i] = i;
    std::mt19937_64 rng(s.seed);
    // Forward Fisher-Yates so each prefix is a uniform sample of its size.
    const std::size_t needed = s.offset + s.count;
    for (std::size_t i = 0; i < needed && i + 1 < rows; ++i) {
        const auto j = i + static_cast<std::size_t>(bounded(rng, rows - i));
        std::swap(perm[i], perm[j]);
    }
    return {perm.begin() + static_cast<std::ptrdiff_t>(s.offset), perm.begin() + static_cast<std::ptrdiff_t>(needed)};
}

DataView make_data_view(const data::Dataset& d, std::optional<int> rounding, std::optional<Subsample> subsample) {
    DataView v;
    v.names = d.variables();
    v.names.push_back(d.dependent());
    v.total_rows = d.row_count();
    if (subsample) {
        v.indices = sample_rows(d.row_count(), *subsample);
        std::sort(v.indices.begin(), v.indices.end());
    } else {
        v.indices.resize(d.row_count());
        for (std::size_t i = 0; i < v.indices.size(); ++i) v.indices[i] = i;
    }
    v.columns.resize(v.names.size());
    for (std::size_t c = 0; c < v.names.size(); ++c) {
        const auto col = c + 1 < v.names.size() ? d.column(c) : d.output();
        for (auto r : v.indices) v.columns[c].push_back(format_number(col[r], rounding));
    }
    return v;
}

std::string operator_note(const expr::OperatorSet& ops) {
    return "Use only these operators: " + join(ops.tokens(), ", ") + ".";
}

std::string build_system(const TemplateSet& t) { return t.render("system.txt", {}); }

std::string build_initial(const DataView& view, const std::optional<std::string>& context, const PromptConfig& cfg,
                          const TemplateSet& t) {
    return t.render("initial.txt", common_values(view, context, cfg));
}

std::string build_iteration(const DataView& view, std::string_view feedback_json,
                            const std::optional<std::string>& context, const PromptConfig& cfg,
                            const TemplateSet& t) {
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(feedback_json);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_feedback, std::string("feedback is not valid JSON: ") + e.what());
    }
    if (!parsed.is_array()) throw Error(Errc::invalid_feedback, "feedback JSON must be an array");
    auto values = common_values(view, context, cfg);
    values["feedback"] = std::string(feedback_json);
    values["feedback_fields"] =
        cfg.feedback_has_params ? "complexity, mean squared error and fitted constants" : "complexity and mean squared error";
    return t.render("iteration.txt", values);
}

std::string build_format_reminder(const PromptConfig& cfg, const TemplateSet& t) {
    return t.render("reminder.txt", {{"n_expressions", std::to_string(cfg.n_expressions)},
                                     {"begin_marker", std::string(kBeginMarker)},
                                     {"end_marker", std::string(kEndMarker)}});
}

std::vector<std::string> variant_instructions(std::string_view variant, std::string_view target_mae,
                                              const TemplateSet& t) {
    if (variant == "p1") return {};
    if (variant == "p2") return {t.render("variant_longer.txt", {})};
    if (variant == "p3") {
        return {t.render("variant_longer.txt", {}),
                t.render("variant_challenge.txt", {{"target_mae", std::string(target_mae)}})};
    }
    throw Error(Errc::invalid_argument, "prompt variant must be p1, p2 or p3, got '" + std::string(variant) + "'");
}

}  // namespace lmsr::prompts
