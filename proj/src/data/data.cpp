// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/data.hpp"

#include "lmsr/detail/embedded.hpp"
#include "lmsr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lmsr::data {

namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_cell(std::string_view cell, std::size_t line_no) {
    std::string s(cell);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw Error(Errc::non_numeric_cell,
                    "line " + std::to_string(line_no) + ": '" + s + "' is not a finite number");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Dataset::Dataset(std::string id, std::vector<std::string> variables, std::vector<std::vector<double>> input_columns,
                 std::vector<double> output, std::string dependent)
    : id_(std::move(id)),
      variables_(std::move(variables)),
      dependent_(std::move(dependent)),
      inputs_(std::move(input_columns)),
      output_(std::move(output)) {
    if (variables_.size() != inputs_.size())
        throw Error(Errc::invalid_argument, "variable names and input columns differ in count");
    if (inputs_.empty()) throw Error(Errc::invalid_argument, "dataset needs at least one input variable");
    if (output_.empty()) throw Error(Errc::invalid_argument, "dataset has no rows");
    for (const auto& col : inputs_) {
        if (col.size() != output_.size()) throw Error(Errc::invalid_argument, "ragged dataset columns");
        if (!std::all_of(col.begin(), col.end(), [](double v) { return std::isfinite(v); }))
            throw Error(Errc::invalid_argument, "dataset contains a non-finite value");
    }
    if (!std::all_of(output_.begin(), output_.end(), [](double v) { return std::isfinite(v); }))
        throw Error(Errc::invalid_argument, "dataset contains a non-finite value");
}

std::vector<std::span<const double>> Dataset::input_views() const {
    return {inputs_.begin(), inputs_.end()};
}

std::vector<double> Dataset::row(std::size_t r) const {
    std::vector<double> out;
    out.reserve(inputs_.size() + 1);
    for (const auto& col : inputs_) out.push_back(col.at(r));
    out.push_back(output_.at(r));
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<std::vector<double>> cols(inputs_.size());
    std::vector<double> y;
    for (auto r : rows) {
        for (std::size_t v = 0; v < inputs_.size(); ++v) cols[v].push_back(inputs_.at(v).at(r));
        y.push_back(output_.at(r));
    }
    Dataset d(id_, variables_, std::move(cols), std::move(y), dependent_);
    d.context = context;
    d.target = target;
    d.easy_extra_ops = easy_extra_ops;
    return d;
}

expr::ParseOptions Dataset::parse_options() const {
    expr::ParseOptions opts;
    opts.dependent = dependent_;
    if (inputs_.size() == 1) opts.aliases.emplace_back("x", 1);
    return opts;
}

expr::OperatorSet Dataset::operator_set(std::string_view regime) const {
    if (regime == "easy") return expr::OperatorSet::easy(easy_extra_ops);
    if (regime == "hard") return expr::OperatorSet::hard(easy_extra_ops);
    throw Error(Errc::invalid_argument, "operator regime must be 'easy' or 'hard', got '" + std::string(regime) + "'");
}

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string_view bundled_file(std::string_view name) {
    for (const auto& f : detail::bundled_data_files())
        if (f.name == name) return f.data;
    throw Error(Errc::io, "no bundled file named '" + std::string(name) + "'");
}

const std::vector<ManifestEntry>& manifest() {
    static const std::vector<ManifestEntry> entries = [] {
        std::vector<ManifestEntry> out;
        const auto doc = nlohmann::json::parse(bundled_file("manifest.json"));
        for (const auto& d : doc.at("datasets")) {
            ManifestEntry e;
            e.id = d.at("id").get<std::string>();
            e.file = d.at("file").get<std::string>();
            e.source = d.value("source", "");
            e.provenance = d.value("provenance", "");
            e.rows = d.at("rows").get<std::size_t>();
            e.checksum = d.at("checksum_fnv1a64").get<std::string>();
            if (d.contains("target") && !d["target"].is_null()) e.target = d["target"].get<std::string>();
            e.easy_extra_ops = d.value("easy_extra_ops", std::vector<std::string>{});
            if (d.contains("references")) {
                for (const auto& r : d["references"].at("rows"))
                    e.references.push_back({r.at("label"), r.at("mae"), r.at("complexity")});
            }
            out.push_back(std::move(e));
        }
        return out;
    }();
    return entries;
}

const ManifestEntry& manifest_entry(std::string_view id) {
    for (const auto& e : manifest())
        if (e.id == id) return e;
    std::string known;
    for (const auto& e : manifest()) known += (known.empty() ? "" : ", ") + e.id;
    throw Error(Errc::unknown_dataset, "unknown dataset '" + std::string(id) + "' (known: " + known + ")");
}

Dataset parse_csv(std::string_view text, std::string id) {
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split(line, ',');
        if (names.empty()) {
            if (cells.size() < 2) throw Error(Errc::malformed_csv, "header needs at least one input and one output");
            for (auto c : cells) {
                if (c.empty()) throw Error(Errc::malformed_csv, "empty column name in header");
                names.emplace_back(c);
            }
            cols.resize(names.size());
            continue;
        }
        if (cells.size() != names.size()) {
            throw Error(Errc::malformed_csv, "line " + std::to_string(line_no) + ": expected " +
                                                 std::to_string(names.size()) + " cells, got " +
                                                 std::to_string(cells.size()));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) cols[i].push_back(parse_cell(cells[i], line_no));
    }
    if (names.empty()) throw Error(Errc::malformed_csv, "missing header row");
    if (cols.front().empty()) throw Error(Errc::malformed_csv, "no data rows");
    std::string dependent = names.back();
    names.pop_back();
    std::vector<double> y = std::move(cols.back());
    cols.pop_back();
    return Dataset(std::move(id), std::move(names), std::move(cols), std::move(y), std::move(dependent));
}

Dataset load_builtin(std::string_view id) {
    const auto& entry = manifest_entry(id);
    const auto bytes = bundled_file(entry.file);
    if (fnv1a64_hex(bytes) != entry.checksum) {
        throw Error(Errc::internal, "bundled dataset '" + entry.id + "' fails its checksum");
    }
    Dataset d = parse_csv(bytes, entry.id);
    if (d.row_count() != entry.rows) throw Error(Errc::internal, "bundled dataset '" + entry.id + "' has wrong row count");
    const std::string stem = entry.file.substr(0, entry.file.rfind('.'));
    for (const auto& f : lmsr::detail::bundled_data_files()) {
        if (f.name == stem + ".context.txt") d.context = std::string(trim(f.data));
    }
    d.easy_extra_ops = entry.easy_extra_ops;
    if (entry.target) d.target = expr::parse(*entry.target, expr::Dialect::infix, d.variables(), d.parse_options());
    return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    Dataset d = parse_csv(read_file(path), options.id.value_or(path.stem().string()));
    auto sidecar = path;
    sidecar.replace_extension(".context.txt");
    if (std::filesystem::exists(sidecar)) d.context = std::string(trim(read_file(sidecar)));
    return d;
}

std::string reference_table(const ManifestEntry& entry) {
    std::size_t w = 5;
    for (const auto& r : entry.references) w = std::max(w, r.label.size());
    std::string out;
    auto line = [&](std::string_view a, std::string_view b, std::string_view c) {
        std::string s(a);
        s.resize(w + 2, ' ');
        std::string m(b);
        m.resize(12, ' ');
        out += s + m + std::string(c) + "\n";
    };
    line("label", "mae", "complexity");
    for (const auto& r : entry.references) line(r.label, r.mae, r.complexity.empty() ? "-" : r.complexity);
    return out;
}

}  // namespace lmsr::data
