// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lmsr/data.hpp"
#include "lmsr/expr.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmsr::prompts {

inline constexpr std::string_view kBeginMarker = "BEGIN_EXPRESSIONS";
inline constexpr std::string_view kEndMarker = "END_EXPRESSIONS";

/// Template files by name ("system.txt", "initial.txt", ...). Syntax:
///   {{name}}               value substitution
///   {{#name}}..{{/name}}   kept when the value is non-empty
///   {{^name}}..{{/name}}   kept when the value is empty
///   {{>file}}              another template of the set
class TemplateSet {
public:
    /// The templates compiled into the library.
    static TemplateSet bundled();
    /// Files in `dir` override bundled templates of the same name.
    static TemplateSet from_dir(const std::filesystem::path& dir);

    [[nodiscard]] const std::string& get(std::string_view name) const;
    [[nodiscard]] std::string render(std::string_view name, const std::map<std::string, std::string>& values) const;

private:
    std::map<std::string, std::string, std::less<>> files_;
};

struct PromptConfig {
    bool use_scratchpad = true;
    bool use_context = true;
    bool include_data = true;
    int n_expressions = 3;
    expr::OperatorSet operators = expr::OperatorSet::easy();
    std::vector<std::string> extra_instructions;
    std::optional<int> rounding_decimals = 3;
    expr::Dialect dialect = expr::Dialect::infix;
    bool feedback_has_params = false;

    void validate() const;
};

struct Subsample {
    std::size_t count = 0;
    std::uint64_t seed = 0;
    /// Rows skipped at the front of the seeded permutation. 0 gives nested
    /// views (a larger count extends a smaller one); offset = previous count
    /// gives a disjoint view.
    std::size_t offset = 0;
};

struct DataView {
    std::vector<std::string> names;  // inputs then the dependent variable
    std::vector<std::vector<std::string>> columns;  // same order as names
    std::vector<std::size_t> indices;  // rows shown, ascending
    std::size_t total_rows = 0;

    [[nodiscard]] bool empty() const { return indices.empty(); }
};

/// Rounding touches only the rendered strings. Throws sample_too_large.
DataView make_data_view(const data::Dataset& d, std::optional<int> rounding,
                        std::optional<Subsample> subsample = std::nullopt);

/// Seeded permutation prefix used for subsampling (unsorted).
std::vector<std::size_t> sample_rows(std::size_t rows, const Subsample& s);

/// Shortest decimal text for `v`, after rounding to `decimals` places if given.
std::string format_number(double v, std::optional<int> decimals);

/// "Use only these operators: +, -, *, /, sqrt."
std::string operator_note(const expr::OperatorSet& ops);

std::string build_system(const TemplateSet& t = TemplateSet::bundled());

/// Throws missing_data when data is requested but the view is empty.
std::string build_initial(const DataView& view, const std::optional<std::string>& context, const PromptConfig& cfg,
                          const TemplateSet& t = TemplateSet::bundled());

/// Throws invalid_feedback unless `feedback_json` is a JSON array.
std::string build_iteration(const DataView& view, std::string_view feedback_json,
                            const std::optional<std::string>& context, const PromptConfig& cfg,
                            const TemplateSet& t = TemplateSet::bundled());

/// Sent when a response held no usable expression.
std::string build_format_reminder(const PromptConfig& cfg, const TemplateSet& t = TemplateSet::bundled());

/// Extra instructions of the prompt variants used on the pipe-friction data:
/// "p1" none, "p2" longer expressions, "p3" longer expressions plus an error
/// target of `target_mae`.
std::vector<std::string> variant_instructions(std::string_view variant, std::string_view target_mae,
                                              const TemplateSet& t = TemplateSet::bundled());

}  // namespace lmsr::prompts
