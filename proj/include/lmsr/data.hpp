// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lmsr/expr.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmsr::data {

/// Observations stored column-wise: one column per input variable plus the
/// dependent column. All columns have the same length and finite entries.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::string id, std::vector<std::string> variables, std::vector<std::vector<double>> input_columns,
            std::vector<double> output, std::string dependent = "y");

    [[nodiscard]] const std::string& id() const { return id_; }
    [[nodiscard]] const std::vector<std::string>& variables() const { return variables_; }
    [[nodiscard]] const std::string& dependent() const { return dependent_; }
    [[nodiscard]] std::size_t row_count() const { return output_.size(); }
    [[nodiscard]] std::size_t input_count() const { return inputs_.size(); }

    [[nodiscard]] std::span<const double> column(std::size_t var) const { return inputs_.at(var); }
    [[nodiscard]] std::span<const double> output() const { return output_; }
    /// Views over every input column, in variable order.
    [[nodiscard]] std::vector<std::span<const double>> input_views() const;
    /// Inputs of one row followed by its output.
    [[nodiscard]] std::vector<double> row(std::size_t r) const;

    /// Same observations restricted to `rows` (used for prompt views only).
    [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const;

    std::optional<std::string> context;
    std::optional<expr::Expression> target;
    std::vector<std::string> easy_extra_ops;

    /// Parse options that accept "x" for x1 on single-variable data.
    [[nodiscard]] expr::ParseOptions parse_options() const;

    /// "easy" or "hard" operator regime with this dataset's additions.
    [[nodiscard]] expr::OperatorSet operator_set(std::string_view regime) const;

private:
    std::string id_;
    std::vector<std::string> variables_;
    std::string dependent_ = "y";
    std::vector<std::vector<double>> inputs_;
    std::vector<double> output_;
};

struct ReferenceRow {
    std::string label;
    std::string mae;
    std::string complexity;
};

struct ManifestEntry {
    std::string id;
    std::string file;
    std::string source;
    std::string provenance;  // "transcribed" or "reconstructed"
    std::size_t rows = 0;
    std::string checksum;    // FNV-1a 64, hex
    std::optional<std::string> target;
    std::vector<std::string> easy_extra_ops;
    std::vector<ReferenceRow> references;
};

/// Entries of the bundled manifest, in bundle order.
const std::vector<ManifestEntry>& manifest();
const ManifestEntry& manifest_entry(std::string_view id);

/// Raw bytes of a bundled file (e.g. "kepler.csv").
std::string_view bundled_file(std::string_view name);

std::string fnv1a64_hex(std::string_view bytes);

/// Throws unknown_dataset for ids not in the bundle.
Dataset load_builtin(std::string_view id);

struct CsvOptions {
    std::optional<std::string> id;  // defaults to the file stem
};

/// Header row names the variables, the last column is the dependent variable.
/// A sidecar "<stem>.context.txt" next to the file becomes the context.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(std::string_view text, std::string id);

/// Plain-text comparison table of the reference results stored for a dataset.
std::string reference_table(const ManifestEntry& entry);

}  // namespace lmsr::data
