// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lmsr {

enum class Errc {
    invalid_argument,
    syntax,
    unknown_operator,
    implicit_form,
    arity_mismatch,
    operator_not_allowed,
    too_many_constants,
    missing_variable,
    no_finite_objective,
    unknown_dataset,
    malformed_csv,
    non_numeric_cell,
    io,
    config,
    transport,
    api,
    transcript_exhausted,
    unknown_model,
    missing_data,
    invalid_feedback,
    sample_too_large,
    internal,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// C API can map it onto a status value without string matching.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace lmsr
