// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>

namespace lmsr::detail {

struct EmbeddedFile {
    std::string_view name;
    std::string_view data;
};

std::span<const EmbeddedFile> bundled_data_files();
std::span<const EmbeddedFile> bundled_prompt_files();

}  // namespace lmsr::detail
