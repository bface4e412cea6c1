// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lmsr/engine.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace lmsr::config {

/// INI text with sections [run], [prompt], [feedback], [fit], [backend] and
/// [prices]; see docs/config.md. Missing keys keep their defaults, unknown
/// keys throw config.
engine::RunConfig parse(std::string_view ini);
engine::RunConfig load(const std::filesystem::path& path);

/// Sets one key as if it appeared in the file; throws config on unknown keys
/// or bad values.
void set(engine::RunConfig& cfg, std::string_view section, std::string_view key, std::string_view value);

/// Every field, in a form parse() reads back to an equal config.
std::string to_ini(const engine::RunConfig& cfg);

}  // namespace lmsr::config
