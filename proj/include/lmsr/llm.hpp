// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmsr::llm {

struct ChatRequest {
    std::string system;
    std::string user;
    double temperature = 0.7;
    std::string model;
    std::optional<int> max_tokens;

    /// Throws invalid_argument on empty messages or temperature outside [0, 2].
    void validate() const;
};

struct ChatResponse {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    std::string backend_id;
};

/// One stateless completion per call; no history is carried between calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
    [[nodiscard]] virtual std::string id() const = 0;
};

struct HttpConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string key_env_var = "OPENAI_API_KEY";
    double timeout_s = 120.0;
    int max_retries = 3;
    double backoff_base_s = 1.0;  // delay before retry k is base * 2^k
};

/// Chat-completions client. Transport failures, 429 and 5xx responses are
/// retried; other non-2xx statuses raise api with the response body.
class HttpBackend final : public Backend {
public:
    /// Reads the key from the environment; throws config when it is unset.
    explicit HttpBackend(HttpConfig cfg);
    ChatResponse complete(const ChatRequest& req) override;
    [[nodiscard]] std::string id() const override;
    [[nodiscard]] const HttpConfig& config() const { return cfg_; }

private:
    HttpConfig cfg_;
    std::string key_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
};

/// Request body: model, temperature, optional max_tokens and exactly one
/// system and one user message.
std::string chat_request_body(const ChatRequest& req);
ChatResponse parse_chat_response(std::string_view body, std::string backend_id);

inline constexpr std::string_view kTranscriptDelimiter = "=== END RESPONSE ===";

/// Splits a transcript into responses. Each response ends at a line that is
/// exactly the delimiter; text after the last delimiter counts only if it is
/// not blank.
std::vector<std::string> parse_transcript(std::string_view text);
std::string format_transcript(std::span<const std::string> responses);

/// Replays canned responses in order; throws transcript_exhausted past the end.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses, std::string name = "scripted");
    static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    ChatResponse complete(const ChatRequest& req) override;
    [[nodiscard]] std::string id() const override { return "scripted:" + name_; }
    [[nodiscard]] std::size_t cursor() const { return cursor_; }
    [[nodiscard]] std::size_t size() const { return responses_.size(); }

private:
    std::vector<std::string> responses_;
    std::string name_;
    std::size_t cursor_ = 0;
};

/// ceil(characters / 4), the usual rough estimate when a server reports no usage.
long estimate_tokens(std::string_view text);

struct Usage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
    Usage& operator+=(const ChatResponse& r) {
        prompt_tokens += r.prompt_tokens;
        completion_tokens += r.completion_tokens;
        return *this;
    }
};

struct Price {
    double prompt_per_token = 0.0;
    double completion_per_token = 0.0;
};
using PriceTable = std::map<std::string, Price, std::less<>>;

/// List prices in USD per token for the two models used in the experiments.
PriceTable default_prices();

/// Throws unknown_model when `model` has no entry.
double estimate_cost(const Usage& usage, std::string_view model, const PriceTable& prices);

}  // namespace lmsr::llm
