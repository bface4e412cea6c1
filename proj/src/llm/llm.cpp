// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/llm.hpp"

#include "lmsr/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace lmsr::llm {

void ChatRequest::validate() const {
    if (system.empty()) throw Error(Errc::invalid_argument, "chat request has an empty system message");
    if (user.empty()) throw Error(Errc::invalid_argument, "chat request has an empty user message");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw Error(Errc::invalid_argument, "temperature must be in [0, 2]");
    if (max_tokens && *max_tokens < 1) throw Error(Errc::invalid_argument, "max_tokens must be positive");
}

std::string chat_request_body(const ChatRequest& req) {
    nlohmann::ordered_json body;
    body["model"] = req.model;
    body["temperature"] = req.temperature;
    if (req.max_tokens) body["max_tokens"] = *req.max_tokens;
    body["messages"] = nlohmann::ordered_json::array({
        {{"role", "system"}, {"content", req.system}},
        {{"role", "user"}, {"content", req.user}},
    });
    return body.dump();
}

ChatResponse parse_chat_response(std::string_view body, std::string backend_id) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::api, std::string("response is not JSON: ") + e.what());
    }
    ChatResponse out;
    out.backend_id = std::move(backend_id);
    try {
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        out.text = content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw Error(Errc::api, "response has no choices[0].message.content: " + std::string(body.substr(0, 500)));
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
        out.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
        out.completion_tokens = doc["usage"].value("completion_tokens", 0L);
    } else {
        out.completion_tokens = estimate_tokens(out.text);
    }
    return out;
}

std::vector<std::string> parse_transcript(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        const bool last = end == std::string_view::npos;
        if (last) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line == kTranscriptDelimiter) {
            if (!current.empty() && current.back() == '\n') current.pop_back();
            out.push_back(std::move(current));
            current.clear();
        } else {
            current.append(line);
            if (!last) current += '\n';
        }
        start = end + 1;
    }
    if (current.find_first_not_of(" \t\r\n") != std::string::npos) {
        if (current.back() == '\n') current.pop_back();
        out.push_back(std::move(current));
    }
    return out;
}

std::string format_transcript(std::span<const std::string> responses) {
    std::string out;
    for (const auto& r : responses) {
        out += r;
        out += '\n';
        out += kTranscriptDelimiter;
        out += '\n';
    }
    return out;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses, std::string name)
    : responses_(std::move(responses)), name_(std::move(name)) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open transcript " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::make_unique<ScriptedBackend>(parse_transcript(ss.str()), path.filename().string());
}

ChatResponse ScriptedBackend::complete(const ChatRequest& req) {
    req.validate();
    if (cursor_ >= responses_.size()) {
        throw Error(Errc::transcript_exhausted, "transcript '" + name_ + "' has only " +
                                                    std::to_string(responses_.size()) + " responses");
    }
    ChatResponse out;
    out.text = responses_[cursor_++];
    out.prompt_tokens = estimate_tokens(req.system) + estimate_tokens(req.user);
    out.completion_tokens = estimate_tokens(out.text);
    out.backend_id = id();
    return out;
}

long estimate_tokens(std::string_view text) { return static_cast<long>((text.size() + 3) / 4); }

PriceTable default_prices() {
    return {
        {"gpt-4", {30e-6, 60e-6}},
        {"gpt-4o", {5e-6, 15e-6}},
    };
}

double estimate_cost(const Usage& usage, std::string_view model, const PriceTable& prices) {
    auto it = prices.find(model);
    if (it == prices.end()) throw Error(Errc::unknown_model, "no price entry for model '" + std::string(model) + "'");
    return static_cast<double>(usage.prompt_tokens) * it->second.prompt_per_token +
           static_cast<double>(usage.completion_tokens) * it->second.completion_per_token;
}

}  // namespace lmsr::llm
