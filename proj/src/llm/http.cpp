// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/llm.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace lmsr::llm {

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.max_retries < 0) throw Error(Errc::config, "max_retries must be >= 0");
    if (!(cfg_.timeout_s > 0.0)) throw Error(Errc::config, "timeout must be > 0");
    if (cfg_.model.empty()) throw Error(Errc::config, "http backend needs a model name");
    const char* key = std::getenv(cfg_.key_env_var.c_str());
    if (key == nullptr || *key == '\0')
        throw Error(Errc::config, "environment variable " + cfg_.key_env_var + " is not set");
    key_ = key;

    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::config, "endpoint must start with http:// or https://");
    const auto scheme = cfg_.endpoint.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw Error(Errc::config, "unsupported endpoint scheme '" + scheme + "'");
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    base_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
}

std::string HttpBackend::id() const { return "http:" + cfg_.model; }

ChatResponse HttpBackend::complete(const ChatRequest& in) {
    ChatRequest req = in;
    if (req.model.empty()) req.model = cfg_.model;
    req.validate();
    const std::string body = chat_request_body(req);
    const httplib::Headers headers{{"Authorization", "Bearer " + key_}};

    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(cfg_.timeout_s));
    std::string last_failure;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.backoff_base_s * std::ldexp(1.0, attempt - 1)));
        }
        httplib::Client client(base_);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) return parse_chat_response(res->body, id());
        if (!retryable(res->status)) {
            throw Error(Errc::api, "HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        last_failure = "HTTP " + std::to_string(res->status) + ": " + res->body;
    }
    const bool transport = last_failure.rfind("transport", 0) == 0;
    throw Error(transport ? Errc::transport : Errc::api,
                last_failure + " (after " + std::to_string(cfg_.max_retries + 1) + " attempts)");
}

}  // namespace lmsr::llm
