// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/llm.hpp"

#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace lmsr;
using namespace lmsr::llm;

namespace {

ChatRequest request() {
    ChatRequest r;
    r.system = "sys";
    r.user = "user prompt";
    r.model = "test-model";
    return r;
}

// Local chat-completions stub; `handler` decides each reply.
class StubServer {
public:
    explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/v1/chat/completions", handler);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    [[nodiscard]] std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string canned(const std::string& text) {
    nlohmann::json j;
    j["choices"] = {{{"message", {{"role", "assistant"}, {"content", text}}}}};
    j["usage"] = {{"prompt_tokens", 11}, {"completion_tokens", 7}};
    return j.dump();
}

HttpConfig stub_config(const StubServer& s) {
    ::setenv("LMSR_TEST_KEY", "sk-test-secret", 1);
    HttpConfig c;
    c.endpoint = s.endpoint();
    c.model = "test-model";
    c.key_env_var = "LMSR_TEST_KEY";
    c.backoff_base_s = 0.001;
    c.timeout_s = 5;
    return c;
}

}  // namespace

TEST_CASE("request validation") {
    auto r = request();
    CHECK_NOTHROW(r.validate());
    r.temperature = 2.5;
    CHECK_THROWS_AS(r.validate(), Error);
    r = request();
    r.user.clear();
    CHECK_THROWS_AS(r.validate(), Error);
}

TEST_CASE("request body carries exactly one system and one user message") {
    auto body = nlohmann::json::parse(chat_request_body(request()));
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == "user prompt");
    CHECK(body["temperature"].get<double>() == 0.7);
    CHECK_FALSE(body.contains("max_tokens"));
}

TEST_CASE("scripted backend replays in order") {
    ScriptedBackend b({"first", "second"});
    CHECK(b.complete(request()).text == "first");
    auto r = b.complete(request());
    CHECK(r.text == "second");
    CHECK(r.completion_tokens == 2);
    CHECK(r.prompt_tokens == estimate_tokens("sys") + estimate_tokens("user prompt"));
    try {
        b.complete(request());
        FAIL("expected transcript_exhausted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::transcript_exhausted);
    }
    ScriptedBackend a({"x", "y"}), c({"x", "y"});
    CHECK(a.complete(request()).text == c.complete(request()).text);
}

TEST_CASE("transcript format round trips") {
    std::vector<std::string> entries{"line one\nline two", "", "third"};
    CHECK(parse_transcript(format_transcript(entries)) == entries);
    CHECK(parse_transcript("a\n=== END RESPONSE ===\nb") == std::vector<std::string>{"a", "b"});
    CHECK(parse_transcript("a\r\n=== END RESPONSE ===\r\n\n") == std::vector<std::string>{"a"});
    CHECK(parse_transcript("").empty());
}

TEST_CASE("token estimate and cost") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcde") == 2);
    PriceTable prices{{"m", {0.002, 0.005}}};
    CHECK(estimate_cost({}, "m", prices) == 0.0);
    CHECK(estimate_cost({1000, 1000}, "m", prices) == doctest::Approx(1000 * 0.002 + 1000 * 0.005));
    CHECK_THROWS_AS(estimate_cost({1, 1}, "other", prices), Error);
    CHECK(default_prices().count("gpt-4o") == 1);
}

TEST_CASE("http backend against a stub server") {
    std::atomic<int> calls{0};
    std::string seen_auth, seen_body;
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        res.set_content(canned("c1*x1/(c2+x1)"), "application/json");
    });
    HttpBackend b(stub_config(server));
    auto r = b.complete(request());
    CHECK(r.text == "c1*x1/(c2+x1)");
    CHECK(r.prompt_tokens == 11);
    CHECK(r.completion_tokens == 7);
    CHECK(calls == 1);
    CHECK(seen_auth == "Bearer sk-test-secret");
    auto body = nlohmann::json::parse(seen_body);
    CHECK(body["messages"].size() == 2);
    CHECK(body["model"] == "test-model");
}

TEST_CASE("http backend retries server errors") {
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            res.set_content("busy", "text/plain");
            return;
        }
        res.set_content(canned("ok"), "application/json");
    });
    HttpBackend b(stub_config(server));
    CHECK(b.complete(request()).text == "ok");
    CHECK(calls == 3);
}

TEST_CASE("http backend surfaces client errors with the body") {
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content(R"({"error":"bad model"})", "application/json");
    });
    HttpBackend b(stub_config(server));
    try {
        b.complete(request());
        FAIL("expected api error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::api);
        CHECK(std::string(e.what()).find("bad model") != std::string::npos);
        CHECK(std::string(e.what()).find("sk-test-secret") == std::string::npos);
    }
    CHECK(calls == 1);
}

TEST_CASE("http backend reports transport failures after retries") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    ::setenv("LMSR_TEST_KEY", "k", 1);
    HttpConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    c.key_env_var = "LMSR_TEST_KEY";
    c.max_retries = 2;
    c.backoff_base_s = 0.001;
    c.timeout_s = 2;
    HttpBackend b(c);
    try {
        b.complete(request());
        FAIL("expected transport error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::transport);
    }
}

TEST_CASE("http backend needs its key") {
    ::unsetenv("LMSR_MISSING_KEY");
    HttpConfig c;
    c.key_env_var = "LMSR_MISSING_KEY";
    CHECK_THROWS_AS(HttpBackend{c}, Error);
}
