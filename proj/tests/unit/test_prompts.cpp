// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/data.hpp"
#include "lmsr/error.hpp"
#include "lmsr/pareto.hpp"
#include "lmsr/prompts.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

using namespace lmsr;
using namespace lmsr::prompts;

namespace {

bool has(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

std::string kepler_initial(PromptConfig cfg = {}) {
    auto d = data::load_builtin("kepler");
    cfg.operators = d.operator_set("easy");
    return build_initial(make_data_view(d, cfg.rounding_decimals), d.context, cfg);
}

std::string feedback_json() {
    auto d = data::load_builtin("kepler");
    std::vector<pareto::Candidate> cands;
    const char* eqs[] = {"c1*x1", "c1*x1^2", "c1*x1*sqrt(x1)"};
    double mse = 1000.0;
    for (const char* s : eqs) {
        auto e = expr::parse(s, expr::Dialect::infix, d.variables(), d.parse_options());
        cands.push_back(pareto::Candidate::make(e, std::vector<double>(e.constant_count(), 1.5), mse, mse / 10, 0));
        mse /= 10;
    }
    return pareto::to_feedback_json(cands, false);
}

}  // namespace

TEST_CASE("initial prompt carries context, data and rules") {
    auto p = kepler_initial();
    CHECK(has(p, "planetary motion"));
    CHECK(has(p, "semi-major axis"));
    CHECK(has(p, "period in days"));
    CHECK(has(p, "0.387"));
    CHECK(has(p, "87.969"));
    CHECK(has(p, "Data (6 rows)"));
    CHECK(has(p, "Use only these operators: +, -, *, /, sqrt."));
    CHECK(has(p, "scratchpad"));
    CHECK(has(p, "BEGIN_EXPRESSIONS"));
    CHECK(has(p, "END_EXPRESSIONS"));
    CHECK(has(p, "exactly 3 expressions"));
    CHECK_FALSE(has(p, "{{"));
    // No worked examples that could be copied as equations.
    CHECK_FALSE(has(p, "="));
}

TEST_CASE("prompt switches gate their sections") {
    PromptConfig cfg;
    cfg.use_scratchpad = false;
    auto p = kepler_initial(cfg);
    CHECK_FALSE(has(p, "scratchpad"));
    CHECK(has(p, "END_EXPRESSIONS"));

    cfg = {};
    cfg.use_context = false;
    p = kepler_initial(cfg);
    CHECK_FALSE(has(p, "planetary"));
    CHECK_FALSE(has(p, "<context>"));
    CHECK_FALSE(has(p, "scientific context into account"));

    cfg = {};
    cfg.include_data = false;
    p = kepler_initial(cfg);
    CHECK_FALSE(has(p, "<data>"));
    CHECK_FALSE(has(p, "87.969"));
    CHECK(has(p, "planetary motion"));
}

TEST_CASE("prompts are deterministic") {
    CHECK(kepler_initial() == kepler_initial());
    auto d = data::load_builtin("kepler");
    PromptConfig cfg;
    auto v = make_data_view(d, 3);
    auto fb = feedback_json();
    CHECK(build_iteration(v, fb, d.context, cfg) == build_iteration(v, fb, d.context, cfg));
}

TEST_CASE("iteration prompt embeds the feedback") {
    auto d = data::load_builtin("kepler");
    PromptConfig cfg;
    auto fb = feedback_json();
    auto p = build_iteration(make_data_view(d, 3), fb, d.context, cfg);
    CHECK(has(p, fb));
    CHECK(has(p, "\"c1*x1\""));
    CHECK(has(p, "\"c1*x1^2\""));
    CHECK(has(p, "\"c1*x1*sqrt(x1)\""));
    CHECK(has(p, "x1+c1 and x1-c1"));
    CHECK(has(p, "complexity and loss"));
    CHECK(has(p, "complexity and mean squared error"));
    cfg.feedback_has_params = true;
    CHECK(has(build_iteration(make_data_view(d, 3), fb, d.context, cfg), "fitted constants"));

    try {
        (void)build_iteration(make_data_view(d, 3), "{\"a\":1}", d.context, PromptConfig{});
        FAIL("expected invalid_feedback");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_feedback);
    }
    CHECK_THROWS_AS((void)build_iteration(make_data_view(d, 3), "[oops", d.context, PromptConfig{}), Error);
}

TEST_CASE("extra instructions become rules") {
    PromptConfig cfg;
    cfg.extra_instructions = variant_instructions("p3", "0.00392");
    auto p = kepler_initial(cfg);
    CHECK(has(p, "- Longer expressions"));
    CHECK(has(p, "0.00392"));
    CHECK(variant_instructions("p1", "").empty());
    CHECK(variant_instructions("p2", "").size() == 1);
    CHECK_THROWS_AS((void)variant_instructions("p4", ""), Error);
}

TEST_CASE("number formatting") {
    CHECK(format_number(2.718281, 3) == "2.718");
    CHECK(format_number(2.5, 3) == "2.5");
    CHECK(format_number(100.0, 3) == "100");
    CHECK(format_number(-0.0001, 3) == "0");
    CHECK(format_number(-1.23456, 2) == "-1.23");
    CHECK(format_number(0.1, std::nullopt) == "0.1");
    CHECK(format_number(1e-7, std::nullopt) == "1e-07");
}

TEST_CASE("rounding touches only the rendered view") {
    auto d = data::load_builtin("kepler");
    auto before = std::vector<double>(d.output().begin(), d.output().end());
    auto v = make_data_view(d, 0);
    CHECK(v.columns.back().front() == "88");
    CHECK(std::equal(before.begin(), before.end(), d.output().begin()));
}

TEST_CASE("missing data is reported") {
    auto d = data::load_builtin("kepler");
    DataView empty = make_data_view(d, 3);
    empty.indices.clear();
    for (auto& c : empty.columns) c.clear();
    try {
        (void)build_initial(empty, d.context, PromptConfig{});
        FAIL("expected missing_data");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::missing_data);
    }
    PromptConfig cfg;
    cfg.include_data = false;
    CHECK_NOTHROW((void)build_initial(empty, d.context, cfg));
}

TEST_CASE("subsamples are seeded, nested and disjoint on demand") {
    auto s1 = sample_rows(362, {36, 7, 0});
    auto s2 = sample_rows(362, {72, 7, 0});
    CHECK(s1 == sample_rows(362, {36, 7, 0}));
    CHECK(s1 != sample_rows(362, {36, 8, 0}));
    REQUIRE(s1.size() == 36);
    REQUIRE(s2.size() == 72);
    CHECK(std::set<std::size_t>(s1.begin(), s1.end()).size() == 36);
    CHECK(std::equal(s1.begin(), s1.end(), s2.begin()));

    auto other = sample_rows(362, {36, 7, 36});
    std::set<std::size_t> a(s1.begin(), s1.end());
    for (auto r : other) CHECK(a.count(r) == 0);
    CHECK(std::all_of(s2.begin(), s2.end(), [](std::size_t r) { return r < 362; }));

    try {
        (void)sample_rows(10, {11, 1, 0});
        FAIL("expected sample_too_large");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::sample_too_large);
    }
    CHECK(sample_rows(10, {10, 3, 0}).size() == 10);

    auto d = data::load_builtin("nikuradse");
    auto v = make_data_view(d, 3, Subsample{36, 7, 0});
    CHECK(v.indices.size() == 36);
    CHECK(std::is_sorted(v.indices.begin(), v.indices.end()));
    CHECK(v.columns[0].size() == 36);
    PromptConfig cfg;
    cfg.operators = d.operator_set("easy");
    CHECK(has(build_initial(v, d.context, cfg), "Data (36 of 362 rows)"));
}

TEST_CASE("subsample positions are roughly uniform") {
    // Each row should land in a 36-row sample with probability 36/362.
    std::vector<int> hits(362, 0);
    const int trials = 2000;
    for (int s = 0; s < trials; ++s)
        for (auto r : sample_rows(362, {36, static_cast<std::uint64_t>(s), 0})) ++hits[r];
    const double expect = trials * 36.0 / 362.0;
    for (int h : hits) {
        CHECK(h > expect * 0.5);
        CHECK(h < expect * 1.6);
    }
}

TEST_CASE("template engine") {
    auto dir = std::filesystem::temp_directory_path() / "lmsr_prompt_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "t.txt") << "{{#a}}A{{#b}}B{{/b}}{{/a}}{{^a}}none{{/a}}|{{>u.txt}}\n";
        std::ofstream(dir / "u.txt") << "[{{a}}]\n";
        std::ofstream(dir / "bad.txt") << "{{#a}}open\n";
        std::ofstream(dir / "system.txt") << "custom system\n";
    }
    auto t = TemplateSet::from_dir(dir);
    CHECK(t.render("t.txt", {{"a", "1"}, {"b", "x"}}) == "AB|[1]");
    CHECK(t.render("t.txt", {{"a", ""}, {"b", ""}}) == "none|[]");
    CHECK_THROWS_AS((void)t.render("t.txt", {{"a", "1"}}), Error);
    CHECK_THROWS_AS((void)t.render("bad.txt", {{"a", "1"}}), Error);
    CHECK_THROWS_AS((void)t.get("nope.txt"), Error);
    CHECK(build_system(t) == "custom system");
    CHECK(has(build_system(), "c1, c2"));
    CHECK(has(build_format_reminder(PromptConfig{}), "END_EXPRESSIONS"));
    std::filesystem::remove_all(dir);
}
