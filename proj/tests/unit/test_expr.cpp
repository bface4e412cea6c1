// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/expr.hpp"

#include "../support/gen.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace lmsr;
using namespace lmsr::expr;

namespace {

const std::vector<std::string> kX1{"x1"};
const std::vector<std::string> kX12{"x1", "x2"};

Expression infix(const std::string& s, const std::vector<std::string>& vars = kX1) {
    return parse(s, Dialect::infix, vars);
}

Expression latex(const std::string& s, const std::vector<std::string>& vars = kX1) {
    return parse(s, Dialect::latex_lite, vars);
}

Errc parse_error(const std::string& s, Dialect d = Dialect::infix, const ParseOptions& o = {}) {
    try {
        parse(s, d, kX1, o);
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::internal;
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
    auto e = infix("c1*x1/(c2+x1)");
    const Node& r = e.root();
    REQUIRE(r.is_binary(BinaryOp::div));
    CHECK(r.lhs->is_binary(BinaryOp::mul));
    CHECK(r.lhs->lhs->is(NodeKind::constant));
    CHECK(r.lhs->lhs->index == 1);
    CHECK(r.lhs->rhs->is(NodeKind::variable));
    CHECK(r.rhs->is_binary(BinaryOp::add));
    CHECK(r.rhs->lhs->index == 2);
    CHECK(e.constant_count() == 2);

    CHECK(infix("x1").root().is(NodeKind::variable));
    CHECK(complexity(infix("x1")) == 1);
    CHECK(complexity(e) == 7);
    CHECK(complexity(infix("c1*exp(c2*x1)+c3")) == 8);
}

TEST_CASE("latex and infix agree") {
    CHECK(latex("\\frac{c_1 x_1}{c_2 + x_1}") == infix("c1*x1/(c2+x1)"));
    CHECK(latex("c_1 \\cdot \\exp(c_2 x_1) + c_3") == infix("c1*exp(c2*x1)+c3"));
    CHECK(latex("c_{1} \\sqrt{x_1}") == infix("c1*sqrt(x1)"));
    CHECK(latex("$c_1 x_1^{3/2}$") == infix("c1*x1^(3/2)"));
    CHECK(latex("\\left(c_1 + x_1\\right) \\times c_2") == infix("(c1+x1)*c2"));
    CHECK(latex("y = \\frac{c_1}{x_1}") == infix("c1/x1"));
}

TEST_CASE("infix conveniences") {
    CHECK(infix("c1*x1**2") == infix("c1*x1^2"));
    CHECK(infix("np.exp(c1*x1)") == infix("exp(c1*x1)"));
    CHECK(infix("pow(x1, 1.5)*c1") == infix("x1^1.5*c1"));
    CHECK(infix("y = c1*x1") == infix("c1*x1"));
    ParseOptions alias;
    alias.aliases.emplace_back("x", 1);
    CHECK(parse("c1*x/(c2+x)", Dialect::infix, kX1, alias) == infix("c1*x1/(c2+x1)"));
}

TEST_CASE("literals become constants with the literal as initial guess") {
    auto e = infix("2*x1+3.5");
    CHECK(e == infix("c1*x1+c2"));
    REQUIRE(e.constant_count() == 2);
    CHECK(e.initial_guess()[0] == 2.0);
    CHECK(e.initial_guess()[1] == 3.5);
    // Literal exponents stay fixed numbers.
    auto k = infix("c1*x1^(3/2)");
    CHECK(k.constant_count() == 1);
    CHECK(k.root().rhs->rhs->is(NodeKind::number));
    CHECK(k.root().rhs->rhs->value == 1.5);
    CHECK_FALSE(k == infix("c1*x1^c2"));
}

TEST_CASE("constants are re-indexed left to right") {
    auto e = infix("c7*x1+c3");
    CHECK(e == infix("c1*x1+c2"));
    CHECK(render(e) == "c1*x1+c2");
}

TEST_CASE("parse errors") {
    CHECK(parse_error("c1*(x1+c2") == Errc::syntax);
    CHECK(parse_error("c1*x1)") == Errc::syntax);
    CHECK(parse_error("c1*z9") == Errc::syntax);
    CHECK(parse_error("c1*x1 +") == Errc::syntax);
    CHECK(parse_error("sin(x1)") == Errc::unknown_operator);
    CHECK(parse_error("tanh(x1)*c1") == Errc::unknown_operator);
    CHECK(parse_error("y = c1*y + x1") == Errc::implicit_form);
    CHECK(parse_error("c1 = x1") == Errc::implicit_form);
    CHECK(parse_error("\\frac{c_1}{x_1", Dialect::latex_lite) == Errc::syntax);
    CHECK(parse_error("\\int x_1", Dialect::latex_lite) == Errc::syntax);
    CHECK(parse_error("") == Errc::syntax);
}

TEST_CASE("render") {
    CHECK(render(Expression(make_binary(BinaryOp::add, make_variable(1), make_constant(1)))) == "x1+c1");
    CHECK(render(infix("c1*x1/(c2+x1)")) == "c1*x1/(c2+x1)");
    CHECK(render(Expression(make_unary(UnaryOp::sqrt, make_variable(1)))) == "sqrt(x1)");
    CHECK(render(infix("x1-(c1-x1)")) == "x1-(c1-x1)");
    CHECK(render(infix("(x1^2)^c1")) == "(x1^2)^c1");
    CHECK(render(infix("x1^(-1)")) == "x1^(-1)");
    const std::vector<std::string> names{"p"};
    CHECK(render(infix("c1*x1"), names) == "c1*p");
}

TEST_CASE("round trip over random trees") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        testing::TreeGen gen(seed, 2);
        auto e = gen.expression();
        auto text = render(e);
        INFO(text);
        CHECK(parse(text, Dialect::infix, kX12) == e);
    }
}

TEST_CASE("evaluate examples") {
    const double two = 2.0, three = 3.0;
    CHECK(*evaluate(infix("x1+c1"), std::vector{two}, std::vector{three}) == 5.0);
    CHECK_FALSE(evaluate(infix("c1/x1"), std::vector{1.0}, std::vector{0.0}).has_value());
    CHECK(*evaluate(infix("c1*x1/(c2+x1)"), std::vector{5.0, 2.0}, std::vector{2.0}) == 2.5);
    CHECK_FALSE(evaluate(infix("log(x1)"), {}, std::vector{-1.0}).has_value());
    CHECK_FALSE(evaluate(infix("sqrt(x1)"), {}, std::vector{-1.0}).has_value());
    CHECK_FALSE(evaluate(infix("exp(x1)"), {}, std::vector{1000.0}).has_value());
    CHECK_FALSE(evaluate(infix("x1^(-1)"), {}, std::vector{0.0}).has_value());
    CHECK_THROWS_AS(evaluate(infix("c1*x1"), std::vector{1.0, 2.0}, std::vector{1.0}), Error);
}

TEST_CASE("evaluate agrees with an independent oracle") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    int compared = 0, undefined = 0;
    for (std::uint64_t seed = 0; seed < 1500; ++seed) {
        testing::TreeGen gen(seed + 10'000, 2);
        auto e = gen.expression();
        std::vector<double> p(e.constant_count()), x(2);
        for (auto& v : p) v = u(rng);
        for (auto& v : x) v = u(rng);
        auto got = evaluate(e, p, x);
        auto want = testing::oracle_eval(e.root(), p, x);
        INFO(render(e));
        if (!want) {
            ++undefined;
            continue;
        }
        // Results right at the overflow threshold can go either way.
        if (std::fabs(static_cast<double>(*want)) > 1e300) continue;
        REQUIRE(got.has_value());
        const double w = static_cast<double>(*want);
        CHECK(std::fabs(*got - w) <= 1e-12 * std::max(1.0, std::fabs(w)));
        ++compared;
    }
    CHECK(compared >= 1000);
    MESSAGE("compared " << compared << ", undefined " << undefined);
}

TEST_CASE("compiled evaluation matches the tree walk") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const std::size_t rows = 17;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        testing::TreeGen gen(seed + 77, 2);
        auto e = gen.expression();
        std::vector<double> p(e.constant_count());
        for (auto& v : p) v = u(rng);
        std::vector<double> c1(rows), c2(rows), out(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            c1[r] = u(rng);
            c2[r] = u(rng);
        }
        std::vector<std::span<const double>> cols{c1, c2};
        CompiledExpression(e).evaluate(p, cols, out);
        for (std::size_t r = 0; r < rows; ++r) {
            auto ref = evaluate(e, p, std::vector{c1[r], c2[r]});
            INFO(render(e));
            if (ref) {
                CHECK(out[r] == doctest::Approx(*ref).epsilon(1e-12));
            } else {
                CHECK(std::isnan(out[r]));
            }
        }
    }
}

TEST_CASE("canonicalize examples") {
    CHECK(canonicalize(infix("x1-c1")) == canonicalize(infix("x1+c1")));
    CHECK(canonicalize(infix("c1*(c2+x1)")) == canonicalize(infix("c1+c2*x1")));
    CHECK(canonicalize(infix("-c1*x1")) == canonicalize(infix("c1*x1")));
    CHECK(canonicalize(infix("c1*x1/c2")) == canonicalize(infix("c1*x1")));
    CHECK(canonicalize(infix("c1*c2+x1")) == canonicalize(infix("c1+x1")));
    CHECK(complexity(canonicalize(infix("c1*c2*c3*x1"))) == 3);
    // pow with a fixed exponent is left alone.
    CHECK(canonicalize(infix("c1*x1^1.5")) == infix("c1*x1^1.5"));
}

TEST_CASE("sr_equivalent examples") {
    CHECK(sr_equivalent(infix("x1+c1"), infix("x1-c1")));
    CHECK_FALSE(sr_equivalent(infix("c1*x1"), infix("c1*x1+c2")));
    CHECK(sr_equivalent(infix("c1*x1/(c2+x1)"), infix("c3*x1/(x1+c4)")));
    CHECK(sr_equivalent(infix("x1*c3/(x1+c4)"), infix("c1*x1/(c2+x1)")));
    CHECK(sr_equivalent(infix("c1*exp(c2*x1)+c3"), infix("c3+exp(x1*c2)*c1")));
    CHECK_FALSE(sr_equivalent(infix("c1*x1^c2"), infix("c1*x1^1.5")));
    CHECK_FALSE(sr_equivalent(infix("c1*x1/(c2+x1)"), infix("c1*x1/(c2-x1)")));
}

TEST_CASE("canonicalize properties over random trees") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        testing::TreeGen gen(seed + 555, 2);
        auto e = gen.expression();
        auto c = canonicalize(e);
        INFO(render(e), " -> ", render(c));
        CHECK(canonicalize(c) == c);
        CHECK(complexity(c) <= complexity(e));
        CHECK(sr_equivalent(e, e));
    }
}

TEST_CASE("sr_equivalent is transitive over rewritten variants") {
    std::vector<Expression> corpus;
    for (std::uint64_t base = 0; base < 25; ++base) {
        testing::TreeGen gen(base + 4242, 2);
        gen.max_depth = 3;
        auto e = gen.expression();
        corpus.push_back(e);
        testing::VariantGen vg(base);
        for (int k = 0; k < 4; ++k) {
            auto v = Expression(vg.rewrite(e.root_ptr()));
            INFO(render(e), " vs ", render(v));
            CHECK(sr_equivalent(e, v));
            corpus.push_back(v);
        }
    }
    REQUIRE(corpus.size() >= 100);
    std::vector<Expression> canon;
    for (const auto& e : corpus) canon.push_back(canonicalize(e));
    const auto n = corpus.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const bool ab = sr_equivalent(corpus[a], corpus[b]);
            CHECK(ab == sr_equivalent(corpus[b], corpus[a]));
            if (!ab) continue;
            for (std::size_t c = 0; c < n; ++c)
                if (canon[b] == canon[c]) CHECK(sr_equivalent(corpus[a], corpus[c]));
        }
}

TEST_CASE("operator validation") {
    auto easy = OperatorSet::easy();
    CHECK_NOTHROW(validate_operators(infix("c1*x1/(c2+x1)"), easy));
    CHECK_THROWS_AS(validate_operators(infix("c1*sqrt(x1)"), easy), Error);
    std::vector<std::string> kepler{"sqrt"};
    CHECK_NOTHROW(validate_operators(infix("c1*x1*sqrt(x1)"), OperatorSet::easy(kepler)));
    CHECK_NOTHROW(validate_operators(infix("c1*x1^1.5"), easy));
    CHECK_THROWS_AS(validate_operators(infix("c1*x1^c2"), easy), Error);
    std::vector<std::string> bode{"^", "exp"};
    CHECK_NOTHROW(validate_operators(infix("c1*c2^x1"), OperatorSet::easy(bode)));
    auto hard = OperatorSet::hard();
    CHECK(hard.tokens() == std::vector<std::string>{"+", "-", "*", "/", "sqrt", "log", "exp", "square", "cube"});
    CHECK_NOTHROW(validate_operators(infix("log(x1)+cube(x1)"), hard));
    try {
        validate_operators(infix("c1*log(x1)"), easy);
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::operator_not_allowed);
    }
}

TEST_CASE("variable validation") {
    CHECK_NOTHROW(validate_variables(infix("c1*x1+x2", kX12), 2));
    CHECK_THROWS_AS(validate_variables(infix("c1*x1", kX12), 2), Error);
    CHECK_THROWS_AS(validate_variables(infix("c1*x2", kX12), 1), Error);
}
