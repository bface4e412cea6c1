// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

// Test-side generators and oracles shared by the unit and acceptance suites.
#pragma once

#include "lmsr/expr.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace lmsr::testing {

using expr::BinaryOp;
using expr::Expression;
using expr::Node;
using expr::NodeKind;
using expr::NodePtr;
using expr::UnaryOp;

struct TreeGen {
    std::mt19937_64 rng;
    std::uint32_t n_vars = 1;
    int max_depth = 4;
    bool allow_pow = true;

    explicit TreeGen(std::uint64_t seed, std::uint32_t vars = 1) : rng(seed), n_vars(vars) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    NodePtr leaf() {
        if (uniform(0, 2) == 0) return expr::make_constant(static_cast<std::uint32_t>(uniform(1, 4)));
        return expr::make_variable(static_cast<std::uint32_t>(uniform(1, static_cast<int>(n_vars))));
    }

    NodePtr node(int depth) {
        if (depth >= max_depth || uniform(0, 9) < 3) return leaf();
        const int pick = uniform(0, 9);
        if (pick < 2) {
            static constexpr UnaryOp ops[] = {UnaryOp::sqrt, UnaryOp::log, UnaryOp::exp,
                                              UnaryOp::square, UnaryOp::cube, UnaryOp::neg};
            return expr::make_unary(ops[uniform(0, 5)], node(depth + 1));
        }
        if (pick == 2 && allow_pow) {
            static constexpr double exps[] = {0.5, 1.5, 2.0, 3.0, -1.0, -0.5};
            auto base = node(depth + 1);
            if (uniform(0, 2) == 0) return expr::make_binary(BinaryOp::pow, base, expr::make_constant(1));
            return expr::make_binary(BinaryOp::pow, base, expr::make_number(exps[uniform(0, 5)]));
        }
        static constexpr BinaryOp ops[] = {BinaryOp::add, BinaryOp::sub, BinaryOp::mul, BinaryOp::div};
        return expr::make_binary(ops[uniform(0, 3)], node(depth + 1), node(depth + 1));
    }

    Expression expression() { return Expression(node(0)); }

    /// Forces every variable 1..n_vars to appear.
    Expression covering_expression() {
        NodePtr root = node(0);
        for (std::uint32_t v = 1; v <= n_vars; ++v)
            root = expr::make_binary(BinaryOp::add, root,
                                     expr::make_binary(BinaryOp::mul, expr::make_constant(100 + v), expr::make_variable(v)));
        return Expression(root);
    }
};

/// Independent reference evaluator: long double arithmetic, explicit domain
/// checks, no shared code with the library kernels.
inline std::optional<long double> oracle_eval(const Node& n, const std::vector<double>& p, const std::vector<double>& x) {
    auto finite = [](long double v) -> std::optional<long double> {
        if (std::isnan(v) || std::isinf(v) || std::fabs(v) > std::numeric_limits<double>::max()) return std::nullopt;
        return v;
    };
    switch (n.kind) {
        case NodeKind::constant: return p.at(n.index - 1);
        case NodeKind::number: return n.value;
        case NodeKind::variable: return x.at(n.index - 1);
        case NodeKind::unary: {
            auto a = oracle_eval(*n.lhs, p, x);
            if (!a) return std::nullopt;
            switch (n.unary_op()) {
                case UnaryOp::sqrt: return *a < 0 ? std::nullopt : finite(std::sqrt(*a));
                case UnaryOp::log: return *a <= 0 ? std::nullopt : finite(std::log(*a));
                case UnaryOp::exp: return finite(std::exp(*a));
                case UnaryOp::square: return finite(*a * *a);
                case UnaryOp::cube: return finite(*a * *a * *a);
                case UnaryOp::neg: return -*a;
            }
            return std::nullopt;
        }
        case NodeKind::binary: {
            auto a = oracle_eval(*n.lhs, p, x);
            auto b = oracle_eval(*n.rhs, p, x);
            if (!a || !b) return std::nullopt;
            switch (n.binary_op()) {
                case BinaryOp::add: return finite(*a + *b);
                case BinaryOp::sub: return finite(*a - *b);
                case BinaryOp::mul: return finite(*a * *b);
                case BinaryOp::div: return *b == 0 ? std::nullopt : finite(*a / *b);
                case BinaryOp::pow:
                    if (*a == 0 && *b < 0) return std::nullopt;
                    return finite(std::pow(*a, *b));
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

/// Rewrites that preserve SR-similarity: swap commutative operands, turn
/// "+ c" into "- c", wrap constants in a constant scale.
struct VariantGen {
    std::mt19937_64 rng;
    explicit VariantGen(std::uint64_t seed) : rng(seed) {}

    bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; }

    NodePtr rewrite(const NodePtr& n) {
        switch (n->kind) {
            case NodeKind::constant:
                if (coin()) return expr::make_binary(BinaryOp::mul, expr::make_constant(1), expr::make_constant(1));
                return n;
            case NodeKind::unary: return expr::make_unary(n->unary_op(), rewrite(n->lhs));
            case NodeKind::binary: {
                auto l = rewrite(n->lhs);
                auto r = n->binary_op() == BinaryOp::pow ? n->rhs : rewrite(n->rhs);
                const auto op = n->binary_op();
                if (op == BinaryOp::add && r->is(NodeKind::constant) && coin())
                    return expr::make_binary(BinaryOp::sub, l, r);
                if ((op == BinaryOp::add || op == BinaryOp::mul) && coin()) return expr::make_binary(op, r, l);
                return expr::make_binary(op, l, r);
            }
            default: return n;
        }
    }
};

}  // namespace lmsr::testing
