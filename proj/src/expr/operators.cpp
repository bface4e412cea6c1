// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/expr.hpp"

#include <algorithm>

namespace lmsr::expr {

void OperatorSet::add(std::string_view token) {
    if (token == "+") binary.insert(BinaryOp::add);
    else if (token == "-") binary.insert(BinaryOp::sub);
    else if (token == "*") binary.insert(BinaryOp::mul);
    else if (token == "/") binary.insert(BinaryOp::div);
    else if (token == "^" || token == "**" || token == "pow") binary.insert(BinaryOp::pow);
    else if (token == "sqrt") unary.insert(UnaryOp::sqrt);
    else if (token == "log") unary.insert(UnaryOp::log);
    else if (token == "exp") unary.insert(UnaryOp::exp);
    else if (token == "square") unary.insert(UnaryOp::square);
    else if (token == "cube") unary.insert(UnaryOp::cube);
    else throw Error(Errc::unknown_operator, "unknown operator token '" + std::string(token) + "'");
}

OperatorSet OperatorSet::easy(std::span<const std::string> extras) {
    OperatorSet s;
    s.name = "easy";
    for (auto t : {"+", "-", "*", "/"}) s.add(t);
    for (const auto& t : extras) s.add(t);
    return s;
}

OperatorSet OperatorSet::hard(std::span<const std::string> extras) {
    OperatorSet s = easy(extras);
    s.name = "hard";
    for (auto t : {"sqrt", "log", "exp", "square", "cube"}) s.add(t);
    return s;
}

std::vector<std::string> OperatorSet::tokens() const {
    std::vector<std::string> out;
    for (auto op : {BinaryOp::add, BinaryOp::sub, BinaryOp::mul, BinaryOp::div, BinaryOp::pow})
        if (binary.count(op)) out.emplace_back(op_symbol(op));
    for (auto op : {UnaryOp::sqrt, UnaryOp::log, UnaryOp::exp, UnaryOp::square, UnaryOp::cube})
        if (unary.count(op)) out.emplace_back(op_symbol(op));
    return out;
}

namespace {

void check(const Node& n, const OperatorSet& ops) {
    switch (n.kind) {
        case NodeKind::unary:
            if (!ops.contains(n.unary_op()))
                throw Error(Errc::operator_not_allowed,
                            "operator '" + std::string(op_symbol(n.unary_op())) + "' is not in the " + ops.name + " set");
            check(*n.lhs, ops);
            return;
        case NodeKind::binary:
            if (n.binary_op() == BinaryOp::pow) {
                if (!ops.contains(BinaryOp::pow) && !n.rhs->is(NodeKind::number))
                    throw Error(Errc::operator_not_allowed,
                                "operator '^' with a non-literal exponent is not in the " + ops.name + " set");
            } else if (!ops.contains(n.binary_op())) {
                throw Error(Errc::operator_not_allowed,
                            "operator '" + std::string(op_symbol(n.binary_op())) + "' is not in the " + ops.name + " set");
            }
            check(*n.lhs, ops);
            check(*n.rhs, ops);
            return;
        default: return;
    }
}

}  // namespace

void validate_operators(const Expression& e, const OperatorSet& ops) {
    if (!e.valid()) throw Error(Errc::invalid_argument, "empty expression");
    check(e.root(), ops);
}

void validate_variables(const Expression& e, std::uint32_t n_vars) {
    auto used = e.variables();
    if (!used.empty() && used.back() > n_vars)
        throw Error(Errc::invalid_argument, "expression references x" + std::to_string(used.back()) +
                                                " but the dataset has " + std::to_string(n_vars) + " variables");
    for (std::uint32_t v = 1; v <= n_vars; ++v) {
        if (!std::binary_search(used.begin(), used.end(), v))
            throw Error(Errc::missing_variable, "expression does not use variable x" + std::to_string(v));
    }
}

}  // namespace lmsr::expr
