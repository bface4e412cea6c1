// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/expr.hpp"

#include <algorithm>
#include <map>

namespace lmsr {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::syntax: return "SyntaxError";
        case Errc::unknown_operator: return "UnknownOperator";
        case Errc::implicit_form: return "ImplicitForm";
        case Errc::arity_mismatch: return "ArityMismatch";
        case Errc::operator_not_allowed: return "OperatorNotAllowed";
        case Errc::too_many_constants: return "TooManyConstants";
        case Errc::missing_variable: return "MissingVariable";
        case Errc::no_finite_objective: return "NoFiniteObjective";
        case Errc::unknown_dataset: return "UnknownDataset";
        case Errc::malformed_csv: return "MalformedCsv";
        case Errc::non_numeric_cell: return "NonNumericCell";
        case Errc::io: return "IoError";
        case Errc::config: return "ConfigError";
        case Errc::transport: return "Transport";
        case Errc::api: return "ApiError";
        case Errc::transcript_exhausted: return "TranscriptExhausted";
        case Errc::unknown_model: return "UnknownModel";
        case Errc::missing_data: return "MissingData";
        case Errc::invalid_feedback: return "InvalidFeedback";
        case Errc::sample_too_large: return "SampleTooLarge";
        case Errc::internal: return "InternalError";
    }
    return "Unknown";
}

}  // namespace lmsr

namespace lmsr::expr {

NodePtr make_constant(std::uint32_t index) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::constant;
    n->index = index;
    return n;
}

NodePtr make_number(double value) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::number;
    n->value = value;
    return n;
}

NodePtr make_variable(std::uint32_t index) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::variable;
    n->index = index;
    return n;
}

NodePtr make_unary(UnaryOp op, NodePtr child) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::unary;
    n->op = static_cast<std::uint8_t>(op);
    n->lhs = std::move(child);
    return n;
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::binary;
    n->op = static_cast<std::uint8_t>(op);
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

bool structurally_equal(const Node& a, const Node& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::constant:
        case NodeKind::variable: return a.index == b.index;
        case NodeKind::number: return a.value == b.value;
        case NodeKind::unary: return a.op == b.op && structurally_equal(*a.lhs, *b.lhs);
        case NodeKind::binary:
            return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
    return false;
}

std::string_view op_symbol(UnaryOp op) {
    switch (op) {
        case UnaryOp::sqrt: return "sqrt";
        case UnaryOp::log: return "log";
        case UnaryOp::exp: return "exp";
        case UnaryOp::square: return "square";
        case UnaryOp::cube: return "cube";
        case UnaryOp::neg: return "neg";
    }
    return "?";
}

std::string_view op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::add: return "+";
        case BinaryOp::sub: return "-";
        case BinaryOp::mul: return "*";
        case BinaryOp::div: return "/";
        case BinaryOp::pow: return "^";
    }
    return "?";
}

namespace {

struct Reindexer {
    std::map<std::uint32_t, std::uint32_t> mapping;
    std::uint32_t max_variable = 0;

    NodePtr visit(const NodePtr& n) {
        switch (n->kind) {
            case NodeKind::constant: {
                auto it = mapping.try_emplace(n->index, static_cast<std::uint32_t>(mapping.size() + 1)).first;
                return it->second == n->index ? n : make_constant(it->second);
            }
            case NodeKind::variable:
                max_variable = std::max(max_variable, n->index);
                return n;
            case NodeKind::number: return n;
            case NodeKind::unary: {
                auto c = visit(n->lhs);
                return c == n->lhs ? n : make_unary(n->unary_op(), std::move(c));
            }
            case NodeKind::binary: {
                auto l = visit(n->lhs);
                auto r = visit(n->rhs);
                return (l == n->lhs && r == n->rhs) ? n : make_binary(n->binary_op(), std::move(l), std::move(r));
            }
        }
        return n;
    }
};

void collect_variables(const Node& n, std::vector<std::uint32_t>& out) {
    switch (n.kind) {
        case NodeKind::variable: out.push_back(n.index); break;
        case NodeKind::unary: collect_variables(*n.lhs, out); break;
        case NodeKind::binary:
            collect_variables(*n.lhs, out);
            collect_variables(*n.rhs, out);
            break;
        default: break;
    }
}

}  // namespace

Expression::Expression(NodePtr root, std::vector<double> initial) {
    if (!root) throw Error(Errc::invalid_argument, "expression root is null");
    Reindexer r;
    root_ = r.visit(root);
    max_variable_ = r.max_variable;
    initial_.assign(r.mapping.size(), 1.0);
    for (const auto& [old_index, new_index] : r.mapping) {
        if (old_index >= 1 && old_index <= initial.size()) initial_[new_index - 1] = initial[old_index - 1];
    }
}

std::vector<std::uint32_t> Expression::variables() const {
    std::vector<std::uint32_t> out;
    if (root_) collect_variables(*root_, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool operator==(const Expression& a, const Expression& b) {
    if (!a.root_ || !b.root_) return a.root_ == b.root_;
    return structurally_equal(*a.root_, *b.root_);
}

std::size_t complexity(const Node& n) {
    switch (n.kind) {
        case NodeKind::unary: return 1 + complexity(*n.lhs);
        case NodeKind::binary: return 1 + complexity(*n.lhs) + complexity(*n.rhs);
        default: return 1;
    }
}

std::size_t complexity(const Expression& e) { return e.valid() ? complexity(e.root()) : 0; }

}  // namespace lmsr::expr
