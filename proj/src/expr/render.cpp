// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/expr.hpp"

#include <charconv>
#include <string>

namespace lmsr::expr {

namespace {

// Precedence levels matching the grammar: sums < products < unary minus < pow.
int precedence(const Node& n) {
    if (n.kind == NodeKind::binary) {
        switch (n.binary_op()) {
            case BinaryOp::add:
            case BinaryOp::sub: return 1;
            case BinaryOp::mul:
            case BinaryOp::div: return 2;
            case BinaryOp::pow: return 4;
        }
    }
    if (n.is_unary(UnaryOp::neg)) return 3;
    if (n.kind == NodeKind::number && n.value < 0) return 3;
    return 5;
}

std::string number_text(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class Renderer {
public:
    explicit Renderer(std::span<const std::string> names) : names_(names) {}

    void emit(const Node& n, std::string& out) const {
        switch (n.kind) {
            case NodeKind::constant:
                out += 'c';
                out += std::to_string(n.index);
                return;
            case NodeKind::number: out += number_text(n.value); return;
            case NodeKind::variable:
                if (n.index >= 1 && n.index <= names_.size()) {
                    out += names_[n.index - 1];
                } else {
                    out += 'x';
                    out += std::to_string(n.index);
                }
                return;
            case NodeKind::unary:
                if (n.unary_op() == UnaryOp::neg) {
                    out += '-';
                    wrap(*n.lhs, precedence(*n.lhs) < 4, out);
                } else {
                    out += op_symbol(n.unary_op());
                    out += '(';
                    emit(*n.lhs, out);
                    out += ')';
                }
                return;
            case NodeKind::binary: {
                const int p = precedence(n);
                const Node& l = *n.lhs;
                const Node& r = *n.rhs;
                if (n.binary_op() == BinaryOp::pow) {
                    wrap(l, precedence(l) <= p, out);
                    out += '^';
                    wrap(r, precedence(r) < p, out);
                    return;
                }
                wrap(l, precedence(l) < p, out);
                out += op_symbol(n.binary_op());
                // Right operands of the same level keep their grouping; a
                // leading minus on the right is always bracketed.
                wrap(r, precedence(r) <= p || precedence(r) == 3, out);
                return;
            }
        }
    }

private:
    void wrap(const Node& n, bool parens, std::string& out) const {
        if (parens) out += '(';
        emit(n, out);
        if (parens) out += ')';
    }

    std::span<const std::string> names_;
};

}  // namespace

std::string render(const Node& n, std::span<const std::string> names) {
    std::string out;
    Renderer(names).emit(n, out);
    return out;
}

std::string render(const Expression& e, std::span<const std::string> names) {
    return e.valid() ? render(e.root(), names) : std::string();
}

}  // namespace lmsr::expr
