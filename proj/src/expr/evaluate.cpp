// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/expr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmsr::expr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shared protected kernels: a non-finite input, a domain error or a non-finite
// result is NaN (so pow(NaN, 0) and 1/inf stay undefined).
inline double guard(double v) { return std::isfinite(v) ? v : kNaN; }

inline double apply_unary(UnaryOp op, double a) {
    if (!std::isfinite(a)) return kNaN;
    switch (op) {
        case UnaryOp::sqrt: return a < 0.0 ? kNaN : std::sqrt(a);
        case UnaryOp::log: return a <= 0.0 ? kNaN : std::log(a);
        case UnaryOp::exp: return guard(std::exp(a));
        case UnaryOp::square: return guard(a * a);
        case UnaryOp::cube: return guard(a * a * a);
        case UnaryOp::neg: return -a;
    }
    return kNaN;
}

inline double apply_binary(BinaryOp op, double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) return kNaN;
    switch (op) {
        case BinaryOp::add: return guard(a + b);
        case BinaryOp::sub: return guard(a - b);
        case BinaryOp::mul: return guard(a * b);
        case BinaryOp::div: return b == 0.0 ? kNaN : guard(a / b);
        case BinaryOp::pow:
            if (a == 0.0 && b < 0.0) return kNaN;
            return guard(std::pow(a, b));
    }
    return kNaN;
}

double walk(const Node& n, std::span<const double> params, std::span<const double> x) {
    switch (n.kind) {
        case NodeKind::constant: return params[n.index - 1];
        case NodeKind::number: return n.value;
        case NodeKind::variable: return x[n.index - 1];
        case NodeKind::unary: return apply_unary(n.unary_op(), walk(*n.lhs, params, x));
        case NodeKind::binary: {
            double a = walk(*n.lhs, params, x);
            double b = walk(*n.rhs, params, x);
            return apply_binary(n.binary_op(), a, b);
        }
    }
    return kNaN;
}

}  // namespace

std::optional<double> evaluate(const Expression& e, std::span<const double> params, std::span<const double> x) {
    if (!e.valid()) throw Error(Errc::invalid_argument, "evaluate on an empty expression");
    if (params.size() != e.constant_count()) {
        throw Error(Errc::arity_mismatch, "expected " + std::to_string(e.constant_count()) + " parameters, got " +
                                              std::to_string(params.size()));
    }
    if (x.size() < e.max_variable()) {
        throw Error(Errc::arity_mismatch, "input row has " + std::to_string(x.size()) + " values, expression needs " +
                                              std::to_string(e.max_variable()));
    }
    double v = walk(e.root(), params, x);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

namespace {

template <typename Emit>
std::size_t flatten(const Node& n, Emit&& emit) {
    switch (n.kind) {
        case NodeKind::unary: {
            std::size_t d = flatten(*n.lhs, emit);
            emit(n);
            return d;
        }
        case NodeKind::binary: {
            std::size_t dl = flatten(*n.lhs, emit);
            std::size_t dr = flatten(*n.rhs, emit);
            emit(n);
            return std::max(dl, dr + 1);
        }
        default: emit(n); return 1;
    }
}

}  // namespace

CompiledExpression::CompiledExpression(const Expression& e) : constant_count_(e.constant_count()) {
    if (!e.valid()) throw Error(Errc::invalid_argument, "compile of an empty expression");
    max_depth_ = flatten(e.root(), [this](const Node& n) {
        code_.push_back({n.kind, n.op, n.index, n.value});
    });
}

void CompiledExpression::evaluate(std::span<const double> params, std::span<const std::span<const double>> columns,
                                  std::span<double> out) const {
    if (params.size() != constant_count_) {
        throw Error(Errc::arity_mismatch, "expected " + std::to_string(constant_count_) + " parameters");
    }
    const std::size_t rows = out.size();
    if (stack_.size() < max_depth_) stack_.resize(max_depth_);
    for (auto& s : stack_)
        if (s.size() < rows) s.resize(rows);

    std::size_t top = 0;  // number of live stack slots
    for (const Instr& ins : code_) {
        switch (ins.kind) {
            case NodeKind::constant: std::fill_n(stack_[top++].begin(), rows, params[ins.index - 1]); break;
            case NodeKind::number: std::fill_n(stack_[top++].begin(), rows, ins.value); break;
            case NodeKind::variable: {
                const auto& col = columns[ins.index - 1];
                std::copy_n(col.begin(), rows, stack_[top++].begin());
                break;
            }
            case NodeKind::unary: {
                double* a = stack_[top - 1].data();
                const auto op = static_cast<UnaryOp>(ins.op);
                for (std::size_t r = 0; r < rows; ++r) a[r] = apply_unary(op, a[r]);
                break;
            }
            case NodeKind::binary: {
                double* a = stack_[top - 2].data();
                const double* b = stack_[top - 1].data();
                const auto op = static_cast<BinaryOp>(ins.op);
                switch (op) {
                    case BinaryOp::add:
                        for (std::size_t r = 0; r < rows; ++r) a[r] = a[r] + b[r];
                        break;
                    case BinaryOp::sub:
                        for (std::size_t r = 0; r < rows; ++r) a[r] = a[r] - b[r];
                        break;
                    case BinaryOp::mul:
                        for (std::size_t r = 0; r < rows; ++r) a[r] = a[r] * b[r];
                        break;
                    default:
                        for (std::size_t r = 0; r < rows; ++r) a[r] = apply_binary(op, a[r], b[r]);
                        break;
                }
                --top;
                break;
            }
        }
    }
    // The unguarded +,-,* loops may leave an infinity behind; every guarded
    // kernel rejects non-finite input, so it can only surface here.
    const double* res = stack_[0].data();
    for (std::size_t r = 0; r < rows; ++r) out[r] = std::isfinite(res[r]) ? res[r] : kNaN;
}

}  // namespace lmsr::expr
