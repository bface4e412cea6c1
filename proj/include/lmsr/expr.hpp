// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lmsr::expr {

enum class UnaryOp : std::uint8_t { sqrt, log, exp, square, cube, neg };
enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };

// `number` only ever appears as a fixed exponent (x1^1.5); every other literal
// the model writes becomes a fitted constant.
enum class NodeKind : std::uint8_t { constant, number, variable, unary, binary };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind = NodeKind::constant;
    std::uint8_t op = 0;
    std::uint32_t index = 0;  // 1-based constant or variable index
    double value = 0.0;
    NodePtr lhs;
    NodePtr rhs;

    [[nodiscard]] UnaryOp unary_op() const { return static_cast<UnaryOp>(op); }
    [[nodiscard]] BinaryOp binary_op() const { return static_cast<BinaryOp>(op); }
    [[nodiscard]] bool is(NodeKind k) const { return kind == k; }
    [[nodiscard]] bool is_unary(UnaryOp u) const { return kind == NodeKind::unary && unary_op() == u; }
    [[nodiscard]] bool is_binary(BinaryOp b) const { return kind == NodeKind::binary && binary_op() == b; }
};

NodePtr make_constant(std::uint32_t index);
NodePtr make_number(double value);
NodePtr make_variable(std::uint32_t index);
NodePtr make_unary(UnaryOp op, NodePtr child);
NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs);

[[nodiscard]] bool structurally_equal(const Node& a, const Node& b);

std::string_view op_symbol(UnaryOp op);
std::string_view op_symbol(BinaryOp op);

/// Immutable expression tree. Constants are always indexed c1..cK in
/// left-to-right order of first appearance; construction re-indexes as needed
/// and carries the per-constant initial guesses along.
class Expression {
public:
    Expression() = default;
    explicit Expression(NodePtr root, std::vector<double> initial = {});

    [[nodiscard]] const Node& root() const { return *root_; }
    [[nodiscard]] const NodePtr& root_ptr() const { return root_; }
    [[nodiscard]] bool valid() const { return root_ != nullptr; }

    [[nodiscard]] std::size_t constant_count() const { return initial_.size(); }
    /// Starting point for fitting: 1.0, or the literal the constant was born from.
    [[nodiscard]] std::span<const double> initial_guess() const { return initial_; }

    /// Highest variable index referenced (0 when the tree has no variables).
    [[nodiscard]] std::uint32_t max_variable() const { return max_variable_; }
    [[nodiscard]] std::vector<std::uint32_t> variables() const;

    friend bool operator==(const Expression& a, const Expression& b);

private:
    NodePtr root_;
    std::vector<double> initial_;
    std::uint32_t max_variable_ = 0;
};

enum class Dialect : std::uint8_t { latex_lite, infix };

std::optional<Dialect> dialect_from_string(std::string_view name);
std::string_view to_string(Dialect d);

struct ParseOptions {
    /// Name of the dependent variable; a leading "y =" is accepted and stripped.
    std::string dependent = "y";
    /// Extra spellings that resolve to a variable index (e.g. "x" -> 1).
    std::vector<std::pair<std::string, std::uint32_t>> aliases;
};

/// Parses a model-proposed expression. Throws Error with code syntax,
/// unknown_operator or implicit_form.
Expression parse(std::string_view text, Dialect dialect, std::span<const std::string> vars,
                 const ParseOptions& options = {});

/// Infix rendering; `names` defaults to x1..xn.
std::string render(const Expression& e, std::span<const std::string> names = {});
std::string render(const Node& n, std::span<const std::string> names = {});

/// Total node count.
std::size_t complexity(const Expression& e);
std::size_t complexity(const Node& n);

/// Tree-walk evaluation with protected semantics: a domain error or a
/// non-finite intermediate yields std::nullopt. Throws arity_mismatch when
/// `params` does not match the constant count.
std::optional<double> evaluate(const Expression& e, std::span<const double> params,
                               std::span<const double> x);

Expression canonicalize(const Expression& e);
bool sr_equivalent(const Expression& a, const Expression& b);

/// Postfix program evaluated column-wise over a whole dataset. Results follow
/// the same protected semantics as evaluate(): undefined rows come out NaN.
class CompiledExpression {
public:
    explicit CompiledExpression(const Expression& e);

    [[nodiscard]] std::size_t constant_count() const { return constant_count_; }

    /// `columns[v]` holds variable v+1 for every row; `out` has one slot per row.
    void evaluate(std::span<const double> params, std::span<const std::span<const double>> columns,
                  std::span<double> out) const;

private:
    struct Instr {
        NodeKind kind;
        std::uint8_t op;
        std::uint32_t index;
        double value;
    };
    std::vector<Instr> code_;
    std::size_t constant_count_ = 0;
    std::size_t max_depth_ = 0;
    mutable std::vector<std::vector<double>> stack_;
};

struct OperatorSet {
    std::string name;
    std::set<BinaryOp> binary;
    std::set<UnaryOp> unary;

    /// + - * / plus dataset-specific additions.
    static OperatorSet easy(std::span<const std::string> extras = {});
    /// easy plus sqrt, log, exp, square, cube.
    static OperatorSet hard(std::span<const std::string> extras = {});

    void add(std::string_view token);
    [[nodiscard]] bool contains(BinaryOp op) const { return binary.count(op) != 0; }
    [[nodiscard]] bool contains(UnaryOp op) const { return op == UnaryOp::neg || unary.count(op) != 0; }
    /// Operators in display order, e.g. {"+", "-", "*", "/", "sqrt"}.
    [[nodiscard]] std::vector<std::string> tokens() const;
};

/// Throws operator_not_allowed naming the first offending operator. Without
/// "^" in the set, pow is accepted only with a fixed numeric exponent.
void validate_operators(const Expression& e, const OperatorSet& ops);

/// Throws missing_variable unless every index in 1..n_vars appears in `e`, and
/// invalid_argument if `e` references an index beyond n_vars.
void validate_variables(const Expression& e, std::uint32_t n_vars);

}  // namespace lmsr::expr
