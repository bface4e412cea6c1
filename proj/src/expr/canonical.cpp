// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

// Canonical form for SR-similarity. Every constant occurrence is treated as an
// independent free parameter, so the rewrites below only need to preserve the
// family of functions reachable by refitting:
//
//   * a variable-free subtree collapses to one constant (numeric exponents stay);
//   * sums and products are flattened; constant terms of a sum fold into one,
//     constant factors of a product (numerator or denominator) fold into one
//     numerator constant, and a term or product carrying a constant absorbs
//     its sign (so x - c == x + c);
//   * c*(k + t) distributes to k + c*t;
//   * a sum used as a factor whose non-constant terms all carry a coefficient
//     gives up the first coefficient to the enclosing product
//     (x/(c1 + c2*x) == c*x/(k + x));
//   * operands of + and * are sorted by a shape order that ignores constant
//     indices, then constants are re-indexed left to right.
//
// None of these rewrites adds nodes, and passes repeat to a fixed point.

#include "lmsr/expr.hpp"

#include <algorithm>
#include <stdexcept>

namespace lmsr::expr {

namespace {

int rank(NodeKind k) {
    switch (k) {
        case NodeKind::constant: return 0;
        case NodeKind::number: return 1;
        case NodeKind::variable: return 2;
        case NodeKind::unary: return 3;
        case NodeKind::binary: return 4;
    }
    return 5;
}

int compare_shape(const Node& a, const Node& b) {
    if (a.kind != b.kind) return rank(a.kind) < rank(b.kind) ? -1 : 1;
    switch (a.kind) {
        case NodeKind::constant: return 0;
        case NodeKind::number: return a.value < b.value ? -1 : (b.value < a.value ? 1 : 0);
        case NodeKind::variable: return a.index < b.index ? -1 : (a.index > b.index ? 1 : 0);
        case NodeKind::unary:
            if (a.op != b.op) return a.op < b.op ? -1 : 1;
            return compare_shape(*a.lhs, *b.lhs);
        case NodeKind::binary: {
            if (a.op != b.op) return a.op < b.op ? -1 : 1;
            int c = compare_shape(*a.lhs, *b.lhs);
            return c != 0 ? c : compare_shape(*a.rhs, *b.rhs);
        }
    }
    return 0;
}

bool shape_less(const NodePtr& a, const NodePtr& b) { return compare_shape(*a, *b) < 0; }

bool has_variable(const Node& n) {
    switch (n.kind) {
        case NodeKind::variable: return true;
        case NodeKind::unary: return has_variable(*n.lhs);
        case NodeKind::binary: return has_variable(*n.lhs) || has_variable(*n.rhs);
        default: return false;
    }
}

bool is_sum(const Node& n) { return n.is_binary(BinaryOp::add) || n.is_binary(BinaryOp::sub); }
bool is_product(const Node& n) { return n.is_binary(BinaryOp::mul) || n.is_binary(BinaryOp::div); }

// Leftmost numerator leaf of a canonical product; constants sort first.
const Node& leading_factor(const Node& n) {
    const Node* p = &n;
    if (p->is_binary(BinaryOp::div)) p = p->lhs.get();
    while (p->is_binary(BinaryOp::mul)) p = p->lhs.get();
    return *p;
}

bool has_constant_factor(const Node& n) { return is_product(n) && leading_factor(n).is(NodeKind::constant); }

struct Signed {
    bool negative;
    NodePtr node;
};

class Canonicalizer {
public:
    NodePtr run(const NodePtr& n) { return norm(n); }

private:
    std::uint32_t next_ = 0;

    NodePtr fresh() { return make_constant(++next_); }

    NodePtr norm(const NodePtr& n) {
        if (!has_variable(*n)) return n->is(NodeKind::number) ? n : fresh();
        switch (n->kind) {
            case NodeKind::variable: return n;
            case NodeKind::unary:
                if (n->unary_op() == UnaryOp::neg) return sum_of(n);
                return make_unary(n->unary_op(), norm(n->lhs));
            case NodeKind::binary:
                switch (n->binary_op()) {
                    case BinaryOp::add:
                    case BinaryOp::sub: return sum_of(n);
                    case BinaryOp::mul:
                    case BinaryOp::div: return product_of(n);
                    case BinaryOp::pow: return make_binary(BinaryOp::pow, norm(n->lhs), norm(n->rhs));
                }
                return n;
            default: return n;
        }
    }

    // Raw flattening; the pieces are normalized afterwards.
    static void flatten_sum(const NodePtr& n, bool negative, std::vector<Signed>& out) {
        if (n->is_binary(BinaryOp::add)) {
            flatten_sum(n->lhs, negative, out);
            flatten_sum(n->rhs, negative, out);
        } else if (n->is_binary(BinaryOp::sub)) {
            flatten_sum(n->lhs, negative, out);
            flatten_sum(n->rhs, !negative, out);
        } else if (n->is_unary(UnaryOp::neg)) {
            flatten_sum(n->lhs, !negative, out);
        } else {
            out.push_back({negative, n});
        }
    }

    static void flatten_product(const NodePtr& n, bool in_denominator, bool& negative, std::vector<NodePtr>& nums,
                                std::vector<NodePtr>& dens) {
        if (n->is_binary(BinaryOp::mul)) {
            flatten_product(n->lhs, in_denominator, negative, nums, dens);
            flatten_product(n->rhs, in_denominator, negative, nums, dens);
        } else if (n->is_binary(BinaryOp::div)) {
            flatten_product(n->lhs, in_denominator, negative, nums, dens);
            flatten_product(n->rhs, !in_denominator, negative, nums, dens);
        } else if (n->is_unary(UnaryOp::neg)) {
            negative = !negative;
            flatten_product(n->lhs, in_denominator, negative, nums, dens);
        } else {
            (in_denominator ? dens : nums).push_back(n);
        }
    }

    NodePtr sum_of(const NodePtr& n) {
        std::vector<Signed> raw;
        flatten_sum(n, false, raw);
        for (auto& t : raw) t.node = norm(t.node);
        return build_sum(std::move(raw));
    }

    NodePtr product_of(const NodePtr& n) {
        bool negative = false;
        std::vector<NodePtr> nums, dens;
        flatten_product(n, false, negative, nums, dens);
        for (auto& f : nums) f = norm(f);
        for (auto& f : dens) f = norm(f);
        return build_product(negative, std::move(nums), std::move(dens));
    }

    // Terms are canonical; sums and negations among them are split again.
    NodePtr build_sum(std::vector<Signed> terms) {
        std::vector<Signed> flat;
        bool has_const = false;
        while (!terms.empty()) {
            Signed t = terms.back();
            terms.pop_back();
            const Node& node = *t.node;
            if (node.is_binary(BinaryOp::add)) {
                terms.push_back({t.negative, node.lhs});
                terms.push_back({t.negative, node.rhs});
            } else if (node.is_binary(BinaryOp::sub)) {
                terms.push_back({t.negative, node.lhs});
                terms.push_back({!t.negative, node.rhs});
            } else if (node.is_unary(UnaryOp::neg)) {
                terms.push_back({!t.negative, node.lhs});
            } else if (node.is(NodeKind::constant)) {
                has_const = true;
            } else {
                if (has_constant_factor(node)) t.negative = false;
                flat.push_back(t);
            }
        }
        if (has_const) flat.push_back({false, fresh()});
        if (flat.empty()) return fresh();
        if (flat.size() == 1) return flat[0].negative ? make_unary(UnaryOp::neg, flat[0].node) : flat[0].node;

        std::vector<NodePtr> pos, neg;
        for (auto& t : flat) (t.negative ? neg : pos).push_back(t.node);
        std::stable_sort(pos.begin(), pos.end(), shape_less);
        std::stable_sort(neg.begin(), neg.end(), shape_less);

        NodePtr acc;
        std::size_t k = 0;
        if (!pos.empty()) {
            acc = pos[0];
            for (std::size_t i = 1; i < pos.size(); ++i) acc = make_binary(BinaryOp::add, acc, pos[i]);
        } else {
            acc = make_unary(UnaryOp::neg, neg[0]);
            k = 1;
        }
        for (; k < neg.size(); ++k) acc = make_binary(BinaryOp::sub, acc, neg[k]);
        return acc;
    }

    // Drops the coefficient of the first term of `sum` if every non-constant
    // term carries one. Returns nullptr when the rule does not apply.
    NodePtr factor_out_coefficient(const NodePtr& sum) {
        std::vector<Signed> terms;
        flatten_sum(sum, false, terms);
        const Signed* first = nullptr;
        for (const auto& t : terms) {
            if (t.node->is(NodeKind::constant)) continue;
            if (!has_constant_factor(*t.node)) return nullptr;
            if (!first) first = &t;
        }
        if (!first) return nullptr;
        bool negative = false;
        std::vector<NodePtr> nums, dens;
        flatten_product(first->node, false, negative, nums, dens);
        if (nums.size() < 2) return nullptr;  // c/t would need a literal 1
        nums.erase(nums.begin());
        NodePtr stripped = build_product(false, std::move(nums), std::move(dens));
        std::vector<Signed> rebuilt;
        for (const auto& t : terms) rebuilt.push_back(&t == first ? Signed{false, stripped} : t);
        return build_sum(std::move(rebuilt));
    }

    // Factors are canonical; nested products are split again.
    NodePtr build_product(bool negative, std::vector<NodePtr> nums_in, std::vector<NodePtr> dens_in) {
        std::vector<NodePtr> nums, dens;
        for (auto& f : nums_in) flatten_product(f, false, negative, nums, dens);
        for (auto& f : dens_in) flatten_product(f, true, negative, nums, dens);

        bool has_const = false;
        auto strip_constants = [&](std::vector<NodePtr>& v) {
            auto it = std::remove_if(v.begin(), v.end(), [](const NodePtr& f) { return f->is(NodeKind::constant); });
            if (it != v.end()) has_const = true;
            v.erase(it, v.end());
        };
        strip_constants(nums);
        strip_constants(dens);
        if (nums.empty() && dens.empty()) return fresh();

        for (auto* side : {&nums, &dens}) {
            for (auto& f : *side) {
                if (!is_sum(*f)) continue;
                if (auto reduced = factor_out_coefficient(f)) {
                    f = reduced;
                    has_const = true;
                }
            }
        }

        if (has_const && dens.empty() && nums.size() == 1 && is_sum(*nums[0])) {
            std::vector<Signed> terms;
            flatten_sum(nums[0], false, terms);
            if (terms.size() == 2 && (terms[0].node->is(NodeKind::constant) != terms[1].node->is(NodeKind::constant))) {
                const Signed& other = terms[0].node->is(NodeKind::constant) ? terms[1] : terms[0];
                NodePtr scaled = build_product(false, {fresh(), other.node}, {});
                return build_sum({{false, fresh()}, {false, scaled}});
            }
        }

        if (has_const) {
            negative = false;
            nums.push_back(fresh());
        }
        if (nums.empty()) throw std::logic_error("canonical product without numerator");
        std::stable_sort(nums.begin(), nums.end(), shape_less);
        std::stable_sort(dens.begin(), dens.end(), shape_less);

        if (nums.size() == 1 && dens.empty()) {
            if (!negative) return nums[0];
            if (is_sum(*nums[0])) return build_sum({{true, nums[0]}});
            return make_unary(UnaryOp::neg, nums[0]);
        }
        NodePtr num = nums[0];
        for (std::size_t i = 1; i < nums.size(); ++i) num = make_binary(BinaryOp::mul, num, nums[i]);
        NodePtr out = num;
        if (!dens.empty()) {
            NodePtr den = dens[0];
            for (std::size_t i = 1; i < dens.size(); ++i) den = make_binary(BinaryOp::mul, den, dens[i]);
            out = make_binary(BinaryOp::div, num, den);
        }
        return negative ? make_unary(UnaryOp::neg, out) : out;
    }
};

}  // namespace

Expression canonicalize(const Expression& e) {
    if (!e.valid()) return e;
    Expression current(Canonicalizer().run(e.root_ptr()));
    for (int pass = 0; pass < 16; ++pass) {
        Expression next(Canonicalizer().run(current.root_ptr()));
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

bool sr_equivalent(const Expression& a, const Expression& b) {
    if (!a.valid() || !b.valid()) return false;
    return canonicalize(a) == canonicalize(b);
}

}  // namespace lmsr::expr
