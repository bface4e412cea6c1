// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lmsr/expr.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lmsr::pareto {

struct Candidate {
    expr::Expression expr;
    expr::Expression canonical;
    std::vector<double> params;
    double mse = 0.0;  // +inf when unfittable
    double mae = 0.0;
    std::size_t complexity = 0;
    int iteration_born = 0;

    /// Fills canonical and complexity from `e`.
    static Candidate make(expr::Expression e, std::vector<double> params, double mse, double mae, int iteration);
};

enum class InsertOutcome { appended, replaced, kept_incumbent };

/// At most one candidate per canonical form; an SR-similar insert keeps the
/// lower MSE (the incumbent on ties) in the incumbent's slot.
class Store {
public:
    InsertOutcome insert(Candidate c);

    [[nodiscard]] const std::vector<Candidate>& candidates() const { return items_; }
    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    /// Index of the candidate SR-similar to `e`, or npos.
    [[nodiscard]] std::size_t find(const expr::Expression& e) const;

    /// Header "equation,complexity,mse,mae,iteration", one row per candidate.
    [[nodiscard]] std::string to_csv() const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<Candidate> items_;
    std::unordered_map<std::string, std::size_t> by_canonical_;
};

/// Non-dominated finite-MSE candidates by ascending complexity. Exact ties on
/// (complexity, mse) keep the earliest-born candidate only.
std::vector<Candidate> pareto_front(std::span<const Candidate> cands);
inline std::vector<Candidate> pareto_front(const Store& s) { return pareto_front(s.candidates()); }

struct FeedbackPolicy {
    enum class Kind { standard, top_k };
    Kind kind = Kind::standard;
    std::size_t min_count = 6;  // standard
    std::size_t recent = 2;     // standard: newest non-selected candidates added on top
    std::size_t k = 5;          // top_k
    bool include_params = false;

    static FeedbackPolicy standard(std::size_t min_count = 6);
    static FeedbackPolicy top_k(std::size_t k = 5, bool include_params = false);
    void validate() const;
};

/// Candidates for the next prompt, ordered by descending MSE (best last).
/// Infinite-MSE candidates are never selected.
std::vector<Candidate> select_feedback(const Store& s, const FeedbackPolicy& policy);

/// Rounds to 6 significant digits.
double round_sig6(double v);

/// [{"equation":..., "complexity":..., "mse":..., "params":[...]}]
std::string to_feedback_json(std::span<const Candidate> cands, bool include_params);

}  // namespace lmsr::pareto
