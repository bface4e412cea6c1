// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lmsr/pareto.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace lmsr::testing {

inline bool dominates(const pareto::Candidate& a, const pareto::Candidate& b) {
    return a.complexity <= b.complexity && a.mse <= b.mse && (a.complexity < b.complexity || a.mse < b.mse);
}

/// Brute-force front: every pair compared; among exact (complexity, mse) ties
/// the earliest-born (then earliest position) survives. Indices by ascending
/// complexity.
inline std::vector<std::size_t> brute_front(const std::vector<pareto::Candidate>& c) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!std::isfinite(c[i].mse)) continue;
        bool keep = true;
        for (std::size_t j = 0; j < c.size() && keep; ++j) {
            if (i == j || !std::isfinite(c[j].mse)) continue;
            if (dominates(c[j], c[i])) keep = false;
            const bool tie = c[j].complexity == c[i].complexity && c[j].mse == c[i].mse;
            if (tie && (c[j].iteration_born < c[i].iteration_born ||
                        (c[j].iteration_born == c[i].iteration_born && j < i)))
                keep = false;
        }
        if (keep) out.push_back(i);
    }
    std::stable_sort(out.begin(), out.end(), [&](auto a, auto b) { return c[a].complexity < c[b].complexity; });
    return out;
}

/// Random candidates with small value ranges so ties and infinities occur.
inline std::vector<pareto::Candidate> random_candidates(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> cx(1, 15), it(0, 10), mse(0, 20), inf(0, 19);
    std::vector<pareto::Candidate> out;
    for (std::size_t i = 0; i < n; ++i) {
        pareto::Candidate c;
        c.expr = expr::Expression(expr::make_variable(1));
        c.complexity = static_cast<std::size_t>(cx(rng));
        c.mse = inf(rng) == 0 ? std::numeric_limits<double>::infinity() : 0.05 * mse(rng);
        c.mae = c.mse;
        c.iteration_born = it(rng);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace lmsr::testing
