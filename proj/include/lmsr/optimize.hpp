// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lmsr/data.hpp"
#include "lmsr/expr.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lmsr::optimize {

struct SimplexCoefficients {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
};

struct FitConfig {
    int hops = 25;
    double step_scale = 1.0;
    SimplexCoefficients simplex;
    int max_evals = 10000;  // per local solve
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int refits = 1;
    std::size_t max_constants = 10;
    unsigned workers = 1;  // threads used by repeat_fit

    /// Throws invalid_argument when a field is out of range.
    void validate() const;
};

struct FitResult {
    std::vector<double> params;
    double mse = 0.0;
    double mae = 0.0;
    long evals = 0;
    bool converged = false;
    int refit = 0;  // which repeat produced this result
};

using Objective = std::function<double(std::span<const double>)>;

struct Minimum {
    std::vector<double> x;
    double value = 0.0;
    long evals = 0;
    bool converged = false;
};

/// Local simplex minimization. Non-finite objective values are treated as +inf.
Minimum nelder_mead(const Objective& f, std::span<const double> x0, const FitConfig& cfg);

/// Nelder-Mead from x0, then cfg.hops rounds of Gaussian perturbation of the
/// incumbent (scaled by cfg.step_scale) and local re-minimization, keeping a
/// hop only when it is strictly better.
Minimum basin_hopping(const Objective& f, std::span<const double> x0, const FitConfig& cfg);

/// Seed used by repeat number k (k = 0 is cfg.seed itself).
std::uint64_t refit_seed(std::uint64_t seed, int k);

/// Mean squared / absolute residuals over every row; +inf when any row is undefined.
struct Errors {
    double mse;
    double mae;
};
Errors residual_errors(const expr::Expression& e, const data::Dataset& d, std::span<const double> params);

/// Throws too_many_constants, invalid_argument (variables beyond the dataset)
/// or no_finite_objective.
FitResult fit(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg);
/// Same with an explicit starting point instead of e.initial_guess().
FitResult fit(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg,
              std::span<const double> initial);

/// cfg.refits independent fits; lowest MAE wins, then lowest MSE, then lowest
/// repeat index. no_finite_objective only when every repeat fails.
FitResult repeat_fit(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg);

}  // namespace lmsr::optimize
