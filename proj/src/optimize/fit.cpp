// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/optimize.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <thread>

namespace lmsr::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Column-wise residuals over the full dataset. Owns a compiled program, so one
// instance per thread.
class Residuals {
public:
    Residuals(const expr::Expression& e, const data::Dataset& d)
        : program_(e), columns_(d.input_views()), y_(d.output()), pred_(d.row_count()) {}

    Errors errors(std::span<const double> params) {
        program_.evaluate(params, columns_, pred_);
        double sq = 0.0, abs = 0.0;
        for (std::size_t r = 0; r < pred_.size(); ++r) {
            const double res = y_[r] - pred_[r];
            sq += res * res;
            abs += std::fabs(res);
        }
        const double n = static_cast<double>(pred_.size());
        if (!std::isfinite(sq) || !std::isfinite(abs)) return {kInf, kInf};
        return {sq / n, abs / n};
    }

    double mse(std::span<const double> params) {
        program_.evaluate(params, columns_, pred_);
        double sq = 0.0;
        for (std::size_t r = 0; r < pred_.size(); ++r) {
            const double res = y_[r] - pred_[r];
            sq += res * res;
        }
        // NaN rows propagate into the sum.
        return std::isfinite(sq) ? sq / static_cast<double>(pred_.size()) : kInf;
    }

private:
    expr::CompiledExpression program_;
    std::vector<std::span<const double>> columns_;
    std::span<const double> y_;
    std::vector<double> pred_;
};

void check_fittable(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg) {
    if (!e.valid()) throw Error(Errc::invalid_argument, "cannot fit an empty expression");
    if (d.row_count() == 0) throw Error(Errc::invalid_argument, "cannot fit to an empty dataset");
    if (e.max_variable() > d.input_count()) {
        throw Error(Errc::invalid_argument, "expression references x" + std::to_string(e.max_variable()) +
                                                " but the dataset has " + std::to_string(d.input_count()) +
                                                " variables");
    }
    if (e.constant_count() > cfg.max_constants) {
        throw Error(Errc::too_many_constants, "expression has " + std::to_string(e.constant_count()) +
                                                  " constants, the limit is " + std::to_string(cfg.max_constants));
    }
}

FitResult fit_unchecked(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg,
                        std::span<const double> initial) {
    Residuals res(e, d);
    Minimum m = basin_hopping([&res](std::span<const double> p) { return res.mse(p); }, initial, cfg);
    if (!std::isfinite(m.value)) {
        throw Error(Errc::no_finite_objective, "no parameter vector gave a finite loss for " + expr::render(e));
    }
    const Errors err = res.errors(m.x);
    FitResult out;
    out.params = std::move(m.x);
    out.mse = err.mse;
    out.mae = err.mae;
    out.evals = m.evals;
    out.converged = m.converged;
    return out;
}

}  // namespace

Errors residual_errors(const expr::Expression& e, const data::Dataset& d, std::span<const double> params) {
    if (e.max_variable() > d.input_count()) throw Error(Errc::invalid_argument, "expression uses unknown variables");
    return Residuals(e, d).errors(params);
}

FitResult fit(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg) {
    return fit(e, d, cfg, e.valid() ? e.initial_guess() : std::span<const double>{});
}

FitResult fit(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg,
              std::span<const double> initial) {
    cfg.validate();
    check_fittable(e, d, cfg);
    if (initial.size() != e.constant_count()) {
        throw Error(Errc::arity_mismatch, "initial guess has " + std::to_string(initial.size()) + " values, expected " +
                                              std::to_string(e.constant_count()));
    }
    return fit_unchecked(e, d, cfg, initial);
}

FitResult repeat_fit(const expr::Expression& e, const data::Dataset& d, const FitConfig& cfg) {
    cfg.validate();
    check_fittable(e, d, cfg);
    const auto n = static_cast<std::size_t>(cfg.refits);
    std::vector<std::optional<FitResult>> results(n);

    auto run_one = [&](std::size_t k) {
        FitConfig one = cfg;
        one.seed = refit_seed(cfg.seed, static_cast<int>(k));
        try {
            results[k] = fit_unchecked(e, d, one, e.initial_guess());
            results[k]->refit = static_cast<int>(k);
        } catch (const Error& err) {
            if (err.code() != Errc::no_finite_objective) throw;
        }
    };

    const unsigned workers = std::min<unsigned>(cfg.workers, static_cast<unsigned>(n));
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) run_one(k);
    } else {
        // Strided assignment; the merge below is independent of finishing order.
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t k = w; k < n; k += workers) run_one(k);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& ep : errors)
            if (ep) std::rethrow_exception(ep);
    }

    const FitResult* best = nullptr;
    for (const auto& r : results) {
        if (!r) continue;
        if (!best || r->mae < best->mae || (r->mae == best->mae && r->mse < best->mse)) best = &*r;
    }
    if (!best) {
        throw Error(Errc::no_finite_objective,
                    "no repeat produced a finite loss for " + expr::render(e));
    }
    return *best;
}

}  // namespace lmsr::optimize
