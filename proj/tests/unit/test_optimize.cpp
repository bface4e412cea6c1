// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/optimize.hpp"

#include "../support/gen.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace lmsr;
using namespace lmsr::optimize;

namespace {

data::Dataset xy(std::vector<double> x, std::vector<double> y) {
    return data::Dataset("t", {"x1"}, {std::move(x)}, std::move(y));
}

expr::Expression infix(const std::string& s, std::vector<std::string> vars = {"x1"}) {
    return expr::parse(s, expr::Dialect::infix, vars);
}

double rosenbrock(double a, double b) { return (1 - a) * (1 - a) + 100 * (b - a * a) * (b - a * a); }

}  // namespace

TEST_CASE("exact linear fit") {
    auto r = fit(infix("c1*x1"), xy({1, 2, 3}, {2, 4, 6}), {});
    REQUIRE(r.params.size() == 1);
    CHECK(r.params[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.mse <= 1e-12);
}

TEST_CASE("a lone constant fits the mean") {
    auto r = fit(infix("c1"), xy({0, 0, 0}, {1, 2, 3}), {});
    CHECK(r.params[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.mse == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(r.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("nelder-mead minimizes a shifted quadratic") {
    FitConfig cfg;
    auto m = nelder_mead([](std::span<const double> x) { return (x[0] - 3) * (x[0] - 3) + 4 * (x[1] + 1) * (x[1] + 1); },
                         std::vector{0.0, 0.0}, cfg);
    CHECK(m.converged);
    CHECK(m.x[0] == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(m.x[1] == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("basin hopping solves rosenbrock from the classic start") {
    FitConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        auto m = basin_hopping([](std::span<const double> x) { return rosenbrock(x[0], x[1]); },
                               std::vector{-1.2, 1.0}, cfg);
        CHECK(m.value < 1e-6);
    }
}

TEST_CASE("config validation") {
    FitConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.simplex.expansion = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.refits = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.simplex.shrink = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("fit errors") {
    auto d = xy({1, 2, 3}, {1, 2, 3});
    try {
        fit(infix("sqrt(-exp(c1*x1))"), d, {});
        FAIL("expected no_finite_objective");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_finite_objective);
    }
    std::string many = "c1";
    for (int i = 2; i <= 11; ++i) many += "+c" + std::to_string(i) + "*x1";
    try {
        fit(infix(many), d, {});
        FAIL("expected too_many_constants");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::too_many_constants);
    }
    CHECK_THROWS_AS(fit(infix("c1*x2", {"x1", "x2"}), d, {}), Error);
}

TEST_CASE("fit is monotone and deterministic") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 4.0);
    std::vector<double> x(20), y(20);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = u(rng);
        y[i] = 1.7 * x[i] / (0.8 + x[i]) + 0.05 * u(rng);
    }
    auto d = xy(x, y);
    FitConfig cfg;
    cfg.hops = 3;
    int fitted = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        testing::TreeGen gen(seed + 900);
        gen.max_depth = 3;
        auto e = gen.expression();
        if (e.constant_count() == 0) continue;
        const auto at_start = residual_errors(e, d, e.initial_guess());
        try {
            cfg.seed = seed;
            auto a = fit(e, d, cfg);
            auto b = fit(e, d, cfg);
            INFO(expr::render(e));
            if (std::isfinite(at_start.mse)) CHECK(a.mse <= at_start.mse);
            CHECK(a.params == b.params);
            CHECK(a.mse == b.mse);
            CHECK(a.evals == b.evals);
            ++fitted;
        } catch (const Error& err) {
            CHECK(err.code() == Errc::no_finite_objective);
        }
    }
    CHECK(fitted > 20);
}

TEST_CASE("repeat_fit selects the lowest MAE") {
    auto d = xy({0.5, 1, 1.5, 2, 3, 4, 5, 6}, {0.9, 1.3, 1.2, 0.4, -0.6, -1.1, 0.2, 0.8});
    auto e = infix("c1*exp(c2*x1)*x1+c3");
    FitConfig cfg;
    cfg.hops = 4;
    cfg.seed = 17;

    cfg.refits = 1;
    auto single = fit(e, d, cfg);
    auto one = repeat_fit(e, d, cfg);
    CHECK(one.params == single.params);
    CHECK(one.mae == single.mae);

    cfg.refits = 6;
    auto many = repeat_fit(e, d, cfg);
    double prefix_best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.refits; ++k) {
        FitConfig c = cfg;
        c.seed = refit_seed(cfg.seed, k);
        auto r = fit(e, d, c);
        CHECK(many.mae <= r.mae);
        prefix_best = std::min(prefix_best, r.mae);
        FitConfig prefix = cfg;
        prefix.refits = k + 1;
        CHECK(repeat_fit(e, d, prefix).mae == prefix_best);
    }

    cfg.workers = 3;
    auto threaded = repeat_fit(e, d, cfg);
    CHECK(threaded.params == many.params);
    CHECK(threaded.refit == many.refit);
}

TEST_CASE("refit seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (int k = 0; k < 100; ++k) seen.insert(refit_seed(42, k));
    CHECK(seen.size() == 100);
    CHECK(refit_seed(42, 0) == 42);
}
