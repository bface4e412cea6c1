// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/error.hpp"
#include "lmsr/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace lmsr::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double call(const Objective& f, std::span<const double> x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

// Box-Muller over raw engine output; std::normal_distribution is not
// reproducible across standard libraries.
double standard_normal(std::mt19937_64& rng) {
    const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

}  // namespace

void FitConfig::validate() const {
    auto fail = [](const char* what) { throw Error(Errc::invalid_argument, std::string("fit config: ") + what); };
    if (hops < 0) fail("hops must be >= 0");
    if (!(step_scale > 0.0)) fail("step_scale must be > 0");
    if (!(simplex.reflection > 0.0)) fail("reflection must be > 0");
    if (!(simplex.expansion > 1.0)) fail("expansion must be > 1");
    if (!(simplex.contraction > 0.0 && simplex.contraction < 1.0)) fail("contraction must be in (0, 1)");
    if (!(simplex.shrink > 0.0 && simplex.shrink < 1.0)) fail("shrink must be in (0, 1)");
    if (max_evals < 1) fail("max_evals must be >= 1");
    if (!(tol > 0.0)) fail("tol must be > 0");
    if (refits < 1) fail("refits must be >= 1");
    if (workers < 1) fail("workers must be >= 1");
}

Minimum nelder_mead(const Objective& f, std::span<const double> x0, const FitConfig& cfg) {
    const std::size_t n = x0.size();
    Minimum out;
    out.x.assign(x0.begin(), x0.end());
    out.value = call(f, x0);
    out.evals = 1;
    if (n == 0) {
        out.converged = true;
        return out;
    }
    if (!std::isfinite(out.value)) return out;

    const auto& k = cfg.simplex;
    std::vector<std::vector<double>> pts(n + 1, out.x);
    std::vector<double> fv(n + 1, out.value);
    for (std::size_t i = 0; i < n; ++i) {
        auto& p = pts[i + 1];
        p[i] = p[i] != 0.0 ? 1.05 * p[i] : 0.00025;
        fv[i + 1] = call(f, p);
        ++out.evals;
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto along = [&](std::vector<double>& dst, const std::vector<double>& from, double t) {
        for (std::size_t j = 0; j < n; ++j) dst[j] = centroid[j] + t * (from[j] - centroid[j]);
    };

    while (out.evals < cfg.max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double fspread = 0.0, xspread = 0.0, xscale = 1.0;
        for (std::size_t j = 0; j < n; ++j) xscale = std::max(xscale, std::fabs(pts[best][j]));
        for (std::size_t i : order) {
            fspread = std::max(fspread, fv[i] - fv[best]);
            for (std::size_t j = 0; j < n; ++j) xspread = std::max(xspread, std::fabs(pts[i][j] - pts[best][j]));
        }
        if (fspread <= cfg.tol * std::max(1.0, std::fabs(fv[best])) && xspread <= cfg.tol * xscale) {
            out.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i : order)
            if (i != worst)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);

        along(xr, pts[worst], -k.reflection);
        const double fr = call(f, xr);
        ++out.evals;
        if (fr < fv[best]) {
            along(xe, pts[worst], -k.reflection * k.expansion);
            const double fe = call(f, xe);
            ++out.evals;
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        bool shrink = false;
        if (fr < fv[worst]) {
            along(xc, pts[worst], -k.reflection * k.contraction);
            const double fc = call(f, xc);
            ++out.evals;
            if (fc <= fr) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                shrink = true;
            }
        } else {
            along(xc, pts[worst], k.contraction);
            const double fc = call(f, xc);
            ++out.evals;
            if (fc < fv[worst]) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i : order) {
                if (i == best) continue;
                for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + k.shrink * (pts[i][j] - pts[best][j]);
                fv[i] = call(f, pts[i]);
                ++out.evals;
            }
        }
    }

    // The best vertex never gets worse, so this is at most f(x0).
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    out.x = pts[best];
    out.value = fv[best];
    return out;
}

Minimum basin_hopping(const Objective& f, std::span<const double> x0, const FitConfig& cfg) {
    Minimum best = nelder_mead(f, x0, cfg);
    if (x0.empty()) return best;
    std::mt19937_64 rng(cfg.seed);
    std::vector<double> trial(x0.size());
    long evals = best.evals;
    for (int h = 0; h < cfg.hops; ++h) {
        for (std::size_t j = 0; j < trial.size(); ++j) trial[j] = best.x[j] + cfg.step_scale * standard_normal(rng);
        Minimum local = nelder_mead(f, trial, cfg);
        evals += local.evals;
        if (local.value < best.value) best = std::move(local);
    }
    best.evals = evals;
    return best;
}

std::uint64_t refit_seed(std::uint64_t seed, int k) {
    if (k == 0) return seed;
    // splitmix64 step keyed by the repeat index.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace lmsr::optimize
