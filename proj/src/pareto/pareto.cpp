// Copyright 2026 The lmsr Authors
// SPDX-License-Identifier: Apache-2.0

#include "lmsr/pareto.hpp"

#include "lmsr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lmsr::pareto {

namespace {

std::string number_text(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Descending MSE; ties put the more complex candidate first so the best ends
// up last.
void order_for_prompt(std::vector<Candidate>& v) {
    std::stable_sort(v.begin(), v.end(), [](const Candidate& a, const Candidate& b) {
        if (a.mse != b.mse) return a.mse > b.mse;
        return a.complexity > b.complexity;
    });
}

// Positions of the front members, by ascending complexity.
std::vector<std::size_t> front_indices(std::span<const Candidate> cands) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cands.size(); ++i)
        if (std::isfinite(cands[i].mse)) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = cands[a];
        const auto& y = cands[b];
        if (x.complexity != y.complexity) return x.complexity < y.complexity;
        if (x.mse != y.mse) return x.mse < y.mse;
        return x.iteration_born < y.iteration_born;
    });
    // A candidate survives only if it beats every simpler (or equally simple,
    // earlier-sorted) candidate on MSE.
    std::vector<std::size_t> front;
    double best = std::numeric_limits<double>::infinity();
    for (auto i : idx) {
        if (cands[i].mse < best) {
            front.push_back(i);
            best = cands[i].mse;
        }
    }
    return front;
}

}  // namespace

Candidate Candidate::make(expr::Expression e, std::vector<double> params, double mse, double mae, int iteration) {
    Candidate c;
    c.canonical = expr::canonicalize(e);
    c.complexity = expr::complexity(e);
    c.expr = std::move(e);
    c.params = std::move(params);
    c.mse = mse;
    c.mae = mae;
    c.iteration_born = iteration;
    return c;
}

std::size_t Store::find(const expr::Expression& e) const {
    auto it = by_canonical_.find(expr::render(expr::canonicalize(e)));
    return it == by_canonical_.end() ? npos : it->second;
}

InsertOutcome Store::insert(Candidate c) {
    // Canonical forms are re-indexed, so equal renders mean structural equality.
    auto key = expr::render(c.canonical);
    auto [it, fresh] = by_canonical_.try_emplace(std::move(key), items_.size());
    if (fresh) {
        items_.push_back(std::move(c));
        return InsertOutcome::appended;
    }
    Candidate& incumbent = items_[it->second];
    if (c.mse < incumbent.mse) {
        incumbent = std::move(c);
        return InsertOutcome::replaced;
    }
    return InsertOutcome::kept_incumbent;
}

std::string Store::to_csv() const {
    std::string out = "equation,complexity,mse,mae,iteration\n";
    for (const auto& c : items_) {
        out += csv_field(expr::render(c.expr)) + "," + std::to_string(c.complexity) + "," + number_text(c.mse) + "," +
               number_text(c.mae) + "," + std::to_string(c.iteration_born) + "\n";
    }
    return out;
}

std::vector<Candidate> pareto_front(std::span<const Candidate> cands) {
    std::vector<Candidate> front;
    for (auto i : front_indices(cands)) front.push_back(cands[i]);
    return front;
}

FeedbackPolicy FeedbackPolicy::standard(std::size_t min_count) {
    FeedbackPolicy p;
    p.kind = Kind::standard;
    p.min_count = min_count;
    return p;
}

FeedbackPolicy FeedbackPolicy::top_k(std::size_t k, bool include_params) {
    FeedbackPolicy p;
    p.kind = Kind::top_k;
    p.k = k;
    p.include_params = include_params;
    return p;
}

void FeedbackPolicy::validate() const {
    if (kind == Kind::standard && min_count < 1) throw Error(Errc::invalid_argument, "min_count must be >= 1");
    if (kind == Kind::top_k && k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
}

std::vector<Candidate> select_feedback(const Store& s, const FeedbackPolicy& policy) {
    policy.validate();
    const auto& all = s.candidates();
    std::vector<std::size_t> finite;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (std::isfinite(all[i].mse)) finite.push_back(i);

    // Lowest MSE first, then simpler, then insertion order.
    auto by_mse = finite;
    std::stable_sort(by_mse.begin(), by_mse.end(), [&](std::size_t a, std::size_t b) {
        if (all[a].mse != all[b].mse) return all[a].mse < all[b].mse;
        return all[a].complexity < all[b].complexity;
    });

    std::vector<Candidate> out;
    if (policy.kind == FeedbackPolicy::Kind::top_k) {
        for (std::size_t i = 0; i < by_mse.size() && i < policy.k; ++i) out.push_back(all[by_mse[i]]);
        order_for_prompt(out);
        return out;
    }

    if (finite.size() <= policy.min_count) {
        for (auto i : finite) out.push_back(all[i]);
        order_for_prompt(out);
        return out;
    }

    std::vector<bool> chosen(all.size(), false);
    const auto front = front_indices(all);
    for (auto i : front) chosen[i] = true;
    std::size_t count = front.size();
    for (auto i : by_mse) {
        if (count >= policy.min_count) break;
        if (!chosen[i]) {
            chosen[i] = true;
            ++count;
        }
    }
    // Newest first among what is left.
    auto recent = finite;
    std::stable_sort(recent.begin(), recent.end(), [&](std::size_t a, std::size_t b) {
        if (all[a].iteration_born != all[b].iteration_born) return all[a].iteration_born > all[b].iteration_born;
        return a > b;
    });
    std::size_t added = 0;
    for (auto i : recent) {
        if (added >= policy.recent) break;
        if (!chosen[i]) {
            chosen[i] = true;
            ++added;
        }
    }
    for (std::size_t i = 0; i < all.size(); ++i)
        if (chosen[i]) out.push_back(all[i]);
    order_for_prompt(out);
    return out;
}

double round_sig6(double v) {
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

std::string to_feedback_json(std::span<const Candidate> cands, bool include_params) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : cands) {
        nlohmann::ordered_json rec;
        rec["equation"] = expr::render(c.expr);
        rec["complexity"] = c.complexity;
        rec["mse"] = round_sig6(c.mse);
        if (include_params) {
            auto params = nlohmann::ordered_json::array();
            for (double p : c.params) params.push_back(round_sig6(p));
            rec["params"] = std::move(params);
        }
        arr.push_back(std::move(rec));
    }
    return arr.dump();
}

}  // namespace lmsr::pareto
