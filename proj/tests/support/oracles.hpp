// Test-only reference implementations, kept independent of the library
// code paths they check.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dclr/encoder.hpp"
#include "dclr/metrics.hpp"

namespace oracles {

/// Central finite difference of f at x, step h.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// relative error |a - b| / max(|a|, |b|, floor)
inline double rel_err(double a, double b, double floor = 1e-8) {
    double scale = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / scale;
}

/// Max relative error between an analytic gradient (flattened over the
/// parameter struct in visit order) and central differences of `loss`.
inline double max_param_grad_err(dclr::EncoderParams& params, const dclr::EncoderParams& grads,
                                 const std::function<double()>& loss, double step = 1e-5,
                                 double floor = 1e-6) {
    double worst = 0.0;
    std::vector<std::pair<dclr::Tensor*, const dclr::Tensor*>> pairs;
    params.visit([&pairs](const std::string&, dclr::Tensor& t) { pairs.emplace_back(&t, nullptr); });
    size_t idx = 0;
    const_cast<dclr::EncoderParams&>(grads).visit(
        [&pairs, &idx](const std::string&, dclr::Tensor& t) { pairs[idx++].second = &t; });
    for (auto& [pt, gt] : pairs) {
        for (size_t i = 0; i < pt->size(); ++i) {
            double orig = pt->v[i];
            pt->v[i] = orig + step;
            double up = loss();
            pt->v[i] = orig - step;
            double down = loss();
            pt->v[i] = orig;
            double fd = (up - down) / (2.0 * step);
            worst = std::max(worst, rel_err(gt->v[i], fd, floor));
        }
    }
    return worst;
}

/// Metrics by direct rank counting: the rank of candidate i is one plus the
/// number of strictly higher scores plus earlier equal scores. No sorting.
struct BruteMetrics {
    double hit1, hit2, hit5, ap, rr, p1;
    bool skipped;
};

inline BruteMetrics brute_force_metrics(const dclr::CandidateGroup& g) {
    const auto& c = g.candidates;
    size_t n = c.size();
    std::vector<size_t> rank(n);
    for (size_t i = 0; i < n; ++i) {
        size_t r = 1;
        for (size_t j = 0; j < n; ++j) {
            if (c[j].score > c[i].score) ++r;
            else if (c[j].score == c[i].score && j < i) ++r;
        }
        rank[i] = r;
    }

    BruteMetrics m{0, 0, 0, 0, 0, 0, true};
    size_t positives = 0;
    for (const auto& cand : c) positives += cand.label == 1;
    if (positives == 0) return m;
    m.skipped = false;

    size_t best_rank = n + 1;
    double ap_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (c[i].label != 1) continue;
        best_rank = std::min(best_rank, rank[i]);
        size_t pos_at_or_before = 0;
        for (size_t j = 0; j < n; ++j)
            if (c[j].label == 1 && rank[j] <= rank[i]) ++pos_at_or_before;
        ap_sum += static_cast<double>(pos_at_or_before) / static_cast<double>(rank[i]);
        if (rank[i] <= 1) m.hit1 = 1;
        if (rank[i] <= 2) m.hit2 = 1;
        if (rank[i] <= 5) m.hit5 = 1;
    }
    m.ap = ap_sum / static_cast<double>(positives);
    m.rr = 1.0 / static_cast<double>(best_rank);
    for (size_t i = 0; i < n; ++i)
        if (rank[i] == 1) m.p1 = c[i].label;
    return m;
}

}  // namespace oracles
