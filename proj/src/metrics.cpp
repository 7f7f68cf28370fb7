#include "dclr/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <stdexcept>

namespace dclr {

std::vector<size_t> rank_group(const CandidateGroup& g) {
    std::vector<size_t> order(g.candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&g](size_t a, size_t b) {
        return g.candidates[a].score > g.candidates[b].score;
    });
    return order;
}

std::optional<GroupMetrics> group_metrics(const CandidateGroup& g) {
    auto order = rank_group(g);
    size_t positives = 0;
    for (const auto& c : g.candidates) positives += c.label == 1;
    if (positives == 0) return std::nullopt;

    GroupMetrics m;
    size_t seen_pos = 0;
    double ap_sum = 0.0;
    for (size_t rank = 1; rank <= order.size(); ++rank) {
        const Candidate& c = g.candidates[order[rank - 1]];
        if (c.label != 1) continue;
        if (seen_pos == 0) m.rr = 1.0 / static_cast<double>(rank);
        ++seen_pos;
        ap_sum += static_cast<double>(seen_pos) / static_cast<double>(rank);
        if (rank <= 1) m.hit1 = 1.0;
        if (rank <= 2) m.hit2 = 1.0;
        if (rank <= 5) m.hit5 = 1.0;
    }
    m.ap = ap_sum / static_cast<double>(positives);
    m.p1 = g.candidates[order[0]].label == 1 ? 1.0 : 0.0;
    return m;
}

MetricReport aggregate(const std::vector<CandidateGroup>& groups) {
    MetricReport report;
    report.groups_total = groups.size();
    uint64_t used = 0;
    for (const auto& g : groups) {
        auto m = group_metrics(g);
        if (!m) {
            ++report.groups_skipped;
            continue;
        }
        ++used;
        report.r1 += m->hit1;
        report.r2 += m->hit2;
        report.r5 += m->hit5;
        report.map += m->ap;
        report.mrr += m->rr;
        report.p1 += m->p1;
    }
    if (used == 0) throw std::runtime_error("aggregate: every group lacks a positive candidate");
    const double inv = 1.0 / static_cast<double>(used);
    report.r1 *= inv;
    report.r2 *= inv;
    report.r5 *= inv;
    report.map *= inv;
    report.mrr *= inv;
    report.p1 *= inv;
    return report;
}

std::optional<double> restricted_pair_hit1(const CandidateGroup& g) {
    std::optional<size_t> pos, neg;
    for (size_t i = 0; i < g.candidates.size(); ++i) {
        if (g.candidates[i].label == 1 && !pos) pos = i;
        if (g.candidates[i].label == 0 && !neg) neg = i;
    }
    if (!pos || !neg) return std::nullopt;
    CandidateGroup sub;
    sub.context_id = g.context_id;
    if (*pos < *neg) {
        sub.candidates = {g.candidates[*pos], g.candidates[*neg]};
    } else {
        sub.candidates = {g.candidates[*neg], g.candidates[*pos]};
    }
    auto m = group_metrics(sub);
    return m->hit1;
}

std::optional<double> recall2_at1(const std::vector<CandidateGroup>& groups) {
    double sum = 0.0;
    uint64_t used = 0;
    for (const auto& g : groups) {
        if (auto h = restricted_pair_hit1(g)) {
            sum += *h;
            ++used;
        }
    }
    if (used == 0) return std::nullopt;
    return sum / static_cast<double>(used);
}

void print_report(std::ostream& os, const MetricReport& report) {
    os << std::fixed << std::setprecision(4);
    os << "R@1     R@2     R@5     MAP     MRR     P@1\n";
    os << report.r1 << "  " << report.r2 << "  " << report.r5 << "  " << report.map << "  "
       << report.mrr << "  " << report.p1 << "\n";
    os << "groups: " << report.groups_total << " (skipped " << report.groups_skipped << ")\n";
    os.unsetf(std::ios::fixed);
}

}  // namespace dclr
