#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dclr {

struct Candidate {
    double score = 0.0;
    int label = 0;
};

/// All scored responses for one context. May contain zero positives
/// (human-labeled test sets do); such groups are skipped in aggregation.
struct CandidateGroup {
    uint64_t context_id = 0;
    std::vector<Candidate> candidates;
};

struct GroupMetrics {
    double hit1 = 0.0, hit2 = 0.0, hit5 = 0.0;
    double ap = 0.0;
    double rr = 0.0;
    double p1 = 0.0;
};

struct MetricReport {
    double r1 = 0.0, r2 = 0.0, r5 = 0.0;
    double map = 0.0, mrr = 0.0, p1 = 0.0;
    uint64_t groups_total = 0;
    uint64_t groups_skipped = 0;
};

/// Candidate indices ordered by descending score; ties keep original order.
std::vector<size_t> rank_group(const CandidateGroup& g);

/// Per-group hit@{1,2,5}, average precision, reciprocal rank, precision@1.
/// Groups without a positive return nullopt.
std::optional<GroupMetrics> group_metrics(const CandidateGroup& g);

/// Arithmetic means over groups that have at least one positive.
MetricReport aggregate(const std::vector<CandidateGroup>& groups);

/// hit@1 after restricting the group to its first positive and first
/// negative, in their original relative order. nullopt when either is
/// missing. This is the 2-candidate recall convention for test sets that
/// ship n candidates per context.
std::optional<double> restricted_pair_hit1(const CandidateGroup& g);

/// Mean of restricted_pair_hit1 over eligible groups (nullopt if none).
std::optional<double> recall2_at1(const std::vector<CandidateGroup>& groups);

/// Aligned plain-text table; columns R@1 R@2 R@5 MAP MRR P@1.
void print_report(std::ostream& os, const MetricReport& report);

}  // namespace dclr
