#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dclr/checkpoint.hpp"
#include "dclr/corpus.hpp"
#include "dclr/diagnostics.hpp"
#include "dclr/metrics.hpp"

namespace dclr {

struct MetricRecord {
    uint64_t step = 0;
    std::string split;
    std::string metric;
    double value = 0.0;
};

struct TrainResult {
    Checkpoint best;         // state at the best dev R@1 evaluation
    Checkpoint final_state;  // state after the last executed step
    std::vector<MetricRecord> history;
    Diagnostics diag;
};

/// Scores every triple with the trained encoder (dropout off) and groups
/// candidates. group_size 0 groups contiguous lines that share a context;
/// otherwise fixed-size chunks are used.
std::vector<CandidateGroup> score_dataset(const EncoderParams& params, const EncoderConfig& cfg,
                                          const Vocab& vocab, const Dataset& dataset,
                                          size_t group_size = 0);

MetricReport evaluate(const EncoderParams& params, const EncoderConfig& cfg, const Vocab& vocab,
                      const Dataset& dataset, size_t group_size = 0);

/// Mean cos(h, h_view) - mean cos(h, h_negative) over the paired examples
/// of a split, with one STS and one SR view per pair drawn from view_seed.
/// Fixed seed makes the statistic a paired comparison across models.
double embedding_margin(const EncoderParams& params, const EncoderConfig& cfg, const Vocab& vocab,
                        const Dataset& dataset, uint64_t view_seed);

/// Deterministic training loop: pair hard negatives, shuffle per epoch,
/// augment, encode, combined loss, clipped Adam step; evaluates dev every
/// eval_interval steps (and at the end) and retains the best checkpoint.
/// resume continues a saved run bit-exactly; stop_after_steps > 0 halts
/// early (used by the resume tests).
TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& dev_set,
                  const Vocab& vocab, const Checkpoint* resume = nullptr,
                  uint64_t stop_after_steps = 0);

struct AblationCell {
    std::string label;
    ViewStrategy strategy = ViewStrategy::NONE;
    bool scl = false;
    bool ce_views = false;
};

/// Table 2-style component grid: plain fine-tuning, augmentation without
/// the contrastive loss, and the full objective.
std::vector<AblationCell> component_grid();
/// Table 3-style augmentation grid: baseline plus one row per strategy.
std::vector<AblationCell> augmentation_grid();

struct AblationReport {
    std::vector<std::pair<std::string, MetricReport>> rows;
};

/// Trains every cell with the same seed and data, evaluating on eval_set.
AblationReport ablate(const TrainConfig& base, const std::vector<AblationCell>& grid,
                      const Dataset& train_set, const Dataset& dev_set, const Dataset& eval_set,
                      const Vocab& vocab, size_t group_size = 0, std::ostream* log = nullptr);

void print_ablation(std::ostream& os, const AblationReport& report);

/// History records as line-delimited JSON objects.
void write_history(std::ostream& os, const std::vector<MetricRecord>& history);

}  // namespace dclr
