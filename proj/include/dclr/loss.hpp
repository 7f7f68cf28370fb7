#pragma once

#include <cstdint>
#include <vector>

namespace dclr {

struct LossConfig {
    double tau = 0.05;    // softmax temperature, > 0
    double alpha = 1.0;   // additive penalty on each anchor's own hard negative
    double lambda = 1.0;  // cross-entropy weight in the combined objective

    void validate() const;
};

/// Aligned representation batch: anchors, positive views, hard negatives.
struct RepBatch {
    std::vector<std::vector<double>> anchors;    // H
    std::vector<std::vector<double>> views;      // H+
    std::vector<std::vector<double>> negatives;  // H-

    size_t size() const { return anchors.size(); }
};

double cosine_sim(const std::vector<double>& u, const std::vector<double>& v);

struct SclResult {
    double loss = 0.0;
    std::vector<std::vector<double>> grad_anchors;
    std::vector<std::vector<double>> grad_views;
    std::vector<std::vector<double>> grad_negatives;
};

/// Supervised contrastive loss. Per anchor i the partition function runs
/// over all views and all hard negatives of the batch, with alpha added to
/// the anchor's own negative similarity before the temperature divide:
///
///   loss = -sum_i log( exp(f(h_i, h_i+)/tau) / Z_i )
///   Z_i  = sum_j exp(f(h_i, h_j+)/tau) + exp((f(h_i, h_j-) + alpha*[i==j])/tau)
///
/// Exponents are reduced in log-sum-exp form; tau = 0.05 pushes raw
/// exponents to +-20/tau otherwise. Gradients are exact, including the
/// cosine normalization.
SclResult scl_loss(const RepBatch& reps, const LossConfig& cfg);

struct BceResult {
    double loss = 0.0;
    std::vector<double> grad_scores;
    uint64_t clamped = 0;  // scores pushed off exactly 0 or 1
};

/// Mean binary cross-entropy. Scores at exactly 0 or 1 are clamped to
/// [1e-12, 1 - 1e-12] and counted.
BceResult bce_loss(const std::vector<double>& scores, const std::vector<int>& labels);

struct TotalResult {
    double loss = 0.0;
    double scl = 0.0;
    double ce = 0.0;
    SclResult scl_part;
    BceResult ce_part;  // grad_scores already scaled by lambda
};

/// L = L_SCL + lambda * L_CE. The cross-entropy part sees whatever
/// score/label lists the caller passes (the trainer feeds the original
/// anchors and hard negatives once, views only when ce-views is on).
TotalResult total_loss(const RepBatch& reps, const std::vector<double>& ce_scores,
                       const std::vector<int>& ce_labels, const LossConfig& cfg,
                       bool scl_enabled = true);

}  // namespace dclr
