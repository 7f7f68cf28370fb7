#include "dclr/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dclr {

void LossConfig::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("loss: tau must be > 0");
    if (alpha < 0.0) throw std::invalid_argument("loss: alpha must be >= 0");
    if (lambda < 0.0) throw std::invalid_argument("loss: lambda must be >= 0");
}

namespace {

double norm(const std::vector<double>& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double cosine_sim(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_sim: dimension mismatch");
    double nu = norm(u), nv = norm(v);
    if (nu == 0.0 || nv == 0.0)
        throw std::invalid_argument("cosine_sim: zero-norm vector");
    double dot = 0.0;
    for (size_t k = 0; k < u.size(); ++k) dot += u[k] * v[k];
    return dot / (nu * nv);
}

namespace {

// d cos(u, v) / du = (v/|v| - cos * u/|u|) / |u|
void add_cosine_grad_u(const std::vector<double>& u, const std::vector<double>& v, double cos_uv,
                       double coeff, std::vector<double>& out) {
    double nu = norm(u), nv = norm(v);
    for (size_t k = 0; k < u.size(); ++k)
        out[k] += coeff * (v[k] / nv - cos_uv * u[k] / nu) / nu;
}

}  // namespace

SclResult scl_loss(const RepBatch& reps, const LossConfig& cfg) {
    cfg.validate();
    const size_t n = reps.size();
    if (n == 0) throw std::invalid_argument("scl_loss: empty batch");
    if (reps.views.size() != n || reps.negatives.size() != n)
        throw std::invalid_argument("scl_loss: misaligned batch");
    const size_t d = reps.anchors[0].size();

    // Similarity matrices: pos[i][j] = f(h_i, h+_j), neg[i][j] = f(h_i, h-_j).
    std::vector<std::vector<double>> pos(n, std::vector<double>(n));
    std::vector<std::vector<double>> neg(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            pos[i][j] = cosine_sim(reps.anchors[i], reps.views[j]);
            neg[i][j] = cosine_sim(reps.anchors[i], reps.negatives[j]);
        }
    }

    SclResult res;
    res.grad_anchors.assign(n, std::vector<double>(d, 0.0));
    res.grad_views.assign(n, std::vector<double>(d, 0.0));
    res.grad_negatives.assign(n, std::vector<double>(d, 0.0));

    for (size_t i = 0; i < n; ++i) {
        // Exponents for anchor i's partition function.
        std::vector<double> a(n), b(n);
        double mx = -INFINITY;
        for (size_t j = 0; j < n; ++j) {
            a[j] = pos[i][j] / cfg.tau;
            b[j] = (neg[i][j] + (i == j ? cfg.alpha : 0.0)) / cfg.tau;
            mx = std::max(mx, std::max(a[j], b[j]));
        }
        double z = 0.0;
        for (size_t j = 0; j < n; ++j) z += std::exp(a[j] - mx) + std::exp(b[j] - mx);
        double lse = mx + std::log(z);
        res.loss += lse - a[i];

        for (size_t j = 0; j < n; ++j) {
            double p = std::exp(a[j] - lse);  // softmax weight of the positive term
            double q = std::exp(b[j] - lse);  // softmax weight of the negative term
            double dpos = (p - (i == j ? 1.0 : 0.0)) / cfg.tau;
            double dneg = q / cfg.tau;
            add_cosine_grad_u(reps.anchors[i], reps.views[j], pos[i][j], dpos,
                              res.grad_anchors[i]);
            add_cosine_grad_u(reps.views[j], reps.anchors[i], pos[i][j], dpos, res.grad_views[j]);
            add_cosine_grad_u(reps.anchors[i], reps.negatives[j], neg[i][j], dneg,
                              res.grad_anchors[i]);
            add_cosine_grad_u(reps.negatives[j], reps.anchors[i], neg[i][j], dneg,
                              res.grad_negatives[j]);
        }
    }
    return res;
}

BceResult bce_loss(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("bce_loss: scores/labels size mismatch");
    if (scores.empty()) throw std::invalid_argument("bce_loss: empty batch");
    constexpr double eps = 1e-12;

    BceResult res;
    res.grad_scores.resize(scores.size());
    const double inv_n = 1.0 / static_cast<double>(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        double s = scores[i];
        if (s <= 0.0 || s >= 1.0) {
            s = std::clamp(s, eps, 1.0 - eps);
            ++res.clamped;
        }
        double y = labels[i];
        res.loss += -(y * std::log(s) + (1.0 - y) * std::log(1.0 - s)) * inv_n;
        res.grad_scores[i] = (s - y) / (s * (1.0 - s)) * inv_n;
    }
    return res;
}

TotalResult total_loss(const RepBatch& reps, const std::vector<double>& ce_scores,
                       const std::vector<int>& ce_labels, const LossConfig& cfg,
                       bool scl_enabled) {
    cfg.validate();
    TotalResult res;
    if (scl_enabled) {
        res.scl_part = scl_loss(reps, cfg);
        res.scl = res.scl_part.loss;
    }
    res.ce_part = bce_loss(ce_scores, ce_labels);
    res.ce = res.ce_part.loss;
    for (auto& g : res.ce_part.grad_scores) g *= cfg.lambda;
    res.loss = res.scl + cfg.lambda * res.ce;
    return res;
}

}  // namespace dclr
