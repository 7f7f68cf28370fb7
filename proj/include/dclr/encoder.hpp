#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dclr/rng.hpp"

namespace dclr {

/// Row-major double matrix. Vectors are 1 x n, scalars 1 x 1.
struct Tensor {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return v[r * cols + c]; }
    double at(size_t r, size_t c) const { return v[r * cols + c]; }
    size_t size() const { return v.size(); }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

struct EncoderConfig {
    size_t vocab_size = 0;
    size_t embed_dim = 16;   // d
    size_t hidden_dim = 32;  // m
    size_t max_len = 64;     // L
    double dropout = 0.0;    // p in [0, 1)

    void validate() const;
};

/// Trainable state: token + positional embeddings, a two-layer MLP on the
/// mean-pooled sequence, and the scalar matching head.
struct EncoderParams {
    Tensor tok_emb;  // V x d
    Tensor pos_emb;  // L x d
    Tensor w1;       // d x m
    Tensor b1;       // 1 x m
    Tensor w2;       // m x d
    Tensor b2;       // 1 x d
    Tensor head_w;   // 1 x d
    Tensor head_b;   // 1 x 1

    static EncoderParams zeros(const EncoderConfig& cfg);

    /// Fixed iteration order shared by the optimizer, the checkpoint writer
    /// and the finite-difference harness.
    void visit(const std::function<void(const std::string&, Tensor&)>& fn);
    void visit(const std::function<void(const std::string&, const Tensor&)>& fn) const;
};

/// Forward-pass cache consumed by backward(). The dropout mask stores the
/// inverted-dropout scale per kept element: entries are 0 or 1/(1-p).
struct Activations {
    std::vector<int> ids;
    size_t true_len = 0;
    bool dropout = false;
    std::vector<double> mask;    // true_len x d when dropout, else empty
    std::vector<double> pooled;  // d
    std::vector<double> z_pre;   // m, before relu
    std::vector<double> z;       // m
    std::vector<double> h;       // d
    double score_pre = 0.0;
    double score = 0.0;
};

/// Uniform [-0.05, 0.05] weights, zero biases, deterministic in the seed.
EncoderParams init_params(const EncoderConfig& cfg, uint64_t seed);

/// h = W2 relu(W1 pooled + b1) + b2 over the masked mean of token+position
/// embeddings; score = sigmoid(w.h + b). PAD positions (t >= true_len) do
/// not contribute.
Activations forward(const EncoderParams& params, const EncoderConfig& cfg,
                    const std::vector<int>& ids, size_t true_len, bool dropout, Rng& rng);

/// Accumulates exact gradients of grad_h . h + grad_score * score into
/// grads (same shapes as params). Embedding rows not touched by ids stay
/// exactly zero for this call.
void backward(const EncoderParams& params, const EncoderConfig& cfg, const Activations& acts,
              const std::vector<double>& grad_h, double grad_score, EncoderParams& grads);

}  // namespace dclr
