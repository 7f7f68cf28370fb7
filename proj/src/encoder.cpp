#include "dclr/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace dclr {

void EncoderConfig::validate() const {
    if (vocab_size == 0) throw std::invalid_argument("encoder: vocab_size must be >= 1");
    if (embed_dim == 0 || hidden_dim == 0 || max_len == 0)
        throw std::invalid_argument("encoder: dims must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0)
        throw std::invalid_argument("encoder: dropout must be in [0, 1)");
}

EncoderParams EncoderParams::zeros(const EncoderConfig& cfg) {
    EncoderParams p;
    p.tok_emb = Tensor(cfg.vocab_size, cfg.embed_dim);
    p.pos_emb = Tensor(cfg.max_len, cfg.embed_dim);
    p.w1 = Tensor(cfg.embed_dim, cfg.hidden_dim);
    p.b1 = Tensor(1, cfg.hidden_dim);
    p.w2 = Tensor(cfg.hidden_dim, cfg.embed_dim);
    p.b2 = Tensor(1, cfg.embed_dim);
    p.head_w = Tensor(1, cfg.embed_dim);
    p.head_b = Tensor(1, 1);
    return p;
}

void EncoderParams::visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    fn("tok_emb", tok_emb);
    fn("pos_emb", pos_emb);
    fn("w1", w1);
    fn("b1", b1);
    fn("w2", w2);
    fn("b2", b2);
    fn("head_w", head_w);
    fn("head_b", head_b);
}

void EncoderParams::visit(const std::function<void(const std::string&, const Tensor&)>& fn) const {
    const_cast<EncoderParams*>(this)->visit(
        [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

EncoderParams init_params(const EncoderConfig& cfg, uint64_t seed) {
    cfg.validate();
    EncoderParams p = EncoderParams::zeros(cfg);
    Rng rng(seed);
    auto fill = [&rng](Tensor& t) {
        for (auto& x : t.v) x = rng.next_double() * 0.1 - 0.05;
    };
    // Biases stay zero; fill order is part of the determinism contract.
    fill(p.tok_emb);
    fill(p.pos_emb);
    fill(p.w1);
    fill(p.w2);
    fill(p.head_w);
    return p;
}

Activations forward(const EncoderParams& params, const EncoderConfig& cfg,
                    const std::vector<int>& ids, size_t true_len, bool dropout, Rng& rng) {
    if (true_len == 0) throw std::invalid_argument("forward: true_len must be >= 1");
    if (true_len > cfg.max_len) throw std::invalid_argument("forward: true_len exceeds max_len");
    if (ids.size() != cfg.max_len) throw std::invalid_argument("forward: ids must be padded to max_len");

    const size_t d = cfg.embed_dim;
    const size_t m = cfg.hidden_dim;

    Activations acts;
    acts.ids = ids;
    acts.true_len = true_len;
    acts.dropout = dropout && cfg.dropout > 0.0;

    const double keep_scale = acts.dropout ? 1.0 / (1.0 - cfg.dropout) : 1.0;
    if (acts.dropout) {
        acts.mask.resize(true_len * d);
        for (auto& msk : acts.mask) msk = rng.next_double() < cfg.dropout ? 0.0 : keep_scale;
    }

    acts.pooled.assign(d, 0.0);
    for (size_t t = 0; t < true_len; ++t) {
        int id = ids[t];
        if (id < 0 || static_cast<size_t>(id) >= cfg.vocab_size)
            throw std::invalid_argument("forward: token id out of range");
        for (size_t k = 0; k < d; ++k) {
            double x = params.tok_emb.at(static_cast<size_t>(id), k) + params.pos_emb.at(t, k);
            if (acts.dropout) x *= acts.mask[t * d + k];
            acts.pooled[k] += x;
        }
    }
    const double inv_len = 1.0 / static_cast<double>(true_len);
    for (auto& x : acts.pooled) x *= inv_len;

    acts.z_pre.assign(m, 0.0);
    for (size_t j = 0; j < m; ++j) {
        double s = params.b1.at(0, j);
        for (size_t k = 0; k < d; ++k) s += acts.pooled[k] * params.w1.at(k, j);
        acts.z_pre[j] = s;
    }
    acts.z.resize(m);
    for (size_t j = 0; j < m; ++j) acts.z[j] = acts.z_pre[j] > 0.0 ? acts.z_pre[j] : 0.0;

    acts.h.assign(d, 0.0);
    for (size_t k = 0; k < d; ++k) {
        double s = params.b2.at(0, k);
        for (size_t j = 0; j < m; ++j) s += acts.z[j] * params.w2.at(j, k);
        acts.h[k] = s;
    }

    double sp = params.head_b.at(0, 0);
    for (size_t k = 0; k < d; ++k) sp += params.head_w.at(0, k) * acts.h[k];
    acts.score_pre = sp;
    acts.score = 1.0 / (1.0 + std::exp(-sp));
    return acts;
}

void backward(const EncoderParams& params, const EncoderConfig& cfg, const Activations& acts,
              const std::vector<double>& grad_h, double grad_score, EncoderParams& grads) {
    const size_t d = cfg.embed_dim;
    const size_t m = cfg.hidden_dim;
    if (grad_h.size() != d) throw std::invalid_argument("backward: grad_h has wrong size");
    if (acts.h.size() != d || acts.z.size() != m)
        throw std::invalid_argument("backward: activations do not match config");

    // sigmoid
    double g_spre = grad_score * acts.score * (1.0 - acts.score);
    grads.head_b.at(0, 0) += g_spre;
    std::vector<double> g_h(d);
    for (size_t k = 0; k < d; ++k) {
        grads.head_w.at(0, k) += g_spre * acts.h[k];
        g_h[k] = grad_h[k] + g_spre * params.head_w.at(0, k);
    }

    // h = z W2 + b2
    std::vector<double> g_z(m, 0.0);
    for (size_t j = 0; j < m; ++j) {
        for (size_t k = 0; k < d; ++k) {
            grads.w2.at(j, k) += acts.z[j] * g_h[k];
            g_z[j] += params.w2.at(j, k) * g_h[k];
        }
    }
    for (size_t k = 0; k < d; ++k) grads.b2.at(0, k) += g_h[k];

    // relu
    for (size_t j = 0; j < m; ++j)
        if (acts.z_pre[j] <= 0.0) g_z[j] = 0.0;

    // z_pre = pooled W1 + b1
    std::vector<double> g_pooled(d, 0.0);
    for (size_t k = 0; k < d; ++k) {
        for (size_t j = 0; j < m; ++j) {
            grads.w1.at(k, j) += acts.pooled[k] * g_z[j];
            g_pooled[k] += params.w1.at(k, j) * g_z[j];
        }
    }
    for (size_t j = 0; j < m; ++j) grads.b1.at(0, j) += g_z[j];

    // pooled = mean over t of mask .* (E[id_t] + P[t])
    const double inv_len = 1.0 / static_cast<double>(acts.true_len);
    for (size_t t = 0; t < acts.true_len; ++t) {
        auto id = static_cast<size_t>(acts.ids[t]);
        for (size_t k = 0; k < d; ++k) {
            double g = g_pooled[k] * inv_len;
            if (acts.dropout) g *= acts.mask[t * d + k];
            grads.tok_emb.at(id, k) += g;
            grads.pos_emb.at(t, k) += g;
        }
    }
}

}  // namespace dclr
