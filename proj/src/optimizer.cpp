#include "dclr/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace dclr {

double decayed_lr(double lr, uint64_t step, uint64_t total_steps) {
    if (total_steps == 0) return lr;
    if (step >= total_steps) return 0.0;
    return lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps);
}

void optimizer_step(EncoderParams& params, const EncoderParams& grads, AdamMoments& moments,
                    uint64_t step, double lr, const AdamConfig& cfg) {
    if (step == 0) throw std::invalid_argument("optimizer_step: step counts from 1");

    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));

    auto update = [&](const std::string& name, Tensor& p, const Tensor& g, Tensor& m, Tensor& v) {
        if (p.size() != g.size()) throw std::invalid_argument("optimizer_step: shape mismatch in " + name);
        for (size_t i = 0; i < p.size(); ++i) {
            double gi = g.v[i];
            if (!std::isfinite(gi))
                throw std::runtime_error("optimizer_step: non-finite gradient in tensor '" + name + "'");
            m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * gi;
            v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * gi * gi;
            double mhat = m.v[i] / bc1;
            double vhat = v.v[i] / bc2;
            p.v[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    };

    // Walk both structures in the shared visit order.
    std::vector<std::pair<std::string, Tensor*>> ps, gs, ms, vs;
    params.visit([&ps](const std::string& n, Tensor& t) { ps.emplace_back(n, &t); });
    const_cast<EncoderParams&>(grads).visit(
        [&gs](const std::string& n, Tensor& t) { gs.emplace_back(n, &t); });
    moments.m.visit([&ms](const std::string& n, Tensor& t) { ms.emplace_back(n, &t); });
    moments.v.visit([&vs](const std::string& n, Tensor& t) { vs.emplace_back(n, &t); });
    for (size_t i = 0; i < ps.size(); ++i)
        update(ps[i].first, *ps[i].second, *gs[i].second, *ms[i].second, *vs[i].second);
}

double clip_global_norm(EncoderParams& grads, double max_norm) {
    double sq = 0.0;
    grads.visit([&sq](const std::string&, Tensor& t) {
        for (double x : t.v) sq += x * x;
    });
    double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        double scale = max_norm / norm;
        grads.visit([scale](const std::string&, Tensor& t) {
            for (double& x : t.v) x *= scale;
        });
    }
    return norm;
}

}  // namespace dclr
