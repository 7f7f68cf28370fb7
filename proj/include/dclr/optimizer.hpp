#pragma once

#include <cstdint>

#include "dclr/encoder.hpp"

namespace dclr {

/// Adaptive moment estimation with bias correction, standard constants.
struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamMoments {
    EncoderParams m;  // first moments, same shapes as the parameters
    EncoderParams v;  // second moments

    static AdamMoments zeros(const EncoderConfig& cfg) {
        return {EncoderParams::zeros(cfg), EncoderParams::zeros(cfg)};
    }
};

/// lr * (total_steps - step) / total_steps, floored at zero. step counts
/// completed updates starting at 1.
double decayed_lr(double lr, uint64_t step, uint64_t total_steps);

/// One bias-corrected update with the already-decayed learning rate.
/// Throws (naming the tensor) on any non-finite gradient entry.
void optimizer_step(EncoderParams& params, const EncoderParams& grads, AdamMoments& moments,
                    uint64_t step, double lr, const AdamConfig& cfg = {});

/// Scales all gradients so their global L2 norm is at most max_norm.
/// max_norm <= 0 disables clipping. Returns the pre-clip norm.
double clip_global_norm(EncoderParams& grads, double max_norm);

}  // namespace dclr
