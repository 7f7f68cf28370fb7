#pragma once

#include <cstdint>
#include <string>

#include "dclr/augment.hpp"
#include "dclr/encoder.hpp"
#include "dclr/loss.hpp"
#include "dclr/optimizer.hpp"

namespace dclr {

/// Everything a training run needs beyond the data itself. Serialized
/// verbatim into checkpoint headers so a run is reproducible from the file.
struct TrainConfig {
    ViewStrategy strategy = ViewStrategy::TL;
    LossConfig loss;
    EncoderConfig encoder;  // vocab_size is filled in from the vocab at train start
    size_t batch_size = 32;
    double lr = 0.02;
    uint64_t epochs = 3;
    uint64_t eval_interval = 2000;
    uint64_t seed = 1;
    bool scl_enabled = true;
    bool ce_views = false;
    /// < 0: auto (5.0 when tau < 1, else off). 0 disables, > 0 sets the norm.
    double clip_norm = -1.0;
    /// 0: derived from epochs * batches at train start.
    uint64_t total_steps = 0;

    double resolved_clip_norm() const {
        if (clip_norm >= 0.0) return clip_norm;
        return loss.tau < 1.0 ? 5.0 : 0.0;
    }

    void validate() const;
};

constexpr uint32_t kCheckpointVersion = 1;

/// Versioned training state. The save format is byte-deterministic: magic
/// "DCLR", u32 version, a key-sorted text header, a tensor directory and
/// little-endian float64 payloads. Reloading reproduces training exactly
/// because all run randomness re-derives from (seed, step).
struct Checkpoint {
    TrainConfig config;
    uint64_t vocab_digest = 0;
    EncoderParams params;
    AdamMoments moments;
    uint64_t step = 0;
    double best_metric = -1.0;  // best dev R@1 seen so far
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dclr
