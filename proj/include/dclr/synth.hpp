#pragma once

#include <cstdint>

#include "dclr/corpus.hpp"

namespace dclr {

/// Template-dialogue generator for end-to-end experiments. Each dialogue
/// carries a topic token in its final context utterance and a distractor
/// token in an earlier one; the correct response repeats the topic token,
/// the hard negative repeats the distractor. Topic and distractor
/// vocabularies are disjoint, so the matching signal is learnable at desk
/// scale while the hard negative still shares most of its surface with the
/// positive.
struct SynthConfig {
    size_t dialogues = 5000;
    size_t topics = 40;
    size_t distractors = 40;
    size_t fillers = 120;
    /// Candidates per context in test layout: 1 positive + (group_size-1)
    /// negatives. 2 gives the 1:1 train/dev layout.
    size_t group_size = 2;
};

/// Emits group_size lines per dialogue: the positive first, then hard
/// negatives (the first one distractor-based, any further ones random
/// topics). Ratio is exactly 1:(group_size-1).
Dataset make_synthetic(const SynthConfig& cfg, uint64_t seed);

void write_tsv(const Dataset& ds, const std::string& path);

}  // namespace dclr
