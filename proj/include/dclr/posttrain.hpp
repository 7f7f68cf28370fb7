#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dclr/corpus.hpp"
#include "dclr/diagnostics.hpp"
#include "dclr/rng.hpp"

namespace dclr {

enum class NspLabel : uint8_t { positive = 0, random_negative = 1, same_context_negative = 2 };

constexpr int32_t kMlmIgnore = -1;

/// One masked-LM + next-sentence-prediction training example.
struct PostExample {
    std::vector<int> input_ids;       // MASK substitutions applied, padded
    std::vector<int32_t> mlm_labels;  // original id at masked slots, -1 elsewhere
    NspLabel nsp_label = NspLabel::positive;
    uint64_t source_dialogue = 0;
};

/// With probability 1/2 keeps a uniformly chosen prefix of at least two
/// utterances; otherwise returns the dialogue unchanged.
std::vector<Utterance> cut_dialogue(const std::vector<Utterance>& d, Rng& rng);

struct NspSample {
    std::vector<Utterance> context;  // d' minus its final utterance
    Utterance response;
    NspLabel label = NspLabel::positive;
};

/// 25% positive (the final utterance of d'), 75% negative; of the
/// negatives, 2/3 draw a random utterance from another dialogue and 1/3 a
/// non-final utterance of d' itself. A single-dialogue corpus degrades the
/// random branch to the same-context branch with a diagnostic.
NspSample sample_nsp(const std::vector<Utterance>& d_prime,
                     const std::vector<std::vector<Utterance>>& corpus, size_t own_index, Rng& rng,
                     Diagnostics* diag = nullptr);

struct MaskedSeq {
    std::vector<int> input_ids;
    std::vector<int32_t> mlm_labels;
};

/// Token-level masking (whitespace tokens are whole words): 15% of the
/// non-special positions, at least one; of those 80% become MASK, 10% a
/// random non-special id, 10% stay. Returns nullopt when nothing is
/// maskable.
std::optional<MaskedSeq> mask_tokens(const std::vector<int>& ids, size_t true_len,
                                     const Vocab& vocab, Rng& rng, Diagnostics* diag = nullptr);

/// Appendix-style generation: sample a positive triple, append its response
/// to the context, cut, draw the NSP sample, encode, mask. Deterministic in
/// the seed; example k depends only on (seed, k).
std::vector<PostExample> generate_post_training(const Dataset& corpus, const Vocab& vocab,
                                                size_t max_len, size_t count, uint64_t seed,
                                                Diagnostics* diag = nullptr);

/// Length-prefixed binary records: magic "DCPG", u32 version, u64 count,
/// then one record per example, integers little-endian.
void write_post_examples(const std::string& path, const std::vector<PostExample>& examples);
std::vector<PostExample> read_post_examples(const std::string& path);

void print_post_example(std::ostream& os, const PostExample& ex, const Vocab& vocab);

}  // namespace dclr
