#include "dclr/posttrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dclr {

std::vector<Utterance> cut_dialogue(const std::vector<Utterance>& d, Rng& rng) {
    if (d.size() < 2) throw std::invalid_argument("cut_dialogue: need at least 2 utterances");
    if (rng.next_double() >= 0.5) return d;
    // Prefix length uniform over [2, |d|]; |d| = 2 forces the whole dialogue.
    size_t len = 2 + static_cast<size_t>(rng.uniform_int(d.size() - 1));
    return std::vector<Utterance>(d.begin(), d.begin() + static_cast<long>(len));
}

NspSample sample_nsp(const std::vector<Utterance>& d_prime,
                     const std::vector<std::vector<Utterance>>& corpus, size_t own_index, Rng& rng,
                     Diagnostics* diag) {
    if (d_prime.size() < 2) throw std::invalid_argument("sample_nsp: need at least 2 utterances");

    NspSample out;
    out.context.assign(d_prime.begin(), d_prime.end() - 1);

    if (rng.next_double() < 0.25) {
        out.response = d_prime.back();
        out.label = NspLabel::positive;
        return out;
    }

    bool from_corpus = rng.next_double() < 2.0 / 3.0;
    if (from_corpus && corpus.size() < 2) {
        if (diag) diag->note("nsp_random_fallback", "single-dialogue corpus: random negative degraded to same-context");
        from_corpus = false;
    }
    if (from_corpus) {
        size_t other = static_cast<size_t>(rng.uniform_int(corpus.size() - 1));
        if (other >= own_index) ++other;
        const auto& dialogue = corpus[other];
        out.response = dialogue[static_cast<size_t>(rng.uniform_int(dialogue.size()))];
        out.label = NspLabel::random_negative;
    } else {
        // Never the final utterance, so the true continuation cannot leak in.
        size_t pick = static_cast<size_t>(rng.uniform_int(d_prime.size() - 1));
        out.response = d_prime[pick];
        out.label = NspLabel::same_context_negative;
    }
    return out;
}

std::optional<MaskedSeq> mask_tokens(const std::vector<int>& ids, size_t true_len,
                                     const Vocab& vocab, Rng& rng, Diagnostics* diag) {
    std::vector<size_t> candidates;
    for (size_t t = 0; t < true_len; ++t) {
        int id = ids[t];
        if (id == kPadId || id == kClsId || id == kSepId || id == kMaskId) continue;
        candidates.push_back(t);
    }
    if (candidates.empty()) {
        if (diag) diag->note("mask_skipped", "sequence without maskable positions");
        return std::nullopt;
    }

    size_t want = static_cast<size_t>(
        std::llround(0.15 * static_cast<double>(candidates.size())));
    want = std::clamp<size_t>(want, 1, candidates.size());
    rng.shuffle(candidates);
    std::vector<size_t> selected(candidates.begin(), candidates.begin() + static_cast<long>(want));
    std::sort(selected.begin(), selected.end());

    MaskedSeq out;
    out.input_ids = ids;
    out.mlm_labels.assign(ids.size(), kMlmIgnore);
    const size_t plain_vocab = vocab.size() - kNumReserved;
    for (size_t t : selected) {
        out.mlm_labels[t] = ids[t];
        double u = rng.next_double();
        if (u < 0.8) {
            out.input_ids[t] = kMaskId;
        } else if (u < 0.9) {
            if (plain_vocab == 0) {
                out.input_ids[t] = kMaskId;  // reserved-only vocab: nothing to draw
                if (diag) diag->count("mask_random_fallback");
            } else {
                out.input_ids[t] =
                    kNumReserved + static_cast<int>(rng.uniform_int(plain_vocab));
            }
        }  // else left unchanged
    }
    return out;
}

std::vector<PostExample> generate_post_training(const Dataset& corpus, const Vocab& vocab,
                                                size_t max_len, size_t count, uint64_t seed,
                                                Diagnostics* diag) {
    // Positive triples become dialogues d = context + response.
    std::vector<std::vector<Utterance>> dialogues;
    std::vector<size_t> source_index;
    for (size_t i = 0; i < corpus.examples.size(); ++i) {
        const Triple& t = corpus.examples[i];
        if (t.label != 1) continue;
        std::vector<Utterance> d = t.context;
        d.push_back(t.response);
        dialogues.push_back(std::move(d));
        source_index.push_back(i);
    }
    if (dialogues.empty())
        throw std::runtime_error("generate_post_training: corpus has no positive triples");

    SeedTree seeds(seed);
    std::vector<PostExample> out;
    out.reserve(count);
    const size_t max_attempts = count * 2 + 1000;  // mask skips are rare
    for (size_t k = 0; out.size() < count && k < max_attempts; ++k) {
        Rng rng(seeds.stream("posttrain-masking", 0, 0, k));
        size_t pick = static_cast<size_t>(rng.uniform_int(dialogues.size()));
        const auto& d = dialogues[pick];

        auto d_prime = cut_dialogue(d, rng);
        NspSample nsp = sample_nsp(d_prime, dialogues, pick, rng, diag);

        Triple t;
        t.context = nsp.context;
        t.response = nsp.response;
        t.label = nsp.label == NspLabel::positive ? 1 : 0;
        Encoded enc = encode_triple(t, vocab, max_len, diag);

        auto masked = mask_tokens(enc.ids, enc.true_len, vocab, rng, diag);
        if (!masked) continue;

        PostExample ex;
        ex.input_ids = std::move(masked->input_ids);
        ex.mlm_labels = std::move(masked->mlm_labels);
        ex.nsp_label = nsp.label;
        ex.source_dialogue = source_index[pick];
        out.push_back(std::move(ex));
    }
    return out;
}

namespace {

void put_u32(std::ostream& os, uint32_t x) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_u64(std::ostream& os, uint64_t x) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
    os.write(b, 8);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("post-example file: truncated");
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(b[i]) << (8 * i);
    return x;
}

uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("post-example file: truncated");
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(b[i]) << (8 * i);
    return x;
}

}  // namespace

void write_post_examples(const std::string& path, const std::vector<PostExample>& examples) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write("DCPG", 4);
    put_u32(os, 1);
    put_u64(os, examples.size());
    for (const auto& ex : examples) {
        uint64_t record = 4 + 1 + 8 + ex.input_ids.size() * 8;
        put_u64(os, record);
        put_u32(os, static_cast<uint32_t>(ex.input_ids.size()));
        os.put(static_cast<char>(ex.nsp_label));
        put_u64(os, ex.source_dialogue);
        for (size_t i = 0; i < ex.input_ids.size(); ++i) {
            put_u32(os, static_cast<uint32_t>(ex.input_ids[i]));
            put_u32(os, static_cast<uint32_t>(ex.mlm_labels[i]));
        }
    }
    if (!os) throw std::runtime_error("error writing " + path);
}

std::vector<PostExample> read_post_examples(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "DCPG")
        throw std::runtime_error("post-example file: bad magic");
    uint32_t version = get_u32(is);
    if (version != 1) throw std::runtime_error("post-example file: unsupported version");
    uint64_t count = get_u64(is);
    std::vector<PostExample> out;
    out.reserve(count);
    for (uint64_t k = 0; k < count; ++k) {
        get_u64(is);  // record length, informational
        uint32_t len = get_u32(is);
        PostExample ex;
        int c = is.get();
        if (c < 0) throw std::runtime_error("post-example file: truncated");
        ex.nsp_label = static_cast<NspLabel>(c);
        ex.source_dialogue = get_u64(is);
        ex.input_ids.resize(len);
        ex.mlm_labels.resize(len);
        for (uint32_t i = 0; i < len; ++i) {
            ex.input_ids[i] = static_cast<int>(get_u32(is));
            ex.mlm_labels[i] = static_cast<int32_t>(get_u32(is));
        }
        out.push_back(std::move(ex));
    }
    return out;
}

void print_post_example(std::ostream& os, const PostExample& ex, const Vocab& vocab) {
    static const char* names[] = {"positive", "random-negative", "same-context-negative"};
    os << names[static_cast<int>(ex.nsp_label)] << " | ";
    for (size_t i = 0; i < ex.input_ids.size(); ++i) {
        if (ex.input_ids[i] == kPadId) break;
        if (i) os << ' ';
        os << vocab.token(ex.input_ids[i]);
    }
    os << " | masked:";
    for (size_t i = 0; i < ex.mlm_labels.size(); ++i)
        if (ex.mlm_labels[i] != kMlmIgnore) os << ' ' << i << '=' << vocab.token(ex.mlm_labels[i]);
    os << "\n";
}

}  // namespace dclr
