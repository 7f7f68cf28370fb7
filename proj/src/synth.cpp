#include "dclr/synth.hpp"

#include <fstream>
#include <stdexcept>

#include "dclr/rng.hpp"

namespace dclr {

namespace {

std::string numbered(const char* stem, size_t i) {
    return std::string(stem) + std::to_string(i);
}

}  // namespace

Dataset make_synthetic(const SynthConfig& cfg, uint64_t seed) {
    if (cfg.topics < 2 || cfg.distractors < 1 || cfg.fillers < 1 || cfg.group_size < 2)
        throw std::invalid_argument("make_synthetic: degenerate config");

    Dataset ds;
    ds.split = Split::train;
    SeedTree seeds(seed);

    for (size_t k = 0; k < cfg.dialogues; ++k) {
        Rng rng(seeds.stream("synth", 0, 0, k));
        size_t topic = rng.uniform_int(cfg.topics);
        size_t distractor = rng.uniform_int(cfg.distractors);

        auto filler = [&]() { return numbered("w", rng.uniform_int(cfg.fillers)); };
        auto filler_utt = [&](size_t min_len, size_t span) {
            Utterance u;
            size_t len = min_len + rng.uniform_int(span);
            for (size_t i = 0; i < len; ++i) u.push_back(filler());
            return u;
        };

        Triple pos;
        size_t turns = 2 + rng.uniform_int(3);  // 2..4 context utterances
        for (size_t i = 0; i + 1 < turns; ++i) pos.context.push_back(filler_utt(2, 3));
        // distractor sits in a non-final utterance
        size_t d_turn = rng.uniform_int(turns - 1);
        size_t d_slot = rng.uniform_int(pos.context[d_turn].size() + 1);
        pos.context[d_turn].insert(pos.context[d_turn].begin() + static_cast<long>(d_slot),
                                   numbered("d", distractor));
        // topic closes the context
        Utterance last = filler_utt(1, 3);
        last.insert(last.begin() + static_cast<long>(rng.uniform_int(last.size() + 1)),
                    numbered("t", topic));
        pos.context.push_back(last);

        pos.response = {"re", numbered("t", topic), "ok"};
        pos.label = 1;
        ds.examples.push_back(pos);

        Triple neg = pos;
        neg.label = 0;
        neg.response = {"re", numbered("d", distractor), "ok"};
        ds.examples.push_back(neg);

        for (size_t extra = 2; extra < cfg.group_size; ++extra) {
            Triple other = pos;
            other.label = 0;
            size_t wrong = rng.uniform_int(cfg.topics - 1);
            if (wrong >= topic) ++wrong;
            other.response = {"re", numbered("t", wrong), "ok"};
            ds.examples.push_back(other);
        }
    }
    return ds;
}

void write_tsv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& t : ds.examples) out << format_tsv_line(t) << "\n";
    if (!out) throw std::runtime_error("error writing " + path);
}

}  // namespace dclr
