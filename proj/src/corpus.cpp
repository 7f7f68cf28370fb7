#include "dclr/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dclr {

uint64_t Dataset::positives() const {
    uint64_t n = 0;
    for (const auto& t : examples) n += t.label == 1;
    return n;
}

uint64_t Dataset::negatives() const {
    return examples.size() - positives();
}

double Dataset::pos_neg_ratio() const {
    uint64_t neg = negatives();
    if (neg == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(positives()) / static_cast<double>(neg);
}

const std::vector<std::string>& Vocab::reserved_tokens() {
    static const std::vector<std::string> names = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
    return names;
}

Vocab::Vocab() {
    for (const auto& name : reserved_tokens()) {
        ids_.emplace(name, static_cast<int>(tokens_.size()));
        tokens_.push_back(name);
    }
}

int Vocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= tokens_.size())
        throw std::out_of_range("Vocab::token: id " + std::to_string(id) + " out of range");
    return tokens_[static_cast<size_t>(id)];
}

void Vocab::add(const std::string& token) {
    if (ids_.count(token)) throw std::invalid_argument("Vocab::add: duplicate token " + token);
    ids_.emplace(token, static_cast<int>(tokens_.size()));
    tokens_.push_back(token);
}

void Vocab::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open vocab file for writing: " + path);
    for (const auto& t : tokens_) out << t << "\n";
    if (!out) throw std::runtime_error("error writing vocab file: " + path);
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vocab file: " + path);
    Vocab v;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no < kNumReserved) {
            if (line != reserved_tokens()[line_no])
                throw std::runtime_error("vocab file " + path + ": line " +
                                         std::to_string(line_no + 1) + " expected reserved token " +
                                         reserved_tokens()[line_no]);
        } else {
            v.add(line);
        }
        ++line_no;
    }
    if (line_no < kNumReserved)
        throw std::runtime_error("vocab file " + path + ": missing reserved tokens");
    return v;
}

uint64_t Vocab::digest() const {
    std::string blob;
    for (const auto& t : tokens_) {
        blob += t;
        blob += '\n';
    }
    return hash64(blob.data(), blob.size());
}

namespace {

Utterance split_tokens(const std::string& field, size_t line_no, size_t field_no) {
    if (field.empty())
        throw ParseError("line " + std::to_string(line_no) + ": empty utterance field " +
                         std::to_string(field_no));
    Utterance tokens;
    size_t start = 0;
    while (start <= field.size()) {
        size_t end = field.find(' ', start);
        if (end == std::string::npos) end = field.size();
        if (end == start)
            throw ParseError("line " + std::to_string(line_no) + ": empty token in field " +
                             std::to_string(field_no));
        tokens.push_back(field.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

}  // namespace

Triple parse_tsv_line(const std::string& line, size_t line_no) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (start <= line.size()) {
        size_t end = line.find('\t', start);
        if (end == std::string::npos) end = line.size();
        fields.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    if (fields.size() < 3)
        throw ParseError("line " + std::to_string(line_no) + ": expected label, context, response (" +
                         std::to_string(fields.size()) + " fields)");

    Triple t;
    if (fields[0] == "0")
        t.label = 0;
    else if (fields[0] == "1")
        t.label = 1;
    else
        throw ParseError("line " + std::to_string(line_no) + ": malformed label '" + fields[0] + "'");

    for (size_t i = 1; i + 1 < fields.size(); ++i)
        t.context.push_back(split_tokens(fields[i], line_no, i));
    t.response = split_tokens(fields.back(), line_no, fields.size() - 1);
    return t;
}

std::string format_tsv_line(const Triple& t) {
    std::string out = std::to_string(t.label);
    auto append_utt = [&out](const Utterance& u) {
        out += '\t';
        for (size_t i = 0; i < u.size(); ++i) {
            if (i) out += ' ';
            out += u[i];
        }
    };
    for (const auto& u : t.context) append_utt(u);
    append_utt(t.response);
    return out;
}

Dataset load_tsv(const std::string& path, Split split) {
    // gzopen reads plain files as-is and inflates gzip streams (1f 8b magic).
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open corpus file: " + path);

    Dataset ds;
    ds.split = split;
    std::string carry;
    std::vector<char> buf(1 << 20);
    size_t line_no = 0;

    auto consume_line = [&](std::string& line) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) return;  // blank lines are ignored
        ds.examples.push_back(parse_tsv_line(line, line_no));
    };

    try {
        for (;;) {
            int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
            if (n < 0) {
                int errnum = 0;
                const char* msg = gzerror(f, &errnum);
                throw std::runtime_error("error reading " + path + ": " + (msg ? msg : ""));
            }
            if (n == 0) break;
            size_t begin = 0;
            for (int i = 0; i < n; ++i) {
                if (buf[static_cast<size_t>(i)] == '\n') {
                    carry.append(buf.data() + begin, static_cast<size_t>(i) - begin);
                    consume_line(carry);
                    carry.clear();
                    begin = static_cast<size_t>(i) + 1;
                }
            }
            carry.append(buf.data() + begin, static_cast<size_t>(n) - begin);
        }
        if (!carry.empty()) consume_line(carry);
    } catch (...) {
        gzclose(f);
        throw;
    }
    gzclose(f);
    return ds;
}

Vocab build_vocab(const Dataset& dataset, size_t max_size, uint64_t min_freq) {
    if (max_size <= kNumReserved)
        throw std::invalid_argument("build_vocab: max_size must exceed the 5 reserved slots");

    std::unordered_map<std::string, uint64_t> freq;
    auto count_utt = [&freq](const Utterance& u) {
        for (const auto& tok : u) ++freq[tok];
    };
    for (const auto& t : dataset.examples) {
        for (const auto& u : t.context) count_utt(u);
        count_utt(t.response);
    }
    for (const auto& name : Vocab::reserved_tokens()) freq.erase(name);

    std::vector<std::pair<std::string, uint64_t>> ranked;
    ranked.reserve(freq.size());
    for (auto& [tok, n] : freq)
        if (n >= min_freq) ranked.emplace_back(tok, n);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > max_size - kNumReserved) ranked.resize(max_size - kNumReserved);

    Vocab v;
    for (const auto& [tok, n] : ranked) v.add(tok);
    return v;
}

Encoded encode_triple(const Triple& t, const Vocab& v, size_t max_len, Diagnostics* diag) {
    if (max_len < 3) throw std::invalid_argument("encode_triple: max_len must be >= 3");
    if (t.context.empty()) throw std::invalid_argument("encode_triple: empty context");

    // 1 (CLS) + per kept utterance (tokens + SEP) + response tokens + final SEP.
    size_t keep_from = 0;
    auto needed = [&](size_t from) {
        size_t n = 1 + t.response.size() + 1;
        for (size_t i = from; i < t.context.size(); ++i) n += t.context[i].size() + 1;
        return n;
    };
    while (keep_from < t.context.size() && needed(keep_from) > max_len) ++keep_from;

    size_t response_keep = t.response.size();
    if (keep_from == t.context.size() && 1 + t.response.size() + 1 > max_len) {
        response_keep = max_len - 2;
        if (diag)
            diag->note("response_truncated", "response truncated from " +
                                                 std::to_string(t.response.size()) + " to " +
                                                 std::to_string(response_keep) + " tokens");
    }

    Encoded e;
    e.ids.reserve(max_len);
    e.ids.push_back(kClsId);
    for (size_t i = keep_from; i < t.context.size(); ++i) {
        for (const auto& tok : t.context[i]) e.ids.push_back(v.id(tok));
        e.ids.push_back(kSepId);
    }
    for (size_t i = 0; i < response_keep; ++i) e.ids.push_back(v.id(t.response[i]));
    e.ids.push_back(kSepId);
    e.true_len = e.ids.size();
    e.ids.resize(max_len, kPadId);
    return e;
}

namespace {

std::string context_key(const Triple& t) {
    // Tokens carry no tabs or newlines, so this join is injective.
    std::string key;
    for (const auto& u : t.context) {
        for (const auto& tok : u) {
            key += tok;
            key += ' ';
        }
        key += '\t';
    }
    return key;
}

}  // namespace

std::vector<PairedExample> pair_hard_negatives(const Dataset& dataset, Diagnostics* diag) {
    std::unordered_map<std::string, const Triple*> first_negative;
    for (const auto& t : dataset.examples) {
        if (t.label != 0) continue;
        auto [it, inserted] = first_negative.emplace(context_key(t), &t);
        if (!inserted && diag) diag->count("surplus_negatives");
    }

    std::vector<PairedExample> pairs;
    for (const auto& t : dataset.examples) {
        if (t.label != 1) continue;
        auto it = first_negative.find(context_key(t));
        if (it == first_negative.end()) {
            if (diag)
                diag->note("dropped_positives",
                           "positive without matching negative context: " + format_tsv_line(t));
            continue;
        }
        pairs.push_back(PairedExample{t, *it->second});
    }
    if (pairs.empty()) throw std::runtime_error("pair_hard_negatives: no pairable positives");
    return pairs;
}

std::vector<std::vector<PairedExample>> make_batches(const std::vector<PairedExample>& pairs,
                                                     size_t batch_size, uint64_t seed,
                                                     Diagnostics* diag) {
    if (batch_size < 2)
        throw std::invalid_argument("make_batches: batch_size must be >= 2 for in-batch negatives");

    std::vector<size_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::vector<PairedExample>> batches;
    for (size_t begin = 0; begin < order.size(); begin += batch_size) {
        size_t end = std::min(begin + batch_size, order.size());
        if (end - begin < 2) {
            if (diag)
                diag->note("dropped_short_batch", "dropped final batch of size " +
                                                      std::to_string(end - begin));
            break;
        }
        std::vector<PairedExample> batch;
        batch.reserve(end - begin);
        for (size_t i = begin; i < end; ++i) batch.push_back(pairs[order[i]]);
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace dclr
