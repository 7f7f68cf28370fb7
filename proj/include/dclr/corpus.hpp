#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dclr/diagnostics.hpp"
#include "dclr/rng.hpp"

namespace dclr {

/// One dialogue turn: an ordered, non-empty list of tokens.
/// Tokens never contain tabs or newlines (enforced at parse time).
using Utterance = std::vector<std::string>;

/// A labeled (context, response) pair as stored in the corpus TSV.
struct Triple {
    std::vector<Utterance> context;  // oldest turn first, never empty
    Utterance response;
    int label = 0;  // 0 or 1

    bool operator==(const Triple&) const = default;
};

/// A positive triple together with the mismatched response the dataset
/// attaches to the same context.
struct PairedExample {
    Triple positive;       // label 1
    Triple hard_negative;  // label 0, identical context
};

enum class Split { train, dev, test };

struct Dataset {
    std::vector<Triple> examples;
    Split split = Split::train;

    uint64_t positives() const;
    uint64_t negatives() const;
    /// positives/negatives as a real; negatives == 0 yields +inf.
    double pos_neg_ratio() const;
};

constexpr int kPadId = 0;
constexpr int kUnkId = 1;
constexpr int kClsId = 2;
constexpr int kSepId = 3;
constexpr int kMaskId = 4;
constexpr int kNumReserved = 5;

/// Token <-> dense id map with the five reserved ids up front.
class Vocab {
  public:
    Vocab();

    int id(const std::string& token) const;  // UNK for unknown tokens
    const std::string& token(int id) const;
    size_t size() const { return tokens_.size(); }

    /// Appends a non-reserved token; ids stay dense. Throws on duplicates
    /// or reserved names.
    void add(const std::string& token);

    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

    /// Digest of the serialized form; checked when a checkpoint is reloaded.
    uint64_t digest() const;

    static const std::vector<std::string>& reserved_tokens();

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses one corpus line: label TAB utterance TAB ... TAB response,
/// tokens separated by single spaces. line_no is for error messages only.
Triple parse_tsv_line(const std::string& line, size_t line_no = 0);

/// Inverse of parse_tsv_line for well-formed triples.
std::string format_tsv_line(const Triple& t);

/// Reads a whole TSV corpus; transparently handles gzip (magic bytes 1f 8b).
Dataset load_tsv(const std::string& path, Split split);

/// Most frequent tokens, capped at max_size including the reserved five.
/// Ties in frequency resolve to the lexicographically smaller token.
Vocab build_vocab(const Dataset& dataset, size_t max_size, uint64_t min_freq);

struct Encoded {
    std::vector<int> ids;  // padded to max_len
    size_t true_len = 0;
};

/// [CLS] u1 [SEP] u2 [SEP] ... response [SEP], PAD-filled to max_len.
/// Context utterances are dropped whole, oldest first, until the sequence
/// fits; if the bare [CLS] response [SEP] still overflows, the response
/// tail is cut and a diagnostic recorded.
Encoded encode_triple(const Triple& t, const Vocab& v, size_t max_len,
                      Diagnostics* diag = nullptr);

/// Matches each positive with the first same-context negative in file
/// order. Unmatched positives are dropped with a diagnostic; surplus
/// negatives per context are counted.
std::vector<PairedExample> pair_hard_negatives(const Dataset& dataset, Diagnostics* diag = nullptr);

/// Seed-deterministic shuffle and partition. A final batch shorter than 2
/// is dropped (the contrastive loss needs at least one in-batch negative).
std::vector<std::vector<PairedExample>> make_batches(const std::vector<PairedExample>& pairs,
                                                     size_t batch_size, uint64_t seed,
                                                     Diagnostics* diag = nullptr);

}  // namespace dclr
