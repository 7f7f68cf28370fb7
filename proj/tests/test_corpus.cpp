#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dclr/corpus.hpp"
#include "dclr/rng.hpp"

using namespace dclr;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("dclr_corpus_" + name);
}

Dataset dataset_from(const std::vector<std::string>& lines, Split split = Split::train) {
    Dataset ds;
    ds.split = split;
    for (size_t i = 0; i < lines.size(); ++i) ds.examples.push_back(parse_tsv_line(lines[i], i + 1));
    return ds;
}

}  // namespace

TEST_CASE("parse_tsv_line maps fields") {
    Triple t = parse_tsv_line("1\thello there\thow are you\tfine thanks");
    CHECK(t.label == 1);
    CHECK(t.context == std::vector<Utterance>{{"hello", "there"}, {"how", "are", "you"}});
    CHECK(t.response == Utterance{"fine", "thanks"});

    Triple minimal = parse_tsv_line("0\ta\tb");
    CHECK(minimal.label == 0);
    CHECK(minimal.context == std::vector<Utterance>{{"a"}});
    CHECK(minimal.response == Utterance{"b"});
}

TEST_CASE("parse_tsv_line rejects malformed lines") {
    CHECK_THROWS_AS(parse_tsv_line("2\ta\tb", 7), ParseError);
    CHECK_THROWS_AS(parse_tsv_line("x\ta\tb"), ParseError);
    CHECK_THROWS_AS(parse_tsv_line("1\tonly-response"), ParseError);
    CHECK_THROWS_AS(parse_tsv_line("1\t\tb"), ParseError);
    CHECK_THROWS_AS(parse_tsv_line("1\ta  b\tc"), ParseError);  // empty token
    try {
        parse_tsv_line("9\ta\tb", 41);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("41") != std::string::npos);
    }
}

TEST_CASE("format_tsv_line round-trips parsed lines byte for byte") {
    for (const char* line : {"1\thello there\thow are you\tfine thanks", "0\ta\tb",
                             "1\tx y z\tq\tr s\tt u v w"}) {
        CHECK(format_tsv_line(parse_tsv_line(line)) == line);
    }

    // Property over random well-formed lines.
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        std::string line = rng.next_double() < 0.5 ? "1" : "0";
        size_t fields = 2 + rng.uniform_int(4);
        for (size_t f = 0; f < fields; ++f) {
            line += '\t';
            size_t toks = 1 + rng.uniform_int(4);
            for (size_t k = 0; k < toks; ++k) {
                if (k) line += ' ';
                line += "tok" + std::to_string(rng.uniform_int(50));
            }
        }
        CHECK(format_tsv_line(parse_tsv_line(line)) == line);
    }
}

TEST_CASE("load_tsv reads plain and gzip files identically") {
    const std::string body = "1\thello there\thi\tyes\n0\thello there\thi\tno\n";
    auto plain = temp_file("plain.tsv");
    {
        std::ofstream f(plain, std::ios::binary);
        f << body;
    }
    auto gz = temp_file("comp.tsv.gz");
    {
        gzFile g = gzopen(gz.string().c_str(), "wb");
        REQUIRE(g != nullptr);
        gzwrite(g, body.data(), static_cast<unsigned>(body.size()));
        gzclose(g);
    }
    Dataset a = load_tsv(plain.string(), Split::train);
    Dataset b = load_tsv(gz.string(), Split::train);
    REQUIRE(a.examples.size() == 2);
    CHECK(a.examples == b.examples);
    CHECK(a.pos_neg_ratio() == 1.0);
    fs::remove(plain);
    fs::remove(gz);

    CHECK_THROWS(load_tsv("/nonexistent/definitely_missing.tsv", Split::train));
}

TEST_CASE("build_vocab frequency cutoff and ties") {
    // {"a" x3, "b" x1}, max_size 7, min_freq 2 -> reserved + {a}; b -> UNK
    Dataset ds = dataset_from({"1\ta a\ta\tb"});
    Vocab v = build_vocab(ds, 7, 2);
    CHECK(v.size() == 6);
    CHECK(v.id("a") == kNumReserved);
    CHECK(v.id("b") == kUnkId);

    // equal frequency, one slot: lexicographic winner
    Dataset tie = dataset_from({"1\tb b\ta\ta"});
    Vocab vt = build_vocab(tie, 6, 1);
    CHECK(vt.size() == 6);
    CHECK(vt.id("a") == kNumReserved);
    CHECK(vt.id("b") == kUnkId);

    // empty dataset -> reserved-only vocab, no error
    Dataset empty;
    Vocab ve = build_vocab(empty, 100, 1);
    CHECK(ve.size() == kNumReserved);

    CHECK_THROWS_AS(build_vocab(ds, 5, 1), std::invalid_argument);
}

TEST_CASE("vocab file round trip, reserved tokens first") {
    Dataset ds = dataset_from({"1\tcc cc cc\tbb bb\taa"});
    Vocab v = build_vocab(ds, 100, 1);
    auto path = temp_file("vocab.txt");
    v.save(path.string());

    std::ifstream f(path);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(f, line)) lines.push_back(line);
    REQUIRE(lines.size() == v.size());
    CHECK(lines[0] == "[PAD]");
    CHECK(lines[4] == "[MASK]");
    CHECK(lines[5] == "cc");  // most frequent first

    Vocab loaded = Vocab::load(path.string());
    CHECK(loaded.size() == v.size());
    CHECK(loaded.digest() == v.digest());
    CHECK(loaded.id("bb") == v.id("bb"));
    fs::remove(path);
}

TEST_CASE("encode_triple layout, truncation, padding") {
    Dataset ds = dataset_from({"1\thi\tyo"});
    Vocab v = build_vocab(ds, 100, 1);

    // [CLS] hi SEP yo SEP PAD
    Encoded e = encode_triple(parse_tsv_line("1\thi\tyo"), v, 6);
    CHECK(e.true_len == 5);
    CHECK(e.ids == std::vector<int>{kClsId, v.id("hi"), kSepId, v.id("yo"), kSepId, kPadId});

    // front-truncation drops the oldest utterance whole
    Dataset ds2 = dataset_from({"1\tu1 u1 u1\tu2\tr1"});
    Vocab v2 = build_vocab(ds2, 100, 1);
    Encoded e2 = encode_triple(parse_tsv_line("1\tu1 u1 u1\tu2\tr1"), v2, 6);
    CHECK(e2.true_len == 5);
    CHECK(e2.ids == std::vector<int>{kClsId, v2.id("u2"), kSepId, v2.id("r1"), kSepId, kPadId});

    // unknown tokens -> UNK everywhere outside specials
    Encoded e3 = encode_triple(parse_tsv_line("1\tzz qq\tpp"), v, 8);
    CHECK(e3.ids == std::vector<int>{kClsId, kUnkId, kUnkId, kSepId, kUnkId, kSepId, kPadId, kPadId});

    // oversized response: context fully dropped, response tail cut, diagnostic
    Diagnostics diag;
    Encoded e4 = encode_triple(parse_tsv_line("1\tctx\tr r r r r r r r"), v, 5, &diag);
    CHECK(e4.true_len == 5);
    CHECK(e4.ids[0] == kClsId);
    CHECK(e4.ids[4] == kSepId);
    CHECK(diag.total("response_truncated") == 1);

    CHECK_THROWS_AS(encode_triple(parse_tsv_line("1\ta\tb"), v, 2), std::invalid_argument);
}

TEST_CASE("pair_hard_negatives matches contexts exactly") {
    Dataset ds = dataset_from({
        "1\tc c\tgood",
        "0\tc c\tbad",
        "1\tother ctx\tx",   // no matching negative -> dropped
        "0\tc c\tbad2",      // surplus negative for the same context
    });
    Diagnostics diag;
    auto pairs = pair_hard_negatives(ds, &diag);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].positive.response == Utterance{"good"});
    CHECK(pairs[0].hard_negative.response == Utterance{"bad"});  // first in file order
    CHECK(pairs[0].positive.context == pairs[0].hard_negative.context);
    CHECK(diag.total("dropped_positives") == 1);
    CHECK(diag.total("surplus_negatives") == 1);

    Dataset none = dataset_from({"1\tc1\tr", "0\tc2\tq"});
    CHECK_THROWS(pair_hard_negatives(none));
}

TEST_CASE("pair_hard_negatives count equals positives minus dropped (scan oracle)") {
    // Build a file-like dataset with a known number of pairable positives.
    Rng rng(31);
    Dataset ds;
    uint64_t expect_paired = 0;
    for (int i = 0; i < 500; ++i) {
        std::string ctx = "ctx" + std::to_string(i);
        bool has_neg = rng.next_double() < 0.8;
        ds.examples.push_back(parse_tsv_line("1\t" + ctx + "\tgood" + std::to_string(i)));
        if (has_neg) {
            ds.examples.push_back(parse_tsv_line("0\t" + ctx + "\tbad" + std::to_string(i)));
            ++expect_paired;
        }
    }
    // independent scan: positives whose context also appears with label 0
    uint64_t scan = 0;
    for (const auto& pos : ds.examples) {
        if (pos.label != 1) continue;
        for (const auto& neg : ds.examples)
            if (neg.label == 0 && neg.context == pos.context) {
                ++scan;
                break;
            }
    }
    CHECK(scan == expect_paired);

    Diagnostics diag;
    auto pairs = pair_hard_negatives(ds, &diag);
    CHECK(pairs.size() == expect_paired);
    CHECK(diag.total("dropped_positives") == ds.positives() - expect_paired);
    for (const auto& p : pairs) CHECK(p.positive.context == p.hard_negative.context);
}

TEST_CASE("make_batches partitions, keeps order deterministic, drops short tails") {
    std::vector<PairedExample> pairs;
    for (int i = 0; i < 10; ++i) {
        Triple pos = parse_tsv_line("1\tc" + std::to_string(i) + "\tr" + std::to_string(i));
        Triple neg = pos;
        neg.label = 0;
        pairs.push_back({pos, neg});
    }

    auto batches = make_batches(pairs, 4, 99);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].size() == 4);
    CHECK(batches[1].size() == 4);
    CHECK(batches[2].size() == 2);

    auto again = make_batches(pairs, 4, 99);
    REQUIRE(again.size() == batches.size());
    for (size_t b = 0; b < batches.size(); ++b)
        for (size_t i = 0; i < batches[b].size(); ++i)
            CHECK(batches[b][i].positive == again[b][i].positive);

    Diagnostics diag;
    auto five = make_batches({pairs.begin(), pairs.begin() + 5}, 4, 1, &diag);
    CHECK(five.size() == 1);
    CHECK(diag.total("dropped_short_batch") == 1);

    CHECK_THROWS_AS(make_batches(pairs, 1, 0), std::invalid_argument);
}

TEST_CASE("dataset ratio bookkeeping") {
    Dataset ds = dataset_from({"1\ta\tb", "0\ta\tc", "0\ta\td"});
    CHECK(ds.positives() == 1);
    CHECK(ds.negatives() == 2);
    CHECK(ds.pos_neg_ratio() == doctest::Approx(0.5));
}
