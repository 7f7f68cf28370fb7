#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "dclr/rng.hpp"

using namespace dclr;

// Reference outputs of the splitmix64 stream, computed with an independent
// implementation of the published algorithm. Seed 0 matches the values in
// the original splitmix64 write-up.
TEST_CASE("next_u64 matches the reference stream") {
    {
        Rng r(0);
        CHECK(r.next_u64() == 0xe220a8397b1dcdafULL);
        CHECK(r.next_u64() == 0x6e789e6aa1b965f4ULL);
        CHECK(r.next_u64() == 0x06c45d188009454fULL);
        CHECK(r.next_u64() == 0xf88bb8a8724c81ecULL);
    }
    {
        Rng r(1);
        CHECK(r.next_u64() == 0x910a2dec89025cc1ULL);
        CHECK(r.next_u64() == 0xbeeb8da1658eec67ULL);
    }
    {
        Rng r(42);
        CHECK(r.next_u64() == 0xbdd732262feb6e95ULL);
        CHECK(r.next_u64() == 0x28efe333b266f103ULL);
    }
}

TEST_CASE("next_double matches the reference stream and stays in [0,1)") {
    Rng r(0);
    CHECK(r.next_double() == doctest::Approx(0.8833108082136426).epsilon(1e-15));
    CHECK(r.next_double() == doctest::Approx(0.43152799704850997).epsilon(1e-15));
    Rng r7(7);
    CHECK(r7.next_double() == doctest::Approx(0.3898297483912715).epsilon(1e-15));
    Rng many(99);
    for (int i = 0; i < 10000; ++i) {
        double x = many.next_double();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("uniform_int reference values and range") {
    Rng r(2024);
    std::vector<uint64_t> got;
    for (int i = 0; i < 8; ++i) got.push_back(r.uniform_int(6));
    CHECK(got == std::vector<uint64_t>{1, 2, 3, 1, 2, 1, 5, 2});

    Rng r2(5);
    for (int i = 0; i < 10000; ++i) CHECK(r2.uniform_int(7) < 7);
    CHECK(r2.uniform_int(1) == 0);
    CHECK_THROWS_AS(r2.uniform_int(0), std::invalid_argument);
}

TEST_CASE("shuffle is the reference permutation and a bijection") {
    std::vector<int> a{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    Rng r(123);
    r.shuffle(a);
    CHECK(a == std::vector<int>{7, 3, 4, 9, 8, 2, 1, 0, 6, 5});

    for (uint64_t seed = 0; seed < 50; ++seed) {
        std::vector<int> v{1, 2, 3, 4, 5, 6};
        Rng rs(seed);
        rs.shuffle(v);
        std::vector<int> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6});
    }
}

TEST_CASE("seed tree streams are reproducible and distinct") {
    SeedTree st(7);
    CHECK(st.stream("augmentation", 0, 3, 1) == 0xb754ff284e2cdc90ULL);
    CHECK(st.stream("dropout", 0, 3, 1) == 0x9986c6736ccf9eedULL);
    CHECK(SeedTree(8).stream("augmentation", 0, 3, 1) == 0xd2961bb1d268488cULL);

    // No collisions across names and coordinates at small scale.
    std::set<uint64_t> seen;
    for (const char* name : {"data-shuffle", "augmentation", "dropout", "init", "posttrain-masking"})
        for (uint64_t epoch = 0; epoch < 4; ++epoch)
            for (uint64_t step = 0; step < 16; ++step)
                for (uint64_t index = 0; index < 4; ++index)
                    CHECK(seen.insert(st.stream(name, epoch, step, index)).second);
}
