#include "dclr/rng.hpp"

#include <cstring>
#include <stdexcept>

namespace dclr {

uint64_t Rng::uniform_int(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be >= 1");
    // Accept r in [2^64 mod n, 2^64) so that r % n is exactly uniform.
    uint64_t min = (0 - n) % n;
    uint64_t r;
    do {
        r = next_u64();
    } while (r < min);
    return r % n;
}

namespace {

uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

uint64_t hash64(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

uint64_t SeedTree::stream(std::string_view name, uint64_t epoch, uint64_t step,
                          uint64_t index) const {
    // master || name || epoch || step || index, integers little-endian.
    std::vector<unsigned char> buf;
    buf.reserve(32 + name.size());
    auto put_u64 = [&buf](uint64_t x) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(x >> (8 * i)));
    };
    put_u64(master_);
    buf.insert(buf.end(), name.begin(), name.end());
    put_u64(epoch);
    put_u64(step);
    put_u64(index);
    return hash64(buf.data(), buf.size());
}

}  // namespace dclr
