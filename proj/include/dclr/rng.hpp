#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dclr {

/// Counter-style 64-bit generator (splitmix64). Chosen because the algorithm
/// is fully specified by a handful of integer ops, so every platform and
/// every reimplementation produces the same stream for the same seed.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, n) via rejection sampling.
    uint64_t uniform_int(uint64_t n);

    /// Fisher-Yates, high index down.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    uint64_t state() const { return state_; }

  private:
    uint64_t state_;
};

/// FNV-1a over a byte string, finished with the splitmix64 mixer.
uint64_t hash64(const void* data, size_t len);

/// Derives independent, collision-free seeds for the named randomness
/// consumers of a run. stream(name, epoch, step, index) is a pure function
/// of the master seed and the coordinates, so any point in a run can be
/// re-derived without replaying the stream.
class SeedTree {
  public:
    explicit SeedTree(uint64_t master) : master_(master) {}

    uint64_t stream(std::string_view name, uint64_t epoch = 0, uint64_t step = 0,
                    uint64_t index = 0) const;

    uint64_t master() const { return master_; }

  private:
    uint64_t master_;
};

}  // namespace dclr
