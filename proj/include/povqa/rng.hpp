#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace povqa {

// FNV-1a, used both for stable ids and for deriving rng streams from seed paths.
inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = d[v & 0xf];
    return s;
}

// Deterministic rng stream tied to a textual derivation path.  We avoid
// std::uniform_int_distribution / std::shuffle on purpose: their algorithms are
// implementation-defined and we need byte-identical artifacts everywhere.
class SplitRng {
public:
    explicit SplitRng(uint64_t seed) : eng_(seed) {}
    SplitRng(uint64_t seed, std::string_view path)
        : eng_(fnv1a64(path, 0xcbf29ce484222325ull ^ (seed * 0x9e3779b97f4a7c15ull))) {}

    uint64_t next_u64() { return eng_(); }

    // uniform in [0, n).  n must be > 0.
    uint64_t below(uint64_t n) { return eng_() % n; }

    // uniform double in [0, 1).
    double unit() { return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // first k of a seeded permutation, order preserved from the permutation
    template <typename T>
    std::vector<T> sample(std::vector<T> pool, size_t k) {
        shuffle(pool);
        if (pool.size() > k) pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace povqa
