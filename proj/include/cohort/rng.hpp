#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cohort {

// splitmix64. Self-contained so that streams are reproducible across
// platforms and standard-library versions.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive an independent stream seed from a root seed and a stream name.
// All randomness in the pipeline flows from one root seed through named
// sub-streams (per module, per user, per fold), so partial reruns and
// parallel schedules see identical draws.
inline uint64_t derive_seed(uint64_t root, std::string_view stream_name) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : stream_name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    uint64_t s = root ^ h;
    splitmix64(s);
    splitmix64(s);
    return s;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds
        splitmix64(state_);
    }

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), bias-free
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (-n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

}  // namespace cohort
