#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace csa {

// Deterministic random stream. Distributions are hand-rolled on top of
// mt19937_64 so that draws are bit-identical across standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                          static_cast<uint32_t>(0x9e3779b9u)};
        engine_.seed(seq);
    }

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return (engine_() >> 11) * (1.0 / 9007199254740992.0); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    uint64_t below(uint64_t n) { return n ? engine_() % n : 0; }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call (the spare is discarded to keep the
    // stream position independent of call parity)
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        return mean + stddev * z;
    }

  private:
    std::mt19937_64 engine_;
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_str(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// Derive a named substream. Streams are stateless functions of
// (seed, purpose, step), so resuming a run at step t replays the exact
// randomness of an uninterrupted run.
inline Rng derive_rng(uint64_t seed, std::string_view purpose, uint64_t step = 0) {
    return Rng(splitmix64(seed ^ splitmix64(hash_str(purpose)) ^ splitmix64(step * 0x9e3779b97f4a7c15ULL + 0x1234567)));
}

} // namespace csa
