#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace smreg {

// SplitMix64 finaliser; used to derive independent engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// A seeded random stream. Substreams are keyed by (base seed, key...) so
// replication r of horizon n always sees the same numbers, whatever the
// execution order. Not thread-safe; give each worker its own stream.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    static RandomStream derive(std::uint64_t base_seed, std::initializer_list<std::uint64_t> keys) {
        std::uint64_t s = splitmix64(base_seed);
        for (auto k : keys) s = splitmix64(s ^ splitmix64(k + 0x632be59bd9b4e019ULL));
        return RandomStream(s);
    }

    std::uint64_t seed() const { return seed_; }
    std::mt19937_64& engine() { return engine_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal() { return normal_(engine_); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace smreg
