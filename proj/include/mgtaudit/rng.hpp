#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mgtaudit {

// Seedable generator used for every random choice in the toolkit.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The distributions below are implemented here rather than taken
// from <random> because the standard library distributions are not
// reproducible across implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Per-item seed from a run seed and a stable key (document id, stage name).
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key);

}  // namespace mgtaudit
