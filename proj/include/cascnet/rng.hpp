#pragma once

#include <cstdint>
#include <vector>

namespace cascnet {

/// Deterministic 64-bit RNG (xoshiro256**). All randomness in the library
/// flows through this type so that results are reproducible across
/// platforms and independent of the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed);

    std::uint64_t next();

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform01_open_closed() { return 1.0 - uniform01(); }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller.
    double normal();

    /// k distinct values from [0, n), in random order (partial Fisher-Yates).
    std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_[4];
    bool have_normal_ = false;
    double cached_normal_ = 0.0;
};

/// Mixes (seed, stream ids) into a fresh RNG seed. Used to derive
/// independent per-trial / per-space streams so that parallel generation
/// is identical regardless of thread count.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                       std::uint64_t c = 0);

/// Pseudorandom permutation of [0, 2^bits) via a 4-round Feistel network.
/// Lets us walk a huge index space "without replacement" in O(1) memory.
class IndexPermutation {
public:
    IndexPermutation(std::uint64_t domain_size, std::uint64_t seed);

    /// Size of the (power-of-two padded) permutation domain.
    std::uint64_t padded_size() const { return padded_; }

    /// Image of i under the permutation; may be >= domain_size (caller skips).
    std::uint64_t permute(std::uint64_t i) const;

private:
    std::uint64_t padded_ = 1;
    int half_bits_ = 1;
    std::uint64_t half_mask_ = 1;
    std::uint64_t keys_[4];
};

} // namespace cascnet
