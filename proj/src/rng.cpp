#include "cascnet/rng.hpp"

#include <cmath>

#include "cascnet/errors.hpp"

namespace cascnet {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

void Rng::reseed(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
    have_normal_ = false;
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw InvalidParams("Rng::below requires n > 0");
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (have_normal_) {
        have_normal_ = false;
        return cached_normal_;
    }
    double u1 = uniform01_open_closed();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_normal_ = r * std::sin(2.0 * M_PI * u2);
    have_normal_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

std::vector<std::uint64_t> Rng::sample_without_replacement(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw InvalidParams("sample_without_replacement: k > n");
    // Floyd's algorithm for k << n, full shuffle otherwise.
    if (k * 4 >= n) {
        std::vector<std::uint64_t> all(n);
        for (std::uint64_t i = 0; i < n; ++i) all[i] = i;
        for (std::uint64_t i = 0; i < k; ++i) {
            std::uint64_t j = i + below(n - i);
            std::swap(all[i], all[j]);
        }
        all.resize(k);
        return all;
    }
    std::vector<std::uint64_t> out;
    out.reserve(k);
    for (std::uint64_t j = n - k; j < n; ++j) {
        std::uint64_t t = below(j + 1);
        bool seen = false;
        for (auto v : out) {
            if (v == t) {
                seen = true;
                break;
            }
        }
        out.push_back(seen ? j : t);
    }
    // out is a uniform k-subset; shuffle for a uniform ordered sample
    for (std::uint64_t i = k; i > 1; --i) {
        std::uint64_t j = below(i);
        std::swap(out[i - 1], out[j]);
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = seed;
    std::uint64_t h = splitmix64(x);
    x ^= a * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL;
    h ^= splitmix64(x);
    x ^= b * 0xc2b2ae3d27d4eb4fULL + 0x452821e638d01377ULL;
    h ^= splitmix64(x);
    x ^= c * 0x165667b19e3779f9ULL + 0x13198a2e03707344ULL;
    h ^= splitmix64(x);
    return h;
}

IndexPermutation::IndexPermutation(std::uint64_t domain_size, std::uint64_t seed) {
    if (domain_size == 0) throw InvalidParams("IndexPermutation: empty domain");
    half_bits_ = 1;
    while ((std::uint64_t{1} << (2 * half_bits_)) < domain_size) ++half_bits_;
    padded_ = std::uint64_t{1} << (2 * half_bits_);
    half_mask_ = (std::uint64_t{1} << half_bits_) - 1;
    std::uint64_t s = seed;
    for (auto& k : keys_) k = splitmix64(s);
}

std::uint64_t IndexPermutation::permute(std::uint64_t i) const {
    std::uint64_t left = i >> half_bits_;
    std::uint64_t right = i & half_mask_;
    for (int round = 0; round < 4; ++round) {
        std::uint64_t x = right ^ keys_[round];
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        x ^= x >> 31;
        std::uint64_t next_left = right;
        right = (left ^ x) & half_mask_;
        left = next_left;
    }
    return (left << half_bits_) | right;
}

} // namespace cascnet
