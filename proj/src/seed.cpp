#include "bbeval/seed.hpp"

namespace bbeval {

namespace {
constexpr std::uint64_t fnv_offset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t fnv_prime = 0x100000001b3ULL;
} // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SeedHasher::SeedHasher(std::uint64_t base) : state_(fnv_offset) { add(base); }

SeedHasher &SeedHasher::add(std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        state_ ^= (value >> (8 * i)) & 0xffU;
        state_ *= fnv_prime;
    }
    return *this;
}

SeedHasher &SeedHasher::add(std::string_view text) {
    add(static_cast<std::uint64_t>(text.size()));
    for (unsigned char c : text) {
        state_ ^= c;
        state_ *= fnv_prime;
    }
    return *this;
}

std::uint64_t SeedHasher::digest() const { return splitmix64(state_); }

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::string_view method_id,
                              std::string_view function_id, std::uint64_t repeat) {
    return SeedHasher(base_seed).add("run").add(method_id).add(function_id).add(repeat).digest();
}

std::uint64_t derive_shift_seed(std::uint64_t base_seed, std::string_view function_id,
                                std::uint64_t repeat) {
    return SeedHasher(base_seed).add("shift").add(function_id).add(repeat).digest();
}

double unit_uniform(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace bbeval
