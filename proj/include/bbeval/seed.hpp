#pragma once

#include <cstdint>
#include <string_view>

namespace bbeval {

std::uint64_t splitmix64(std::uint64_t x);

// Stable across platforms and builds: FNV-1a over the fields followed by a
// splitmix64 finalizer. Strings are length-prefixed so ("ab","c") != ("a","bc").
class SeedHasher {
public:
    explicit SeedHasher(std::uint64_t base);

    SeedHasher &add(std::uint64_t value);
    SeedHasher &add(std::string_view text);
    std::uint64_t digest() const;

private:
    std::uint64_t state_;
};

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::string_view method_id,
                              std::string_view function_id, std::uint64_t repeat);
std::uint64_t derive_shift_seed(std::uint64_t base_seed, std::string_view function_id,
                                std::uint64_t repeat);

// Bit-reproducible uniform draws on top of std::mt19937_64. The standard
// distributions are implementation-defined, so they are avoided wherever a
// value ends up in an archive.
double unit_uniform(std::uint64_t bits);

} // namespace bbeval
