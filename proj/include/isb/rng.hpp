#ifndef ISB_RNG_HPP
#define ISB_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace isb {

using rng_type = std::mt19937_64;

/// Independent, reproducible stream for (seed, tag...). Uses seed_seq so the
/// mapping is fixed by the standard rather than by the library vendor.
inline rng_type make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
    std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (std::uint64_t t : stream) {
        material.push_back(static_cast<std::uint32_t>(t));
        material.push_back(static_cast<std::uint32_t>(t >> 32));
    }
    std::seed_seq seq(material.begin(), material.end());
    return rng_type(seq);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
    return make_rng(seed, stream)();
}

} // namespace isb

#endif
