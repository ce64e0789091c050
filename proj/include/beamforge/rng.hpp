#pragma once

#include <cstdint>

namespace beamforge {

// Named sub-streams derived from the single user-facing seed, so that e.g.
// pinning one selector does not shift the initialization of the others.
enum class SeedStream : std::uint64_t {
    RfBias = 1,
    AntennaBias = 2,
    Phases = 3,
    Precoder = 4,
    Snapshots = 5,
};

/// splitmix64 finalizer over (seed, stream); decorrelates sub-streams.
inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(stream) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace beamforge
