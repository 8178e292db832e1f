#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cchain {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based seed split: (master, stream, index) -> independent seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ (index * 0xd1b54a32d192ed03ULL));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
    return Engine(derive_seed(master, stream, index));
}

// Uniform on the open interval (0, 1), 53 random bits.
inline double uniform_open(Engine& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_exponential(Engine& eng) { return -std::log(uniform_open(eng)); }

// Stream tags keep derived seeds of different consumers apart.
namespace stream {
inline constexpr std::uint64_t kBlockPath = 0x101;
inline constexpr std::uint64_t kGSampler = 0x102;
inline constexpr std::uint64_t kMuSampler = 0x103;
inline constexpr std::uint64_t kScaledGeometric = 0x104;
inline constexpr std::uint64_t kSuperLevel = 0x105;
inline constexpr std::uint64_t kNormalizedSum = 0x106;
inline constexpr std::uint64_t kReference = 0x107;
inline constexpr std::uint64_t kPartialSum = 0x108;
}  // namespace stream

}  // namespace cchain
