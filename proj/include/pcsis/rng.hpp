#pragma once

#include <cstdint>
#include <string_view>

namespace pcsis {

/// Independent random sub-streams derived from one master seed.
enum class StreamLabel { Scenario, Training, Surrogate, Volume, Validation, Survival };

std::string_view to_string(StreamLabel label);

/// One step of SplitMix64 (Steele, Lea, Flood).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a64(std::string_view text);

/// Seed of the sub-stream `label` under `master_seed`.
std::uint64_t derive_seed(std::uint64_t master_seed, StreamLabel label);

/// Counter-based generator: the stream for sample `index` depends only on
/// (stream_seed, index), so samples can be produced in any order or in
/// parallel with identical results.
class CounterRng {
public:
    CounterRng(std::uint64_t stream_seed, std::uint64_t index) {
        std::uint64_t s = stream_seed ^ 0x6a09e667f3bcc909ULL;
        const std::uint64_t a = splitmix64(s);
        std::uint64_t t = index + 0x3c6ef372fe94f82bULL;
        state_ = a ^ splitmix64(t);
    }

    std::uint64_t next() { return splitmix64(state_); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi]; hi is reachable only through rounding.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

}  // namespace pcsis
