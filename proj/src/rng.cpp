#include "pcsis/rng.hpp"

namespace pcsis {

std::string_view to_string(StreamLabel label) {
    switch (label) {
        case StreamLabel::Scenario: return "scenario";
        case StreamLabel::Training: return "training";
        case StreamLabel::Surrogate: return "surrogate";
        case StreamLabel::Volume: return "volume";
        case StreamLabel::Validation: return "validation";
        case StreamLabel::Survival: return "survival";
    }
    return "unknown";
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master_seed, StreamLabel label) {
    std::uint64_t s = master_seed ^ fnv1a64(to_string(label));
    return splitmix64(s);
}

}  // namespace pcsis
