#include "lelect/rng.hpp"

namespace lelect {

namespace {
constexpr std::uint64_t kNodeDomain = 0x6e6f6465ULL;       // "node"
constexpr std::uint64_t kAdversaryDomain = 0x61647673ULL;  // "advs"
}  // namespace

std::uint64_t mixSeed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t deriveSeed(std::uint64_t a, std::uint64_t b) { return mixSeed(mixSeed(a) ^ (b * 0xd1342543de82ef95ULL)); }

std::uint64_t deriveSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return deriveSeed(deriveSeed(a, b), c); }

std::uint64_t trialSeed(std::uint64_t masterSeed, std::int64_t n, std::int64_t trialIndex) {
    return deriveSeed(masterSeed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trialIndex));
}

RngStream nodeStream(std::uint64_t trialSeed, std::int32_t node) {
    return RngStream(deriveSeed(trialSeed, kNodeDomain, static_cast<std::uint64_t>(node)));
}

RngStream adversaryStream(std::uint64_t adversarySeed, std::uint64_t trialSeed) {
    return RngStream(deriveSeed(adversarySeed, kAdversaryDomain, trialSeed));
}

}  // namespace lelect
