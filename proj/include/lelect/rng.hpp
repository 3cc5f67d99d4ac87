#pragma once

#include <cstdint>
#include <random>

namespace lelect {

/// Mixes a 64-bit value (splitmix64 finalizer). Used only to derive seeds.
std::uint64_t mixSeed(std::uint64_t x);

/// Combines seed material into a new seed; order-sensitive.
std::uint64_t deriveSeed(std::uint64_t a, std::uint64_t b);
std::uint64_t deriveSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

using RngStream = std::mt19937_64;

/// Trial seed for trial `trialIndex` of a sweep at size n.
std::uint64_t trialSeed(std::uint64_t masterSeed, std::int64_t n, std::int64_t trialIndex);

/// Private coin stream of one node within a trial.
RngStream nodeStream(std::uint64_t trialSeed, std::int32_t node);

/// The adversary's stream; disjoint from every node stream.
RngStream adversaryStream(std::uint64_t adversarySeed, std::uint64_t trialSeed);

}  // namespace lelect
