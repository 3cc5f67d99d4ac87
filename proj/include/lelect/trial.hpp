#pragma once

#include "adversary.hpp"
#include "message.hpp"
#include "time.hpp"
#include "trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lelect {

enum class Outcome : std::uint8_t { Success, MultiLeader, NoLeader, Nonterminating };

std::string_view outcomeName(Outcome o);

struct TrialSpec {
    ProtocolKind protocol = ProtocolKind::Async;
    NodeId n = 2;
    std::uint64_t seed = 0;
    std::int64_t trialIndex = 0;
    AdversaryConfig adversary;
    bool uniqueIds = false;
    std::uint64_t eventBudget = 1'000'000'000ULL;
    /// Empty: no trace file.
    std::string tracePath;
    VirtualTime phaseSpanLimit = VirtualTime::units(8);
};

struct TrialReport {
    NodeId n = 0;
    std::uint64_t seed = 0;
    std::int64_t trialIndex = 0;
    ProtocolKind protocol = ProtocolKind::Async;
    std::string adversary;
    bool uniqueIds = false;

    MessageCounts messageCounts{};
    std::uint64_t totalRemoteMessages = 0;
    std::uint64_t eventsProcessed = 0;
    VirtualTime elapsed;
    /// Sync only: last delivery round minus first wake-up round.
    std::int64_t roundCount = 0;
    std::optional<std::int64_t> firstWakeRound;
    std::optional<std::int64_t> firstActivationRound;

    std::vector<Position> leaderRanks;
    std::uint64_t electedCount = 0;
    bool agreement = false;
    std::int32_t phases = 0;
    std::vector<std::uint64_t> perPhaseCandidateCounts;
    VirtualTime maxPhaseSpan;

    std::vector<std::string> invariantViolations;
    std::uint64_t traceHash = 0;
    Outcome outcome = Outcome::NoLeader;

    double messagesPerN() const;
    /// elapsed / (log2 n)^2 in time units.
    double timePerLogSqN() const;
};

nlohmann::json toJson(const TrialReport& r);

/// Runs one trial, checking the trace online, and fills the report.
TrialReport runTrial(const TrialSpec& spec);

}  // namespace lelect
