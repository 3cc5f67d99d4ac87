#pragma once

#include "adversary.hpp"
#include "trial.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace lelect {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepSpec {
    std::vector<NodeId> sizes;
    std::int32_t trials = 1;
    ProtocolKind protocol = ProtocolKind::Async;
    AdversaryConfig adversary;
    std::uint64_t masterSeed = 0;
    bool uniqueIds = true;
    std::string outputPath;
    std::uint64_t eventBudget = 1'000'000'000ULL;
    /// 0 = hardware concurrency.
    unsigned workers = 0;
};

nlohmann::json toJson(const SweepSpec& spec);
/// Throws ConfigError naming the offending field.
SweepSpec sweepFromJson(const nlohmann::json& j);
/// Throws ConfigError with line/column for syntax errors.
SweepSpec loadSweepConfig(const std::string& path);

struct SizeSummary {
    NodeId n = 0;
    std::size_t trials = 0;
    double meanMessages = 0;
    std::uint64_t maxMessages = 0;
    double meanMessagesPerN = 0;
    double p95MessagesPerN = 0;
    double meanTime = 0;
    double maxTime = 0;
    double meanTimePerLogSqN = 0;
    double p95TimePerLogSqN = 0;
    double successRate = 0;
    double attritionViolationRate = 0;
};

struct AttritionResult {
    std::uint64_t pairs = 0;
    std::uint64_t satisfied = 0;
    /// satisfied / pairs; 1 when no pair falls under the limit.
    double rate = 1.0;
};

/// Fraction of (trial, phase) pairs with phase <= limit whose participant
/// count stays within ceil(n / 4^(phase-1)). The default limit is each
/// trial's K - ceil(log log n) - 5.
AttritionResult attritionCheck(std::span<const TrialReport> reports, std::optional<std::int32_t> phaseLimit = {});

/// Nearest-rank percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

std::vector<SizeSummary> summarize(std::span<const TrialReport> reports);

void writeTrialsCsv(std::ostream& out, std::span<const TrialReport> reports);
void writeSummaryCsv(std::ostream& out, std::span<const SizeSummary> summary);

struct SweepResult {
    std::vector<TrialReport> reports;
    std::vector<SizeSummary> summary;
};

/// Trial i at size n runs with seed trialSeed(masterSeed, n, i). Reports are
/// ordered by (n, trial) regardless of worker scheduling. When outputPath
/// is set, writes trials.csv and summary.csv there.
SweepResult runSweep(const SweepSpec& spec);

}  // namespace lelect
