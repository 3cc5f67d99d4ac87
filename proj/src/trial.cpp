#include "lelect/trial.hpp"

#include "lelect/async_election.hpp"
#include "lelect/checker.hpp"
#include "lelect/engine.hpp"
#include "lelect/sync_election.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace lelect {

using nlohmann::json;

std::string_view outcomeName(Outcome o) {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::MultiLeader: return "multi-leader";
        case Outcome::NoLeader: return "no-leader";
        case Outcome::Nonterminating: return "nonterminating";
    }
    return "?";
}

double TrialReport::messagesPerN() const {
    return n > 0 ? static_cast<double>(totalRemoteMessages) / static_cast<double>(n) : 0.0;
}

double TrialReport::timePerLogSqN() const {
    if (n < 2) return 0.0;
    const double lg = std::log2(static_cast<double>(n));
    return elapsed.asUnits() / (lg * lg);
}

namespace {

json positionJson(const Position& p) {
    json j = {{"rank", p.rank}, {"phase", p.phase}};
    if (p.tiebreak) j["id"] = *p.tiebreak;
    return j;
}

// Distinct leader values held by nodes, and whether every node holds the
// same one.
template <typename Protocol>
void collectLeaders(const Protocol& protocol, NodeId n, TrialReport& report) {
    bool everyoneHolds = true;
    for (NodeId v = 0; v < n; ++v) {
        const auto& leader = protocol.state(v).leader;
        if (!leader) {
            everyoneHolds = false;
            continue;
        }
        if (std::find(report.leaderRanks.begin(), report.leaderRanks.end(), *leader) == report.leaderRanks.end()) {
            report.leaderRanks.push_back(*leader);
        }
    }
    report.agreement = everyoneHolds && report.leaderRanks.size() == 1;
}

void classify(TrialReport& report, bool budgetExceeded) {
    if (budgetExceeded) {
        report.outcome = Outcome::Nonterminating;
    } else if (report.electedCount > 1 || report.leaderRanks.size() > 1) {
        report.outcome = Outcome::MultiLeader;
    } else if (report.electedCount == 1 && report.agreement) {
        report.outcome = Outcome::Success;
    } else {
        report.outcome = Outcome::NoLeader;
    }
}

void fillCommon(TrialReport& report, const RunStats& stats) {
    report.messageCounts = stats.counts;
    report.totalRemoteMessages = stats.remoteMessages;
    report.eventsProcessed = stats.eventsProcessed;
    report.elapsed = stats.elapsed();
    report.traceHash = stats.traceHash;
}

}  // namespace

TrialReport runTrial(const TrialSpec& spec) {
    if (spec.n < 1) throw AdversaryError("n must be at least 1");
    RngStream adversaryRng = adversaryStream(spec.adversary.adversarySeed, spec.seed);
    const WakeSchedule wakes = builtinWakeSchedule(spec.adversary.wake, spec.n, adversaryRng);
    validateWakeSchedule(wakes, spec.n);

    TrialReport report;
    report.n = spec.n;
    report.seed = spec.seed;
    report.trialIndex = spec.trialIndex;
    report.protocol = spec.protocol;
    report.adversary = spec.adversary.label();
    report.uniqueIds = spec.uniqueIds;

    const TraceHeader header{spec.protocol, spec.n, spec.seed, spec.uniqueIds, report.adversary};
    CheckerOptions checkOpts;
    checkOpts.phaseSpanLimit = spec.phaseSpanLimit;
    TraceChecker checker(header, checkOpts);
    std::unique_ptr<TraceFileWriter> writer;
    if (!spec.tracePath.empty()) writer = std::make_unique<TraceFileWriter>(spec.tracePath, header);

    EngineOptions engineOpts;
    engineOpts.eventBudget = spec.eventBudget;
    RunStats stats;
    std::vector<std::string> anomalies;

    if (spec.protocol == ProtocolKind::Async) {
        auto delays = builtinDelayPolicy(spec.adversary.delay, adversaryRng);
        AsyncSimulator sim(spec.n, spec.seed, *delays, engineOpts);
        sim.addSink(&checker);
        if (writer) sim.addSink(writer.get());
        AsyncElection election(spec.n, ElectionOptions{spec.uniqueIds});
        stats = sim.run(election, wakes);

        report.electedCount = election.electedNodes().size();
        collectLeaders(election, spec.n, report);
        report.phases = election.schedule().phases();
        const auto& participants = election.phaseParticipants();
        report.perPhaseCandidateCounts.assign(participants.begin() + 1, participants.end());
        report.maxPhaseSpan = election.maxPhaseSpan();
        anomalies = election.anomalies();
    } else {
        SyncSimulator sim(spec.n, spec.seed, engineOpts);
        sim.addSink(&checker);
        if (writer) sim.addSink(writer.get());
        SyncElection election(spec.n, SyncElectionOptions{spec.uniqueIds});
        stats = sim.run(election, toSyncWakes(wakes));

        report.electedCount = election.winners().size();
        collectLeaders(election, spec.n, report);
        report.firstActivationRound = election.firstActivationRound();
        anomalies = election.anomalies();
    }
    fillCommon(report, stats);
    if (stats.firstWake) {
        report.firstWakeRound = stats.firstWake->ticks() / VirtualTime::kTicksPerUnit;
        if (spec.protocol == ProtocolKind::Sync && stats.lastMessage) {
            report.roundCount = stats.lastMessage->ticks() / VirtualTime::kTicksPerUnit - *report.firstWakeRound;
        }
    }
    if (writer) writer->finish(stats.traceHash);

    if (stats.budgetExceeded) {
        report.invariantViolations.push_back("event budget of " + std::to_string(spec.eventBudget) + " exhausted");
    }
    for (const Violation& v : checker.finish()) report.invariantViolations.push_back(toString(v));
    for (const std::string& a : anomalies) report.invariantViolations.push_back("protocol anomaly: " + a);
    classify(report, stats.budgetExceeded);
    return report;
}

json toJson(const TrialReport& r) {
    json counts = json::object();
    for (std::size_t i = 0; i < kMessageTypeCount; ++i) {
        if (r.messageCounts[i] > 0) counts[std::string(messageTag(static_cast<MessageType>(i)))] = r.messageCounts[i];
    }
    json leaders = json::array();
    for (const Position& p : r.leaderRanks) leaders.push_back(positionJson(p));
    json j = {{"n", r.n},
              {"seed", r.seed},
              {"trial", r.trialIndex},
              {"protocol", protocolName(r.protocol)},
              {"adversary", r.adversary},
              {"uniqueIds", r.uniqueIds},
              {"messageCounts", counts},
              {"totalRemoteMessages", r.totalRemoteMessages},
              {"messagesPerN", r.messagesPerN()},
              {"eventsProcessed", r.eventsProcessed},
              {"elapsed", r.elapsed.asUnits()},
              {"timePerLogSqN", r.timePerLogSqN()},
              {"leaderRanks", leaders},
              {"electedCount", r.electedCount},
              {"agreement", r.agreement},
              {"invariantViolations", r.invariantViolations},
              {"traceHash", hashToHex(r.traceHash)},
              {"outcome", outcomeName(r.outcome)}};
    if (r.protocol == ProtocolKind::Async) {
        j["phases"] = r.phases;
        j["perPhaseCandidateCounts"] = r.perPhaseCandidateCounts;
        j["maxPhaseSpan"] = r.maxPhaseSpan.asUnits();
    } else {
        j["roundCount"] = r.roundCount;
        j["firstActivationRound"] = r.firstActivationRound ? json(*r.firstActivationRound) : json(nullptr);
    }
    return j;
}

}  // namespace lelect
