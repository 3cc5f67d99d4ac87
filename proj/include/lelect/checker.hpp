#pragma once

#include "time.hpp"
#include "trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <absl/container/flat_hash_map.h>

namespace lelect {

struct Violation {
    std::uint64_t seq = 0;
    std::string rule;
    std::string detail;
};

std::string toString(const Violation& v);

struct CheckerOptions {
    /// Longest allowed candidate phase (async).
    VirtualTime phaseSpanLimit = VirtualTime::units(8);
    /// Last delivery may be at most this many rounds after the first wake-up (sync).
    std::int64_t syncRoundLimit = 9;
};

/// Replays a stream of trace records and checks the model and protocol
/// invariants: event order, FIFO links, delay bounds, referee and candidate
/// state-machine legality, reply conservation, unique election, agreement,
/// phase latency (async) and the round bound and message windows (sync).
class TraceChecker final : public TraceSink {
public:
    explicit TraceChecker(const TraceHeader& header, CheckerOptions opts = {});

    void record(const TraceRecord& rec) override;
    /// Runs end-of-trace checks; returns every violation found.
    std::vector<Violation> finish();

private:
    struct NodeView {
        NodeSnapshot state;
        std::optional<VirtualTime> retiredAt;
        std::optional<std::int64_t> activationRound;
    };
    struct EdgeView {
        std::uint64_t lastSeq = 0;
        bool any = false;
    };
    struct PhaseView {
        VirtualTime start;
        std::optional<VirtualTime> lastReply;
    };
    struct RequestKey {
        NodeId requester;
        NodeId referee;
        std::int32_t phase;
        auto operator<=>(const RequestKey&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const RequestKey& k) const;
        std::size_t operator()(const std::pair<NodeId, std::int64_t>& k) const;
    };
    struct RequestView {
        std::uint64_t seq = 0;
        std::int32_t replies = 0;
        bool refereeWasTerminated = false;
    };

    void fail(std::uint64_t seq, const std::string& rule, const std::string& detail);
    bool validNode(NodeId node) const { return node >= 0 && node < header_.n; }
    void checkOrder(const TraceRecord& rec);
    void checkMessage(const TraceRecord& rec);
    void checkAsyncMessage(const TraceRecord& rec);
    void checkSyncMessage(const TraceRecord& rec);
    void checkTransition(const TraceRecord& rec);
    void checkAsyncTransition(const TraceRecord& rec, const NodeSnapshot& before, const NodeSnapshot& after);
    void checkSyncTransition(const TraceRecord& rec, const NodeSnapshot& before, const NodeSnapshot& after);
    void finishAsync();
    void finishSync();
    void checkAgreement(const std::vector<NodeId>& winners);
    std::string roleName(std::uint8_t role) const;

    TraceHeader header_;
    CheckerOptions opts_;
    std::vector<Violation> violations_;
    std::vector<NodeView> nodes_;
    absl::flat_hash_map<std::uint64_t, EdgeView> edges_;
    absl::flat_hash_map<std::pair<NodeId, std::int64_t>, PhaseView, KeyHash> phases_;
    absl::flat_hash_map<RequestKey, RequestView, KeyHash> requests_;
    std::vector<NodeId> elected_;
    std::vector<NodeId> winners_;
    // (node, round) -> sync requests delivered to that node in that round
    absl::flat_hash_map<std::pair<NodeId, std::int64_t>, std::int64_t, KeyHash> syncRequestsIn_;
    bool havePrev_ = false;
    VirtualTime prevTime_;
    std::uint64_t prevSeq_ = 0;
    std::optional<VirtualTime> firstWake_;
    std::optional<std::int64_t> firstActivation_;
    std::size_t records_ = 0;
    bool finished_ = false;
};

struct VerifyResult {
    TraceHeader header;
    std::size_t records = 0;
    std::uint64_t computedHash = 0;
    std::optional<std::uint64_t> declaredHash;
    std::vector<Violation> violations;
};

/// Loads a JSON-lines trace, replays it through TraceChecker and compares
/// the recomputed hash with the one declared in the trace's summary line.
VerifyResult verifyTrace(const std::string& path, CheckerOptions opts = {});

}  // namespace lelect
