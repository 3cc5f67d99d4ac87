#pragma once

#include "message.hpp"
#include "rng.hpp"
#include "time.hpp"
#include "trace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include <absl/container/flat_hash_map.h>

namespace lelect {

class EngineError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct WakeEntry {
    NodeId node = 0;
    VirtualTime time;

    bool operator==(const WakeEntry&) const = default;
};

using WakeSchedule = std::vector<WakeEntry>;

/// What the adversary has observed so far. Realized coin flips (ranks) are
/// published here by protocols as soon as they are drawn; future samples are
/// never visible.
struct ExecutionHistory {
    std::vector<std::optional<Position>> revealed;
    std::optional<NodeId> topCandidate;
    std::uint64_t wakeups = 0;
    std::uint64_t sends = 0;
    std::uint64_t deliveries = 0;
    std::uint64_t digest = Fnv1a::kOffset;
};

struct SendContext {
    NodeId from;
    NodeId to;
    MessageType type;
    VirtualTime now;
    const ExecutionHistory& history;
};

/// Chooses the delay of each remote message; must return a value in (0, 1].
class DelayOracle {
public:
    virtual ~DelayOracle() = default;
    virtual VirtualTime delay(const SendContext& ctx) = 0;
};

/// Services the engine offers to protocol handlers.
class Context {
public:
    virtual ~Context() = default;
    virtual NodeId size() const = 0;
    virtual VirtualTime now() const = 0;
    virtual void send(NodeId from, NodeId to, const Message& msg) = 0;
    /// Zero-delay message to oneself; never counted as network traffic.
    virtual void sendLocal(NodeId node, const Message& msg) = 0;
    virtual RngStream& rng(NodeId node) = 0;
    virtual void reveal(NodeId node, const Position& pos) = 0;
};

class SyncContext : public Context {
public:
    virtual std::int64_t round() const = 0;
    virtual void setTimer(NodeId node, std::int64_t round) = 0;
};

enum class WakeCause : std::uint8_t { Spontaneous, ByMessage };

class AsyncProtocol {
public:
    virtual ~AsyncProtocol() = default;
    virtual void onWakeup(NodeId node, WakeCause cause, Context& ctx) = 0;
    /// `via` identifies the incoming link (the sender's index in the
    /// simulator frame); for local messages it is `node` itself.
    virtual void onMessage(NodeId node, NodeId via, const Message& msg, Context& ctx) = 0;
    virtual NodeSnapshot snapshot(NodeId node) const = 0;
};

struct Inbound {
    NodeId from;
    Message msg;
};

struct RoundInput {
    bool spontaneousWake = false;
    bool timer = false;
    std::span<const Inbound> inbox;
};

class SyncProtocol {
public:
    virtual ~SyncProtocol() = default;
    virtual void onRound(NodeId node, const RoundInput& in, SyncContext& ctx) = 0;
    virtual NodeSnapshot snapshot(NodeId node) const = 0;
};

struct EngineOptions {
    std::uint64_t eventBudget = 1'000'000'000ULL;
};

struct RunStats {
    MessageCounts counts{};
    std::uint64_t remoteMessages = 0;
    std::uint64_t localMessages = 0;
    std::uint64_t eventsProcessed = 0;
    std::optional<VirtualTime> firstWake;
    std::optional<VirtualTime> lastMessage;
    bool budgetExceeded = false;
    std::uint64_t traceHash = Fnv1a::kOffset;

    /// Last message delivery minus first spontaneous wake-up.
    VirtualTime elapsed() const;
};

struct Event {
    VirtualTime time;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Wakeup;
    NodeId from = -1;
    NodeId to = -1;
    VirtualTime sentAt;
    Message msg;
};

/// Asynchronous discrete-event engine over a complete graph with FIFO links.
class AsyncSimulator final : public Context {
public:
    AsyncSimulator(NodeId n, std::uint64_t trialSeed, DelayOracle& delays, EngineOptions opts = {});

    void addSink(TraceSink* sink) { sinks_.push_back(sink); }

    /// Enqueues an event at `time`, assigning the next sequence number.
    std::uint64_t schedule(VirtualTime time, EventKind kind, NodeId from, NodeId to, const Message& msg = {});

    /// Remote send with an explicit delay in (0, 1]; clamps to the edge's
    /// previous delivery time so the link stays FIFO.
    void sendWithDelay(NodeId from, NodeId to, const Message& msg, VirtualTime delay);

    NodeId size() const override { return n_; }
    VirtualTime now() const override { return now_; }
    void send(NodeId from, NodeId to, const Message& msg) override;
    void sendLocal(NodeId node, const Message& msg) override;
    RngStream& rng(NodeId node) override;
    void reveal(NodeId node, const Position& pos) override;

    RunStats run(AsyncProtocol& protocol, const WakeSchedule& wakes);

    const RunStats& stats() const { return stats_; }
    const ExecutionHistory& history() const { return history_; }
    bool awake(NodeId node) const { return awake_.at(static_cast<std::size_t>(node)); }
    std::size_t pending() const { return queue_.size(); }

    /// Pops and processes one event; returns false when the queue is empty.
    bool step(AsyncProtocol& protocol);

private:
    // Heap entries stay small; payloads live in slots_ and are recycled.
    struct Pending {
        VirtualTime time;
        std::uint64_t seq;
        std::uint32_t slot;
    };
    struct Later {
        bool operator()(const Pending& a, const Pending& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    void checkNode(NodeId node) const;
    void emit(TraceRecord& rec);

    NodeId n_;
    std::uint64_t trialSeed_;
    DelayOracle& delays_;
    EngineOptions opts_;
    VirtualTime now_;
    std::uint64_t nextSeq_ = 0;
    std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
    std::vector<Event> slots_;
    std::vector<std::uint32_t> freeSlots_;
    absl::flat_hash_map<std::uint64_t, VirtualTime> lastDelivery_;
    std::vector<std::optional<RngStream>> rngs_;
    std::vector<bool> awake_;
    ExecutionHistory history_;
    RunStats stats_;
    Fnv1a hash_;
    std::vector<TraceSink*> sinks_;
};

struct SyncWake {
    NodeId node = 0;
    std::int64_t round = 0;
};

/// Lockstep engine: everything sent in round r is delivered at the start of
/// round r + 1, then each involved node runs one handler with its batch.
class SyncSimulator final : public SyncContext {
public:
    SyncSimulator(NodeId n, std::uint64_t trialSeed, EngineOptions opts = {});

    void addSink(TraceSink* sink) { sinks_.push_back(sink); }

    NodeId size() const override { return n_; }
    VirtualTime now() const override { return VirtualTime::units(round_); }
    std::int64_t round() const override { return round_; }
    void send(NodeId from, NodeId to, const Message& msg) override;
    void sendLocal(NodeId node, const Message& msg) override;
    RngStream& rng(NodeId node) override;
    void reveal(NodeId node, const Position& pos) override;
    void setTimer(NodeId node, std::int64_t round) override;

    RunStats run(SyncProtocol& protocol, const std::vector<SyncWake>& wakes);

    const ExecutionHistory& history() const { return history_; }

private:
    struct InFlight {
        std::uint64_t seq;
        NodeId from;
        NodeId to;
        bool local;
        Message msg;
    };

    void checkNode(NodeId node) const;
    void emit(TraceRecord& rec);

    NodeId n_;
    std::uint64_t trialSeed_;
    EngineOptions opts_;
    std::int64_t round_ = 0;
    std::uint64_t nextSeq_ = 0;
    std::vector<InFlight> outbox_;
    std::map<std::int64_t, std::vector<NodeId>> timers_;
    std::vector<std::optional<RngStream>> rngs_;
    std::vector<bool> awake_;
    ExecutionHistory history_;
    RunStats stats_;
    Fnv1a hash_;
    std::vector<TraceSink*> sinks_;
};

}  // namespace lelect
