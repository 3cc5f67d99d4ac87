#pragma once

#include "lelect/engine.hpp"

#include <functional>
#include <map>
#include <vector>

namespace lelect::testing {

struct Sent {
    NodeId from;
    NodeId to;
    Message msg;
    bool local;
};

// Context that records every send instead of delivering it.
class FakeContext : public SyncContext {
public:
    explicit FakeContext(NodeId n, std::uint64_t seed = 7) : n_(n), seed_(seed) {}

    NodeId size() const override { return n_; }
    VirtualTime now() const override { return now_; }
    void send(NodeId from, NodeId to, const Message& msg) override { sent.push_back({from, to, msg, false}); }
    void sendLocal(NodeId node, const Message& msg) override { sent.push_back({node, node, msg, true}); }
    RngStream& rng(NodeId node) override {
        auto it = rngs_.find(node);
        if (it == rngs_.end()) it = rngs_.emplace(node, nodeStream(seed_, node)).first;
        return it->second;
    }
    void reveal(NodeId, const Position&) override {}
    std::int64_t round() const override { return round_; }
    void setTimer(NodeId node, std::int64_t round) override { timers.push_back({node, round}); }

    void setNow(VirtualTime t) { now_ = t; }
    void setRound(std::int64_t r) {
        round_ = r;
        now_ = VirtualTime::units(r);
    }

    std::vector<Sent> take() {
        std::vector<Sent> out;
        out.swap(sent);
        return out;
    }

    std::vector<Sent> sent;
    std::vector<std::pair<NodeId, std::int64_t>> timers;

private:
    NodeId n_;
    std::uint64_t seed_;
    VirtualTime now_;
    std::int64_t round_ = 0;
    std::map<NodeId, RngStream> rngs_;
};

// Protocol driven by callbacks; records what each handler saw.
class ScriptedProtocol : public AsyncProtocol {
public:
    struct Seen {
        VirtualTime time;
        NodeId node;
        NodeId via;
        bool wake;
        Message msg;
    };

    std::function<void(NodeId, Context&)> onWake;
    std::function<void(NodeId, NodeId, const Message&, Context&)> onMsg;
    std::vector<Seen> seen;

    void onWakeup(NodeId node, WakeCause cause, Context& ctx) override {
        if (cause != WakeCause::Spontaneous) return;
        seen.push_back({ctx.now(), node, -1, true, {}});
        if (onWake) onWake(node, ctx);
    }
    void onMessage(NodeId node, NodeId via, const Message& msg, Context& ctx) override {
        seen.push_back({ctx.now(), node, via, false, msg});
        if (onMsg) onMsg(node, via, msg, ctx);
    }
    NodeSnapshot snapshot(NodeId) const override { return {}; }
};

// Delay oracle returning a fixed sequence of delays, then 1.
class ListDelay : public DelayOracle {
public:
    explicit ListDelay(std::vector<double> delays) : delays_(std::move(delays)) {}
    VirtualTime delay(const SendContext&) override {
        if (next_ < delays_.size()) return VirtualTime::fromUnits(delays_[next_++]);
        return kOneUnit;
    }

private:
    std::vector<double> delays_;
    std::size_t next_ = 0;
};

struct RecordingSink : TraceSink {
    std::vector<TraceRecord> records;
    void record(const TraceRecord& rec) override { records.push_back(rec); }
};

}  // namespace lelect::testing
